from dataclasses import dataclass

from log_parser import format_iso_time
from models.csv_table import read_table, write_table

FILE_NAME = 'visits.csv'
HEADER = ['visit_id', 'user_id', 'start', 'end', 'page_views']


@dataclass(frozen=True)
class VisitRow:
    visit_id: int
    user_id: int
    start: str
    end: str
    page_views: int


def build_visit_rows(sessions) -> list:
    return [
        VisitRow(
            visit_id=v.visit_id,
            user_id=v.user_id,
            start=format_iso_time(v.start),
            end=format_iso_time(v.end),
            page_views=v.page_views,
        )
        for v in sessions.visits
    ]


def write_visits(path, rows):
    return write_table(path, HEADER, ([r.visit_id, r.user_id, r.start, r.end, r.page_views] for r in rows))


def read_visits(path) -> list:
    return [
        VisitRow(visit_id=int(rec[0]), user_id=int(rec[1]), start=rec[2], end=rec[3], page_views=int(rec[4]))
        for rec in read_table(path, HEADER)
    ]
