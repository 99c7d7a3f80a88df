"""Listagem de sessões: uma linha por requisição, agrupada pela visita"""
from dataclasses import dataclass

from log_parser import format_table_time
from models.csv_table import read_table, write_table

FILE_NAME = 'session_detail.csv'
HEADER = ['session_id', 'ip', 'datetime', 'url']


@dataclass(frozen=True)
class SessionDetailRow:
    session_id: int
    ip: str
    datetime: str
    url: str


def build_session_detail_rows(log, sessions) -> list:
    rows = []
    for visit in sessions.visits:
        for idx in visit.entries:
            entry = log.entries[idx]
            rows.append(SessionDetailRow(
                session_id=visit.visit_id,
                ip=entry.ip,
                datetime=format_table_time(entry.time),
                url=entry.url,
            ))
    return rows


def write_session_detail(path, rows):
    return write_table(path, HEADER, ([r.session_id, r.ip, r.datetime, r.url] for r in rows))


def read_session_detail(path) -> list:
    return [
        SessionDetailRow(session_id=int(rec[0]), ip=rec[1], datetime=rec[2], url=rec[3])
        for rec in read_table(path, HEADER)
    ]
