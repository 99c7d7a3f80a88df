from dataclasses import dataclass
from typing import Optional

from log_parser import format_iso_time
from models.csv_table import (
    opt_int, opt_str, read_opt_int, read_opt_str, read_table, write_table,
)

FILE_NAME = 'requests.csv'
HEADER = ['request_id', 'server', 'user_id', 'visit_id', 'timestamp_utc', 'method', 'url',
          'protocol', 'status', 'bytes', 'referrer', 'agent']


@dataclass(frozen=True)
class RequestRow:
    request_id: int
    server: str
    user_id: int
    visit_id: int
    timestamp_utc: str
    method: str
    url: str
    protocol: str
    status: int
    bytes: Optional[int]
    referrer: Optional[str]
    agent: Optional[str]


def build_request_rows(log, sessions) -> list:
    rows = []
    for idx, entry in enumerate(log.entries):
        rows.append(RequestRow(
            request_id=idx + 1,
            server=entry.server,
            user_id=log.user_ids[idx],
            visit_id=sessions.visit_of_entry[idx],
            timestamp_utc=format_iso_time(entry.time),
            method=entry.method,
            url=entry.url,
            protocol=entry.protocol,
            status=entry.status,
            bytes=entry.bytes,
            referrer=entry.referrer,
            agent=entry.agent,
        ))
    return rows


def write_requests(path, rows):
    records = (
        [r.request_id, r.server, r.user_id, r.visit_id, r.timestamp_utc, r.method, r.url,
         r.protocol, r.status, opt_int(r.bytes), opt_str(r.referrer), opt_str(r.agent)]
        for r in rows
    )
    return write_table(path, HEADER, records)


def read_requests(path) -> list:
    return [
        RequestRow(
            request_id=int(rec[0]), server=rec[1], user_id=int(rec[2]), visit_id=int(rec[3]),
            timestamp_utc=rec[4], method=rec[5], url=rec[6], protocol=rec[7], status=int(rec[8]),
            bytes=read_opt_int(rec[9]), referrer=read_opt_str(rec[10]), agent=read_opt_str(rec[11]),
        )
        for rec in read_table(path, HEADER)
    ]
