from dataclasses import dataclass
from typing import Optional

from log_parser import format_iso_time
from models.csv_table import opt_str, read_opt_str, read_table, write_table

FILE_NAME = 'users.csv'
HEADER = ['user_id', 'kind', 'login', 'ip', 'agent', 'first_seen', 'request_count']


@dataclass(frozen=True)
class UserRow:
    user_id: int
    kind: str
    login: Optional[str]
    ip: Optional[str]
    agent: Optional[str]
    first_seen: str
    request_count: int


def build_user_rows(table) -> list:
    return [
        UserRow(
            user_id=u.user_id,
            kind=u.key.kind.value,
            login=u.key.login,
            ip=u.key.ip,
            agent=u.key.agent,
            first_seen=format_iso_time(u.first_seen),
            request_count=u.request_count,
        )
        for u in table
    ]


def write_users(path, rows):
    records = (
        [r.user_id, r.kind, opt_str(r.login), opt_str(r.ip), opt_str(r.agent), r.first_seen, r.request_count]
        for r in rows
    )
    return write_table(path, HEADER, records)


def read_users(path) -> list:
    return [
        UserRow(
            user_id=int(rec[0]), kind=rec[1], login=read_opt_str(rec[2]), ip=read_opt_str(rec[3]),
            agent=read_opt_str(rec[4]), first_seen=rec[5], request_count=int(rec[6]),
        )
        for rec in read_table(path, HEADER)
    ]
