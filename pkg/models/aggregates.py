from dataclasses import dataclass

from log_parser import format_iso_time
from models.csv_table import read_table, write_table

SESSION_AGGREGATES_FILE = 'session_aggregates.csv'
SESSION_AGGREGATES_HEADER = ['user_id', 'visit_count', 'length_seconds', 'page_views', 'first', 'last']

PERIOD_AGGREGATES_FILE = 'period_aggregates.csv'
PERIOD_AGGREGATES_HEADER = ['granularity', 'bucket', 'unique_visitors', 'unique_hosts', 'unique_agents',
                            'visit_count', 'request_count']

SERVER_SHARES_FILE = 'server_shares.csv'
SERVER_SHARES_HEADER = ['server', 'request_count', 'percent']

URL_AGGREGATES_FILE = 'url_aggregates.csv'
URL_AGGREGATES_HEADER = ['url', 'request_count', 'visit_count', 'unique_visitors']


@dataclass(frozen=True)
class SessionAggregateRow:
    user_id: int
    visit_count: int
    length_seconds: int
    page_views: int
    first: str
    last: str


@dataclass(frozen=True)
class PeriodAggregateRow:
    granularity: str
    bucket: str
    unique_visitors: int
    unique_hosts: int
    unique_agents: int
    visit_count: int
    request_count: int


@dataclass(frozen=True)
class ServerShareRow:
    server: str
    request_count: int
    percent: float


@dataclass(frozen=True)
class UrlAggregateRow:
    url: str
    request_count: int
    visit_count: int
    unique_visitors: int


# ========== AGREGADOS POR SESSÃO DE USUÁRIO ==========

def build_session_aggregate_rows(aggregates) -> list:
    return [
        SessionAggregateRow(a.user_id, a.visit_count, a.length_seconds, a.page_views,
                            format_iso_time(a.first), format_iso_time(a.last))
        for a in aggregates
    ]


def write_session_aggregates(path, rows):
    records = ([r.user_id, r.visit_count, r.length_seconds, r.page_views, r.first, r.last] for r in rows)
    return write_table(path, SESSION_AGGREGATES_HEADER, records)


def read_session_aggregates(path) -> list:
    return [
        SessionAggregateRow(int(rec[0]), int(rec[1]), int(rec[2]), int(rec[3]), rec[4], rec[5])
        for rec in read_table(path, SESSION_AGGREGATES_HEADER)
    ]


# ========== AGREGADOS POR PERÍODO ==========

def build_period_aggregate_rows(aggregates) -> list:
    return [
        PeriodAggregateRow(a.granularity, format_iso_time(a.bucket), a.unique_visitors, a.unique_hosts,
                           a.unique_agents, a.visit_count, a.request_count)
        for a in aggregates
    ]


def write_period_aggregates(path, rows):
    records = (
        [r.granularity, r.bucket, r.unique_visitors, r.unique_hosts, r.unique_agents, r.visit_count, r.request_count]
        for r in rows
    )
    return write_table(path, PERIOD_AGGREGATES_HEADER, records)


def read_period_aggregates(path) -> list:
    return [
        PeriodAggregateRow(rec[0], rec[1], int(rec[2]), int(rec[3]), int(rec[4]), int(rec[5]), int(rec[6]))
        for rec in read_table(path, PERIOD_AGGREGATES_HEADER)
    ]


# ========== PARTICIPAÇÃO POR SERVIDOR ==========

def build_server_share_rows(shares) -> list:
    return [ServerShareRow(s.server_name, s.request_count, s.percent) for s in shares]


def write_server_shares(path, rows):
    # repr() do float volta exatamente ao mesmo valor na leitura
    records = ([r.server, r.request_count, repr(r.percent)] for r in rows)
    return write_table(path, SERVER_SHARES_HEADER, records)


def read_server_shares(path) -> list:
    return [
        ServerShareRow(rec[0], int(rec[1]), float(rec[2]))
        for rec in read_table(path, SERVER_SHARES_HEADER)
    ]


# ========== URLS GENERALIZADAS ==========

def build_url_aggregate_rows(aggregates) -> list:
    return [UrlAggregateRow(a.url, a.request_count, a.visit_count, a.unique_visitors) for a in aggregates]


def write_url_aggregates(path, rows):
    records = ([r.url, r.request_count, r.visit_count, r.unique_visitors] for r in rows)
    return write_table(path, URL_AGGREGATES_HEADER, records)


def read_url_aggregates(path) -> list:
    return [
        UrlAggregateRow(rec[0], int(rec[1]), int(rec[2]), int(rec[3]))
        for rec in read_table(path, URL_AGGREGATES_HEADER)
    ]
