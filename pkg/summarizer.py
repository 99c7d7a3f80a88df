"""
Variáveis agregadas por sessão de usuário, por período e por servidor, e
generalização de urls no nível da requisição.
"""

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np
import pandas as pd

from identity import AnnotatedLog
from log_parser import Timestamp
from sessionizer import SessionSet

logger = logging.getLogger(__name__)

GRANULARITIES = ('hour', 'day', 'week', 'month')


@dataclass
class SessionAggregate:
    user_id: int
    visit_count: int
    length_seconds: int
    page_views: int
    first: Timestamp
    last: Timestamp


@dataclass
class PeriodAggregate:
    granularity: str
    bucket: Timestamp
    unique_visitors: int
    unique_hosts: int
    unique_agents: int
    visit_count: int
    request_count: int


@dataclass
class ServerShare:
    server_name: str
    request_count: int
    percent: float


@dataclass
class UrlAggregate:
    url: str
    request_count: int
    visit_count: int
    unique_visitors: int


def session_aggregates(sessions: SessionSet, log: AnnotatedLog) -> list:
    """Um agregado por usuário, somando as visitas da sua sessão"""
    if len(sessions.visit_of_entry) != len(log):
        raise ValueError("Conjunto de visitas não corresponde ao log")

    aggregates = []
    for user_id in sorted(sessions.per_user_visits):
        visits = [sessions.visit(v) for v in sessions.per_user_visits[user_id]]
        first = min((v.start for v in visits), key=lambda t: t.utc_epoch_seconds)
        last = max((v.end for v in visits), key=lambda t: t.utc_epoch_seconds)
        aggregates.append(SessionAggregate(
            user_id=user_id,
            visit_count=len(visits),
            length_seconds=last.utc_epoch_seconds - first.utc_epoch_seconds,
            page_views=sum(v.page_views for v in visits),
            first=first,
            last=last,
        ))
    return aggregates


# 01/01/1970 foi quinta-feira: deslocamento até a segunda-feira anterior
_EPOCH_WEEKDAY = 3
_SECONDS_PER_DAY = 86400

# Unidades de calendário do numpy por granularidade (a semana é tratada à parte)
_NUMPY_UNITS = {'hour': 'datetime64[h]', 'day': 'datetime64[D]', 'month': 'datetime64[M]'}


def _bucket_starts(seconds: pd.Series, granularity: str) -> pd.Series:
    """
    Início (segundos UTC) do período de calendário de cada instante.
    Calculado em resolução de segundos, válido para todo ano aceito pelo parser.
    """
    values = seconds.to_numpy(dtype='int64')
    if granularity == 'week':
        days = np.floor_divide(values, _SECONDS_PER_DAY)
        starts = (days - (days + _EPOCH_WEEKDAY) % 7) * _SECONDS_PER_DAY
    elif granularity in _NUMPY_UNITS:
        unit = _NUMPY_UNITS[granularity]
        starts = values.astype('datetime64[s]').astype(unit).astype('datetime64[s]').astype('int64')
    else:
        raise ValueError(f"Granularidade inválida: {granularity}")
    return pd.Series(starts, index=seconds.index, dtype='int64')


def period_aggregates(log: AnnotatedLog, sessions: SessionSet, granularity: str) -> list:
    """Contagens por hora/dia/semana/mês; a visita conta no período do seu início"""
    if granularity not in GRANULARITIES:
        raise ValueError(f"Granularidade inválida: {granularity}")
    if not len(log):
        return []

    entries = log.entries
    frame = pd.DataFrame({
        'time': [e.time.utc_epoch_seconds for e in entries],
        'user_id': log.user_ids,
        'ip': [e.ip for e in entries],
        'agent': [e.agent for e in entries],
    })
    frame['bucket'] = _bucket_starts(frame['time'], granularity)
    grouped = frame.groupby('bucket').agg(
        request_count=('time', 'size'),
        unique_visitors=('user_id', 'nunique'),
        unique_hosts=('ip', 'nunique'),
        unique_agents=('agent', 'nunique'),
    )

    visit_starts = pd.Series([v.start.utc_epoch_seconds for v in sessions.visits], dtype='int64')
    visit_counts = _bucket_starts(visit_starts, granularity).value_counts()

    aggregates = []
    for bucket, row in grouped.sort_index().iterrows():
        aggregates.append(PeriodAggregate(
            granularity=granularity,
            bucket=Timestamp(int(bucket), 0),
            unique_visitors=int(row['unique_visitors']),
            unique_hosts=int(row['unique_hosts']),
            unique_agents=int(row['unique_agents']),
            visit_count=int(visit_counts.get(bucket, 0)),
            request_count=int(row['request_count']),
        ))
    return aggregates


def server_shares(log) -> list:
    """Percentual das requisições feitas a cada servidor, ordenado pelo nome"""
    counts = Counter(e.server for e in log.entries)
    total = sum(counts.values())
    return [
        ServerShare(server_name=name, request_count=counts[name], percent=100.0 * counts[name] / total)
        for name in sorted(counts)
    ]


def generalize_url(url: str, depth: int) -> str:
    """
    Remove a query e trunca o caminho nos primeiros `depth` segmentos,
    terminando em '/' quando houve truncamento.
    """
    if depth < 1:
        raise ValueError(f"Profundidade de generalização deve ser positiva: {depth}")

    base = url.split('?', 1)[0].split('#', 1)[0]
    prefix, path = '', base
    if '://' in base:
        slash = base.find('/', base.find('://') + 3)
        if slash < 0:
            return base
        prefix, path = base[:slash], base[slash:]

    segments = [s for s in path.split('/') if s]
    if len(segments) <= depth:
        return base
    return prefix + '/' + '/'.join(segments[:depth]) + '/'


def url_aggregates(log: AnnotatedLog, sessions: SessionSet, depth: int) -> list:
    """Requisições, visitas e visitantes distintos por url generalizada"""
    requests = Counter()
    visits = {}
    visitors = {}
    cache = {}
    for idx, entry in enumerate(log.entries):
        url = cache.get(entry.url)
        if url is None:
            url = cache[entry.url] = generalize_url(entry.url, depth)
        requests[url] += 1
        visits.setdefault(url, set()).add(sessions.visit_of_entry[idx])
        visitors.setdefault(url, set()).add(log.user_ids[idx])

    rows = [
        UrlAggregate(url=url, request_count=count, visit_count=len(visits[url]), unique_visitors=len(visitors[url]))
        for url, count in requests.items()
    ]
    rows.sort(key=lambda r: (-r.request_count, r.url))
    return rows
