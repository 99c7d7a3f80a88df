"""
Testes da sumarização (sessões de usuário, períodos, servidores, urls)
"""
import random
from collections import defaultdict
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from identity import assign_users
from log_parser import LogEntry, LogFormat, Timestamp, format_iso_time, parse_stream
from merger import JointLog, LogSource, merge
from sessionizer import SessionizerConfig, session_gen
from summarizer import (
    generalize_url, period_aggregates, server_shares, session_aggregates, url_aggregates,
)
from utils.log_generator import random_log

FIXTURES = Path(__file__).parent / 'data' / 'fixtures'


def nasa_case():
    lines = (FIXTURES / 'nasa_sessions.log').read_text(encoding='utf-8').splitlines()
    entries, _ = parse_stream(lines, LogFormat.CLF)
    _, annotated = assign_users(merge([LogSource('www', entries, log_format=LogFormat.CLF)]))
    sessions = session_gen(annotated, SessionizerConfig(referrer_rule=False))
    return annotated, sessions


def random_case(rng, servers=('www',)):
    _, annotated = assign_users(random_log(rng, servers=servers))
    sessions = session_gen(annotated, SessionizerConfig(timeout_seconds=rng.choice([300, 1800])))
    return annotated, sessions


def brute_bucket(seconds: int, granularity: str) -> int:
    d = datetime.fromtimestamp(seconds, tz=timezone.utc)
    if granularity == 'hour':
        start = d.replace(minute=0, second=0)
    elif granularity == 'day':
        start = d.replace(hour=0, minute=0, second=0)
    elif granularity == 'week':
        start = (d - timedelta(days=d.weekday())).replace(hour=0, minute=0, second=0)
    else:
        start = d.replace(day=1, hour=0, minute=0, second=0)
    return int(start.timestamp())


# ========== agregados por sessão de usuário ==========

def test_nasa_session_aggregates():
    annotated, sessions = nasa_case()
    aggregates = {a.user_id: a for a in session_aggregates(sessions, annotated)}
    # usuário 1 = 128.102.210.40 (aparece primeiro no log conjunto)
    assert (aggregates[1].visit_count, aggregates[1].page_views) == (2, 7)
    assert aggregates[1].length_seconds == 9083
    assert (aggregates[2].visit_count, aggregates[2].page_views) == (1, 7)
    assert aggregates[2].length_seconds == 67
    assert format_iso_time(aggregates[2].first) == '1995-07-22T01:16:58Z'


def test_single_entry_aggregate():
    entry = LogEntry('1.1.1.1', None, None, Timestamp(100, 0), 'GET', '/', 'HTTP/1.0', 200, 1)
    _, annotated = assign_users(merge([LogSource('www', [entry])]))
    sessions = session_gen(annotated, SessionizerConfig())
    [aggregate] = session_aggregates(sessions, annotated)
    assert (aggregate.visit_count, aggregate.length_seconds, aggregate.page_views) == (1, 0, 1)


def test_session_aggregates_match_group_by():
    rng = random.Random(21)
    for _ in range(100):
        annotated, sessions = random_case(rng)
        expected = defaultdict(lambda: {'visits': set(), 'views': 0, 'times': []})
        for idx, uid in enumerate(annotated.user_ids):
            row = expected[uid]
            row['visits'].add(sessions.visit_of_entry[idx])
            row['views'] += 1
            row['times'].append(annotated.entries[idx].time.utc_epoch_seconds)

        aggregates = session_aggregates(sessions, annotated)
        assert [a.user_id for a in aggregates] == sorted(expected)
        for a in aggregates:
            row = expected[a.user_id]
            assert a.visit_count == len(row['visits'])
            assert a.page_views == row['views']
            assert a.length_seconds == max(row['times']) - min(row['times'])
            assert a.page_views >= a.visit_count >= 1


def test_session_aggregates_reject_mismatched_log():
    annotated, sessions = nasa_case()
    with pytest.raises(ValueError):
        session_aggregates(sessions, assign_users(JointLog())[1])


# ========== agregados por período ==========

def test_nasa_day_buckets():
    annotated, sessions = nasa_case()
    rows = period_aggregates(annotated, sessions, 'day')
    assert [format_iso_time(r.bucket) for r in rows] == [
        '1995-07-20T00:00:00Z', '1995-07-21T00:00:00Z', '1995-07-22T00:00:00Z',
    ]
    assert [r.visit_count for r in rows] == [1, 1, 1]
    assert [r.request_count for r in rows] == [5, 2, 7]
    assert [r.unique_visitors for r in rows] == [1, 1, 1]
    assert [r.unique_agents for r in rows] == [0, 0, 0]


def test_nasa_week_and_month():
    annotated, sessions = nasa_case()
    [week] = period_aggregates(annotated, sessions, 'week')
    # 20/07/1995 foi quinta-feira; a semana começa na segunda 17/07
    assert format_iso_time(week.bucket) == '1995-07-17T00:00:00Z'
    assert (week.visit_count, week.request_count, week.unique_visitors) == (3, 14, 2)
    [month] = period_aggregates(annotated, sessions, 'month')
    assert format_iso_time(month.bucket) == '1995-07-01T00:00:00Z'


def test_empty_log_has_no_buckets():
    _, annotated = assign_users(JointLog())
    sessions = session_gen(annotated, SessionizerConfig())
    assert period_aggregates(annotated, sessions, 'day') == []


def test_invalid_granularity():
    annotated, sessions = nasa_case()
    with pytest.raises(ValueError):
        period_aggregates(annotated, sessions, 'year')


@pytest.mark.parametrize('granularity', ['hour', 'day', 'week', 'month'])
def test_period_aggregates_match_brute_force(granularity):
    rng = random.Random(len(granularity))
    for _ in range(100):
        annotated, sessions = random_case(rng)
        buckets = defaultdict(lambda: {'n': 0, 'users': set(), 'ips': set(), 'agents': set(), 'visits': 0})
        for idx, entry in enumerate(annotated.entries):
            b = buckets[brute_bucket(entry.time.utc_epoch_seconds, granularity)]
            b['n'] += 1
            b['users'].add(annotated.user_ids[idx])
            b['ips'].add(entry.ip)
            if entry.agent is not None:
                b['agents'].add(entry.agent)
        for visit in sessions.visits:
            buckets[brute_bucket(visit.start.utc_epoch_seconds, granularity)]['visits'] += 1

        rows = period_aggregates(annotated, sessions, granularity)
        assert [r.bucket.utc_epoch_seconds for r in rows] == sorted(buckets)
        for r in rows:
            b = buckets[r.bucket.utc_epoch_seconds]
            assert r.granularity == granularity
            assert (r.request_count, r.unique_visitors, r.unique_hosts, r.unique_agents, r.visit_count) == (
                b['n'], len(b['users']), len(b['ips']), len(b['agents']), b['visits'])
        assert sum(r.request_count for r in rows) == len(annotated)
        assert sum(r.visit_count for r in rows) == len(sessions)


FAR_YEAR_LINES = [
    '1.1.1.1 - - [04/Jul/1901:12:00:01 +0000] "GET /a.html HTTP/1.0" 200 1',
    '2.2.2.2 - - [01/Jan/2300:00:00:00 +0000] "GET /a.html HTTP/1.0" 200 1',
    '2.2.2.2 - - [15/Mar/2300:10:20:30 -0300] "GET /b.html HTTP/1.0" 200 1',
    '3.3.3.3 - - [31/Dec/9998:23:59:59 +0000] "GET /c.html HTTP/1.0" 200 1',
]


@pytest.mark.parametrize('granularity', ['hour', 'day', 'week', 'month'])
def test_period_aggregates_outside_nanosecond_range(granularity):
    entries, report = parse_stream(FAR_YEAR_LINES, LogFormat.CLF)
    assert report.parsed == len(FAR_YEAR_LINES)
    _, annotated = assign_users(merge([LogSource('www', entries, log_format=LogFormat.CLF)]))
    sessions = session_gen(annotated, SessionizerConfig(referrer_rule=False))

    rows = period_aggregates(annotated, sessions, granularity)
    expected = sorted({brute_bucket(e.time.utc_epoch_seconds, granularity) for e in annotated.entries})
    assert [r.bucket.utc_epoch_seconds for r in rows] == expected
    assert sum(r.request_count for r in rows) == len(FAR_YEAR_LINES)
    assert sum(r.visit_count for r in rows) == len(sessions)


def test_far_year_buckets():
    entries, _ = parse_stream(FAR_YEAR_LINES[3:], LogFormat.CLF)
    _, annotated = assign_users(merge([LogSource('www', entries, log_format=LogFormat.CLF)]))
    sessions = session_gen(annotated, SessionizerConfig(referrer_rule=False))
    [month] = period_aggregates(annotated, sessions, 'month')
    assert format_iso_time(month.bucket) == '9998-12-01T00:00:00Z'
    [week] = period_aggregates(annotated, sessions, 'week')
    assert datetime.fromtimestamp(week.bucket.utc_epoch_seconds, tz=timezone.utc).weekday() == 0


# ========== servidores ==========

def _log_with_servers(counts: dict) -> JointLog:
    sources = []
    for name, n in counts.items():
        entries = [LogEntry('1.1.1.1', None, None, Timestamp(i, 0), 'GET', '/', 'HTTP/1.0', 200, 1, line_no=i + 1)
                   for i in range(n)]
        sources.append(LogSource(name, entries))
    return merge(sources)


def test_single_server_share():
    [share] = server_shares(_log_with_servers({'www': 4}))
    assert (share.server_name, share.request_count, share.percent) == ('www', 4, 100.0)


def test_three_to_one_share():
    shares = server_shares(_log_with_servers({'b': 1, 'a': 3}))
    assert [(s.server_name, s.percent) for s in shares] == [('a', 75.0), ('b', 25.0)]


def test_shares_sum_to_hundred():
    rng = random.Random(8)
    for _ in range(100):
        annotated, _ = random_case(rng, servers=('www1', 'www2', 'www3'))
        shares = server_shares(annotated.log)
        assert sum(s.request_count for s in shares) == len(annotated)
        assert abs(sum(s.percent for s in shares) - 100.0) <= 1e-9
        counts = defaultdict(int)
        for e in annotated.entries:
            counts[e.server] += 1
        assert {s.server_name: s.request_count for s in shares} == counts


def test_no_shares_for_empty_log():
    assert server_shares(JointLog()) == []


# ========== generalização de urls ==========

@pytest.mark.parametrize('url,depth,expected', [
    ('/shuttle/missions/sts-73/mission-sts-73.html', 2, '/shuttle/missions/'),
    ('/shuttle/missions/sts-73/mission-sts-73.html', 4, '/shuttle/missions/sts-73/mission-sts-73.html'),
    ('/shuttle/missions/sts-73/mission-sts-73.html', 9, '/shuttle/missions/sts-73/mission-sts-73.html'),
    ('/', 1, '/'),
    ('/', 5, '/'),
    ('/cgi-bin/imagemap/countdown?99,176', 1, '/cgi-bin/'),
    ('/cgi-bin/imagemap/countdown?99,176', 3, '/cgi-bin/imagemap/countdown'),
    ('http://www.example.org/a/b/c', 1, 'http://www.example.org/a/'),
])
def test_generalize_url(url, depth, expected):
    assert generalize_url(url, depth) == expected


def test_generalize_url_is_idempotent_and_never_longer():
    rng = random.Random(3)
    alphabet = 'abc/?=&.'
    for _ in range(2000):
        url = '/' + ''.join(rng.choice(alphabet) for _ in range(rng.randint(0, 25)))
        depth = rng.randint(1, 5)
        once = generalize_url(url, depth)
        assert generalize_url(once, depth) == once
        assert len(once.split('?')[0]) <= len(url.split('?')[0]) + 1


def test_generalize_url_depth_must_be_positive():
    with pytest.raises(ValueError):
        generalize_url('/a/b', 0)


def test_url_aggregates():
    annotated, sessions = nasa_case()
    rows = url_aggregates(annotated, sessions, 2)
    by_url = {r.url: r for r in rows}
    assert sum(r.request_count for r in rows) == 14
    assert by_url['/shuttle/missions/'].request_count == 8
    assert by_url['/shuttle/missions/'].unique_visitors == 2
    assert by_url['/shuttle/countdown/'].visit_count == 2
    assert rows[0].url == '/shuttle/missions/'


if __name__ == "__main__":
    pytest.main([__file__])
