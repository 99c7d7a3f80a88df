"""
Testes da identificação de usuários
"""
import random
from pathlib import Path

import pytest

from identity import UserKey, UserKind, assign_users, user_key
from log_parser import LogFormat, parse_line, parse_stream
from merger import JointLog, LogSource, merge
from utils.log_generator import random_log

FIXTURES = Path(__file__).parent / 'data' / 'fixtures'
MSIE = 'Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1; SV1; .NET CLR 1.1.4322)'


def _log(lines, log_format=LogFormat.COMBINED) -> JointLog:
    entries, _ = parse_stream(lines, log_format)
    return merge([LogSource('www', entries, log_format=log_format)])


def test_combined_sample_line_without_login_uses_ip_and_agent():
    line = (FIXTURES / 'combined_sample.log').read_text(encoding='utf-8').splitlines()[1]
    key = user_key(parse_line(line, LogFormat.COMBINED))
    assert key == UserKey.for_ip_agent('83.77.134.184', MSIE)
    assert key.kind is UserKind.IP_AGENT


def test_login_wins_over_ip():
    log = _log([
        '1.1.1.1 - maria [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1 "-" "A"',
        '2.2.2.2 - maria [01/Jan/1995:00:00:10 +0000] "GET /x HTTP/1.0" 200 1 "-" "B"',
    ])
    table, annotated = assign_users(log)
    assert len(table) == 1
    assert annotated.user_ids == [1, 1]
    assert table.users[0].key == UserKey.for_login('maria')
    assert table.users[0].request_count == 2


def test_same_ip_different_agents_are_different_users():
    log = _log([
        '1.1.1.1 - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1 "-" "A"',
        '1.1.1.1 - - [01/Jan/1995:00:00:01 +0000] "GET / HTTP/1.0" 200 1 "-" "B"',
        '1.1.1.1 - - [01/Jan/1995:00:00:02 +0000] "GET / HTTP/1.0" 200 1 "-" "A"',
    ])
    table, annotated = assign_users(log)
    assert len(table) == 2
    assert annotated.user_ids == [1, 2, 1]


def test_nasa_has_two_users():
    lines = (FIXTURES / 'nasa_sessions.log').read_text(encoding='utf-8').splitlines()
    table, annotated = assign_users(_log(lines, LogFormat.CLF))
    assert len(table) == 2
    assert {u.key.ip for u in table} == {'128.102.204.243', '128.102.210.40'}
    assert all(u.key.agent is None for u in table)
    assert len(annotated) == 14


def test_ids_follow_first_appearance():
    rng = random.Random(11)
    for _ in range(50):
        log = random_log(rng)
        table, annotated = assign_users(log)
        first_seen = []
        for uid in annotated.user_ids:
            if uid not in first_seen:
                first_seen.append(uid)
        assert first_seen == list(range(1, len(table) + 1))
        assert sum(u.request_count for u in table) == len(log)


def test_user_count_matches_distinct_keys():
    rng = random.Random(12)
    for _ in range(100):
        log = random_log(rng)
        keys = {(e.login,) if e.login is not None else (e.ip, e.agent) for e in log.entries}
        table, _ = assign_users(log)
        assert len(table) == len(keys)


def test_empty_log():
    table, annotated = assign_users(JointLog())
    assert len(table) == 0
    assert annotated.user_ids == []


@pytest.mark.parametrize('kwargs', [
    {'kind': UserKind.LOGIN},
    {'kind': UserKind.LOGIN, 'login': 'x', 'ip': '1.1.1.1'},
    {'kind': UserKind.IP_AGENT},
    {'kind': UserKind.IP_AGENT, 'ip': '1.1.1.1', 'login': 'x'},
])
def test_invalid_user_key(kwargs):
    with pytest.raises(ValueError):
        UserKey(**kwargs)


if __name__ == "__main__":
    pytest.main([__file__])
