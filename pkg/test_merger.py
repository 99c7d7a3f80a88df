"""
Testes da junção de logs de vários servidores
"""
import random
from pathlib import Path

import pytest

from errors import DuplicateServerName
from log_parser import LogFormat, parse_stream
from merger import LogSource, apply_skew, merge
from utils.log_generator import entries_with_skew, random_sources

FIXTURES = Path(__file__).parent / 'data' / 'fixtures'


def _oracle(sources):
    """Concatena com o skew aplicado e ordena por (tempo, servidor, linha)"""
    everything = []
    for s in sources:
        everything.extend(entries_with_skew(s.entries, s.clock_skew_seconds, s.server_name))
    return sorted(everything, key=lambda e: (e.time.utc_epoch_seconds, e.server, e.line_no))


def test_single_combined_sample_source_keeps_order():
    lines = (FIXTURES / 'combined_sample.log').read_text(encoding='utf-8').splitlines()
    entries, _ = parse_stream(lines, LogFormat.COMBINED)
    log = merge([LogSource('www1', entries, log_format=LogFormat.COMBINED)])
    assert len(log) == 5
    assert all(e.server == 'www1' for e in log.entries)
    assert [e.line_no for e in log.entries] == [1, 2, 3, 4, 5]
    assert log.source_count == 1
    assert log.server_names == ['www1']


@pytest.mark.parametrize('seed', range(20))
def test_merge_matches_sort_oracle(seed):
    sources = random_sources(random.Random(seed), 3)
    log = merge(sources)
    assert log.entries == _oracle(sources)


@pytest.mark.parametrize('seed', range(10))
def test_unsorted_sources_fall_back_to_full_sort(seed):
    sources = random_sources(random.Random(100 + seed), 4, sort=False)
    assert merge(sources).entries == _oracle(sources)


def test_merge_is_time_ordered_with_ties_by_server():
    sources = random_sources(random.Random(5), 5)
    keys = [(e.time.utc_epoch_seconds, e.server, e.line_no) for e in merge(sources).entries]
    assert keys == sorted(keys)
    assert len(keys) == sum(len(s.entries) for s in sources)


def test_negative_skew_subtracts_seconds():
    sources = random_sources(random.Random(9), 1)
    source = sources[0]
    source.clock_skew_seconds = -90
    log = merge([source])
    by_line = {e.line_no: e for e in log.entries}
    for original in source.entries:
        shifted = by_line[original.line_no]
        assert shifted.time.utc_epoch_seconds == original.time.utc_epoch_seconds - 90
        assert shifted.time.original_offset_minutes == original.time.original_offset_minutes


def test_apply_skew_does_not_mutate():
    entries = random_sources(random.Random(3), 1, max_entries=5)[0].entries
    if not entries:
        pytest.skip("fonte vazia para esta semente")
    before = entries[0].time
    shifted = apply_skew(entries[0], 3600)
    assert entries[0].time == before
    assert shifted.time.utc_epoch_seconds == before.utc_epoch_seconds + 3600


def test_duplicate_server_names():
    with pytest.raises(DuplicateServerName):
        merge([LogSource('www', []), LogSource('www', [])])


@pytest.mark.parametrize('name', ['', 'www 1', 'www\t1'])
def test_invalid_server_name(name):
    with pytest.raises(ValueError):
        LogSource(name, [])


def test_richest_format_wins():
    log = merge([
        LogSource('a', [], log_format=LogFormat.CLF),
        LogSource('b', [], log_format=LogFormat.ECLF),
    ])
    assert log.log_format is LogFormat.ECLF
    assert len(log) == 0
    assert log.source_count == 2


def test_merge_without_sources():
    log = merge([])
    assert log.entries == []
    assert log.source_count == 0


if __name__ == "__main__":
    pytest.main([__file__])
