"""
Testes do parser de logs (CLF / ECLF / Combined)
"""
import random
from dataclasses import replace
from pathlib import Path

import pytest

from errors import FormatTooNarrow, MalformedLine, NoParseableLines
from log_parser import (
    LogFormat, Timestamp, canonical_size, canonicalize, detect_format, format_clf_time,
    format_iso_time, format_table_time, parse_clf_time, parse_iso_time, parse_line,
    parse_stream, url_path,
)
from utils.log_generator import lines_with_corruption, random_entry, random_line

FIXTURES = Path(__file__).parent / 'data' / 'fixtures'
MINIMAL_CLF = 'a.b.c.d - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1'


def sample_lines() -> list:
    return (FIXTURES / 'combined_sample.log').read_text(encoding='utf-8').splitlines()


# ========== parse_line ==========

def test_combined_sample_first_line_fields():
    entry = parse_line(sample_lines()[0], LogFormat.COMBINED)
    assert entry.ip == '72.30.252.91'
    assert entry.ident is None and entry.login is None
    assert format_iso_time(entry.time) == '2006-06-18T12:28:33Z'
    assert entry.time.original_offset_minutes == 0
    assert (entry.method, entry.url, entry.protocol) == ('GET', '/robots.txt', 'HTTP/1.0')
    assert entry.status == 200
    assert entry.bytes == 52
    assert entry.referrer is None
    assert entry.agent.startswith('Mozilla/5.0 (compatible; Yahoo! Slurp')


def test_combined_sample_all_lines_values():
    expected = [
        ('72.30.252.91', '2006-06-18T12:28:33Z', '/robots.txt', 200, 52),
        ('83.77.134.184', '2006-06-18T12:29:40Z',
         '/vanuatu/export/system/modules/VTO/resources/stylesheet/vto.css', 200, 7797),
        ('83.77.134.184', '2006-06-18T12:29:41Z',
         '/vanuatu/export/sites/VTO/fr/kids/volcanoes/ambrym_eruption.html', 200, 26812),
        ('83.77.134.184', '2006-06-18T12:29:41Z',
         '/vanuatu/export/system/modules/VTO/resources/images/nto_kids_logo.jpg', 200, 10420),
        ('83.77.134.184', '2006-06-18T12:29:41Z',
         '/vanuatu/export/system/modules/VTO/resources/images/vanuatu.gif', 200, 40892),
    ]
    for n, (line, (ip, when, url, status, size)) in enumerate(zip(sample_lines(), expected), start=1):
        entry = parse_line(line, LogFormat.COMBINED, n)
        assert (entry.ip, format_iso_time(entry.time), entry.url, entry.status, entry.bytes) == (ip, when, url, status, size)
        assert entry.line_no == n


def test_dash_bytes_is_absent():
    entry = parse_line('x - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 -', LogFormat.CLF)
    assert entry.bytes is None


@pytest.mark.parametrize('line', [
    'garbage',
    '',
    '   ',
    'x - - 01/Jan/1995:00:00:00 +0000 "GET / HTTP/1.0" 200 1',
    'x - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" abc 1',
    'x - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 700 1',
    'x - - [01/Jan/1995:00:00:00 +0000] "GET /" 200 1',
    'x - - [01/Jan/1995:00:00:00 +0000] "GET index.html HTTP/1.0" 200 1',
    'x - - [31/Feb/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1',
    'x - - [01/Foo/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1',
    'x - - [01/Jan/1995:24:00:00 +0000] "GET / HTTP/1.0" 200 1',
    'x - - [01/Jan/1995:00:00:00 +1500] "GET / HTTP/1.0" 200 1',
    'x - - [1995-01-01 00:00:00] "GET / HTTP/1.0" 200 1',
    'x - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1k',
])
def test_malformed_lines_are_rejected(line):
    with pytest.raises(MalformedLine) as info:
        parse_line(line, LogFormat.CLF)
    assert info.value.reason


def test_login_is_third_field():
    entry = parse_line('10.0.0.1 ident42 maria [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 1', LogFormat.CLF)
    assert entry.ident == 'ident42'
    assert entry.login == 'maria'


def test_escaped_quotes_and_spaces_in_quoted_fields():
    line = ('1.2.3.4 - - [01/Jan/1995:00:00:00 +0000] "GET /a HTTP/1.0" 200 10 '
            '"http://x.org/say \\"hi\\"" "Agent \\\\ with \\"quotes\\" and spaces"')
    entry = parse_line(line, LogFormat.COMBINED)
    assert entry.referrer == 'http://x.org/say "hi"'
    assert entry.agent == 'Agent \\ with "quotes" and spaces'
    assert canonicalize(entry, LogFormat.COMBINED) == line


def test_richer_line_parses_with_narrower_format():
    line = sample_lines()[2]
    clf = parse_line(line, LogFormat.CLF)
    assert clf.referrer is None and clf.agent is None
    assert clf.url.endswith('ambrym_eruption.html')
    eclf = parse_line(line, LogFormat.ECLF)
    assert eclf.agent is None


def test_narrow_line_fails_with_richer_format():
    with pytest.raises(MalformedLine):
        parse_line(MINIMAL_CLF, LogFormat.COMBINED)
    with pytest.raises(MalformedLine):
        parse_line(MINIMAL_CLF + ' "-"', LogFormat.COMBINED)


def test_non_utf8_bytes_survive_canonicalization():
    raw = (b'1.2.3.4 - - [01/Jan/1995:00:00:00 +0000] "GET /caf\xe9 HTTP/1.0" 200 10 '
           b'"-" "Agente \xff\xfe"')
    entry = parse_line(raw, LogFormat.COMBINED)
    assert canonicalize(entry, LogFormat.COMBINED).encode('utf-8', 'surrogateescape') == raw
    assert canonical_size(entry, LogFormat.COMBINED) == len(raw) + 1


# ========== datas ==========

def test_offset_shifts_utc_by_exactly_one_hour():
    utc = parse_clf_time('18/Jun/2006:12:28:33 +0000')
    plus_one = parse_clf_time('18/Jun/2006:12:28:33 +0100')
    assert utc.utc_epoch_seconds - plus_one.utc_epoch_seconds == 3600
    assert plus_one.original_offset_minutes == 60


@pytest.mark.parametrize('text', [
    '01/Jul/1995:00:00:01 -0400',
    '29/Feb/1996:23:59:59 +0530',
    '31/Dec/1999:23:59:59 -1400',
    '01/Jan/2000:00:00:00 +1345',
])
def test_clf_time_renders_in_original_offset(text):
    assert format_clf_time(parse_clf_time(text)) == text


def test_time_renderers():
    ts = parse_clf_time('20/Jul/1995:23:27:49 -0400')
    assert format_iso_time(ts) == '1995-07-21T03:27:49Z'
    assert format_table_time(ts) == '1995-07-21 03:27:49'
    assert parse_iso_time(format_iso_time(ts)) == Timestamp(ts.utc_epoch_seconds, 0)


def test_timestamp_rejects_offset_out_of_range():
    with pytest.raises(ValueError):
        Timestamp(0, 841)


# ========== detect_format ==========

def test_detect_combined_sample_is_combined():
    assert detect_format(sample_lines()) is LogFormat.COMBINED


def test_detect_minimal_clf():
    assert detect_format([MINIMAL_CLF]) is LogFormat.CLF


def test_detect_random_eclf_lines():
    rng = random.Random(7)
    lines = [random_line(rng, LogFormat.ECLF) for _ in range(10)]
    assert detect_format(lines) is LogFormat.ECLF


def test_detect_threshold():
    combined = sample_lines()[2]
    assert detect_format([combined] * 9 + [MINIMAL_CLF]) is LogFormat.COMBINED
    assert detect_format([combined] * 8 + [MINIMAL_CLF] * 2) is LogFormat.CLF
    # linhas inválidas não entram na conta
    assert detect_format([combined] * 5 + ['garbage'] * 5) is LogFormat.COMBINED


def test_detect_errors():
    with pytest.raises(ValueError):
        detect_format([])
    with pytest.raises(NoParseableLines):
        detect_format(['garbage', 'more garbage'])


# ========== parse_stream ==========

def test_parse_stream_combined_sample():
    entries, report = parse_stream(sample_lines(), LogFormat.COMBINED)
    assert len(entries) == 5
    assert (report.total_lines, report.parsed, report.rejected) == (5, 5, 0)
    assert [e.line_no for e in entries] == [1, 2, 3, 4, 5]


def test_parse_stream_empty():
    entries, report = parse_stream([], LogFormat.COMBINED)
    assert entries == []
    assert report.total_lines == 0


def test_parse_stream_counts_corrupted_lines():
    rng = random.Random(1000)
    lines, bad = lines_with_corruption(rng, 1000, 37)
    entries, report = parse_stream(lines, LogFormat.COMBINED)
    assert (report.parsed, report.rejected) == (963, 37)
    assert report.parsed + report.rejected == report.total_lines
    assert {n for n, _ in report.rejects} == bad
    assert not bad & {e.line_no for e in entries}


def test_parse_stream_reads_binary_file(tmp_path):
    path = tmp_path / 'access.log'
    path.write_bytes(b'\n'.join(line.encode('utf-8') for line in sample_lines()) + b'\r\n')
    with open(path, 'rb') as f:
        entries, report = parse_stream(f, LogFormat.COMBINED)
    assert report.rejected == 0
    assert entries[-1].url.endswith('vanuatu.gif')


# ========== canonicalize ==========

def test_canonicalize_combined_sample_is_byte_identical():
    for line in sample_lines():
        assert canonicalize(parse_line(line, LogFormat.COMBINED), LogFormat.COMBINED) == line


def test_canonicalize_absent_fields_in_clf():
    entry = parse_line('x - - [01/Jan/1995:00:00:00 +0000] "GET / HTTP/1.0" 200 -', LogFormat.CLF)
    assert canonicalize(entry, LogFormat.CLF).endswith('"GET / HTTP/1.0" 200 -')
    assert canonicalize(entry, LogFormat.COMBINED).endswith('200 - "-" "-"')


def test_canonicalize_too_narrow():
    entry = parse_line(sample_lines()[1], LogFormat.COMBINED)
    with pytest.raises(FormatTooNarrow):
        canonicalize(entry, LogFormat.CLF)
    with pytest.raises(FormatTooNarrow):
        canonicalize(entry, LogFormat.ECLF)
    assert canonicalize(entry, LogFormat.CLF, lossy=True).endswith('200 7797')


@pytest.mark.parametrize('log_format,count,seed', [
    (LogFormat.COMBINED, 10_000, 11),
    (LogFormat.ECLF, 2_000, 12),
    (LogFormat.CLF, 2_000, 13),
])
def test_round_trip_random_entries(log_format, count, seed):
    rng = random.Random(seed)
    for _ in range(count):
        entry = random_entry(rng, log_format)
        parsed = parse_line(canonicalize(entry, log_format), log_format)
        assert replace(parsed, line_no=entry.line_no) == entry


def test_url_path():
    assert url_path('http://www.example.org/a/b?x=1') == '/a/b?x=1'
    assert url_path('https://host') == '/'
    assert url_path('/a/b') == '/a/b'


if __name__ == "__main__":
    pytest.main([__file__])
