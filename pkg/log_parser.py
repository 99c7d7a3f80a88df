"""
Parser de logs de acesso no formato CLF, ECLF e Combined.

Cada linha vira um LogEntry; linhas inválidas geram MalformedLine e são
contabilizadas no ParseReport sem interromper a leitura.
"""

import calendar
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import pytz

from errors import FormatTooNarrow, MalformedLine, NoParseableLines

logger = logging.getLogger(__name__)

MONTHS = ('Jan', 'Feb', 'Mar', 'Apr', 'May', 'Jun', 'Jul', 'Aug', 'Sep', 'Oct', 'Nov', 'Dec')
_MONTH_INDEX = {name.lower(): i + 1 for i, name in enumerate(MONTHS)}

MAX_OFFSET_MINUTES = 14 * 60
MIN_YEAR, MAX_YEAR = 1900, 9998

# Fração mínima de linhas que um formato precisa aceitar na detecção
DETECTION_THRESHOLD = 0.9

_EPOCH = datetime(1970, 1, 1, tzinfo=pytz.utc)


class LogFormat(Enum):
    CLF = 'clf'
    ECLF = 'eclf'
    COMBINED = 'combined'

    @property
    def has_referrer(self) -> bool:
        return self is not LogFormat.CLF

    @property
    def has_agent(self) -> bool:
        return self is LogFormat.COMBINED

    @property
    def richness(self) -> int:
        return _RICHNESS[self]

    @classmethod
    def richest(cls, formats: Iterable['LogFormat']) -> Optional['LogFormat']:
        formats = list(formats)
        if not formats:
            return None
        return max(formats, key=lambda f: f.richness)


_RICHNESS = {LogFormat.CLF: 0, LogFormat.ECLF: 1, LogFormat.COMBINED: 2}


@dataclass(frozen=True, slots=True)
class Timestamp:
    """Instante normalizado para UTC, guardando o fuso original para reexibição"""
    utc_epoch_seconds: int
    original_offset_minutes: int = 0

    def __post_init__(self):
        if abs(self.original_offset_minutes) > MAX_OFFSET_MINUTES:
            raise ValueError(f"Fuso fora do intervalo: {self.original_offset_minutes} minutos")


@dataclass(slots=True)
class LogEntry:
    ip: str
    ident: Optional[str]
    login: Optional[str]
    time: Timestamp
    method: str
    url: str
    protocol: str
    status: int
    bytes: Optional[int]
    referrer: Optional[str] = None
    agent: Optional[str] = None
    line_no: int = 0
    server: str = ''


@dataclass
class ParseReport:
    total_lines: int = 0
    parsed: int = 0
    rejected: int = 0
    rejects: list = field(default_factory=list)  # (line_no, reason)

    def reject(self, line_no: int, reason: str):
        self.rejected += 1
        self.rejects.append((line_no, reason))

    def to_dict(self) -> dict:
        return {
            'total_lines': self.total_lines,
            'parsed': self.parsed,
            'rejected': self.rejected,
        }

    def merge(self, other: 'ParseReport') -> 'ParseReport':
        """Soma dois relatórios (usado ao juntar várias fontes)"""
        return ParseReport(
            total_lines=self.total_lines + other.total_lines,
            parsed=self.parsed + other.parsed,
            rejected=self.rejected + other.rejected,
            rejects=self.rejects + other.rejects,
        )


# ========== EXPRESSÕES REGULARES ==========

# Campo entre aspas com escapes \" e \\ (laço "desenrolado" para desempenho)
_QUOTED = r'"([^"\\]*(?:\\.[^"\\]*)*)"'

_LINE_RE = re.compile(
    r'(\S+)\s+(\S+)\s+(\S+)\s+\[([^\]]*)\]\s+' + _QUOTED + r'\s+(\S+)\s+(\S+)'
    r'(?:\s+' + _QUOTED + r')?(?:\s+' + _QUOTED + r')?\s*$'
)

_DATE_RE = re.compile(
    r'(\d{2})/([A-Za-z]{3})/(\d{4}):(\d{2}):(\d{2}):(\d{2}) ([+-])(\d{2})(\d{2})'
)

_UNESCAPE_RE = re.compile(r'\\(["\\])')

# Cache de "dd/Mon/yyyy" -> segundos UTC da meia-noite (None se data inválida)
_DAY_CACHE: dict = {}
_DAY_CACHE_MAX = 4096


def _unescape(value: str) -> str:
    if '\\' not in value:
        return value
    return _UNESCAPE_RE.sub(r'\1', value)


def _escape(value: str) -> str:
    if '\\' in value:
        value = value.replace('\\', '\\\\')
    if '"' in value:
        value = value.replace('"', '\\"')
    return value


def _day_seconds(day_text: str, day: str, month: str, year: str):
    cached = _DAY_CACHE.get(day_text, False)
    if cached is not False:
        return cached

    result = None
    month_no = _MONTH_INDEX.get(month.lower())
    y, d = int(year), int(day)
    if month_no and MIN_YEAR <= y <= MAX_YEAR and 1 <= d <= calendar.monthrange(y, month_no)[1]:
        result = calendar.timegm((y, month_no, d, 0, 0, 0))

    if len(_DAY_CACHE) >= _DAY_CACHE_MAX:
        _DAY_CACHE.clear()
    _DAY_CACHE[day_text] = result
    return result


def parse_clf_time(text: str) -> Timestamp:
    """Converte 'dd/Mon/yyyy:HH:MM:SS ±zzzz' em Timestamp normalizado para UTC"""
    m = _DATE_RE.fullmatch(text)
    if not m:
        raise MalformedLine(f"data fora do layout dd/Mon/yyyy:HH:MM:SS ±zzzz: {text!r}")
    day, month, year, hh, mi, ss, sign, oh, om = m.groups()

    base = _day_seconds(text[:11], day, month, year)
    if base is None:
        raise MalformedLine(f"data inválida: {text!r}")

    hour, minute, second = int(hh), int(mi), int(ss)
    if hour > 23 or minute > 59 or second > 59:
        raise MalformedLine(f"hora inválida: {text!r}")

    off_h, off_m = int(oh), int(om)
    offset = off_h * 60 + off_m
    if off_m > 59 or offset > MAX_OFFSET_MINUTES:
        raise MalformedLine(f"fuso inválido: {text!r}")
    if sign == '-':
        offset = -offset

    wall = base + hour * 3600 + minute * 60 + second
    return Timestamp(wall - offset * 60, offset)


def _to_datetime(ts: Timestamp, tz=pytz.utc) -> datetime:
    return (_EPOCH + timedelta(seconds=ts.utc_epoch_seconds)).astimezone(tz)


def format_clf_time(ts: Timestamp) -> str:
    """Formata no layout do log, no fuso original da entrada"""
    offset = ts.original_offset_minutes
    d = _to_datetime(ts, pytz.FixedOffset(offset))
    sign = '-' if offset < 0 else '+'
    off_h, off_m = divmod(abs(offset), 60)
    return (f"{d.day:02d}/{MONTHS[d.month - 1]}/{d.year:04d}:"
            f"{d.hour:02d}:{d.minute:02d}:{d.second:02d} {sign}{off_h:02d}{off_m:02d}")


def format_iso_time(ts: Timestamp) -> str:
    """Formata como 'YYYY-MM-DDTHH:MM:SSZ' (UTC)"""
    return _to_datetime(ts).strftime('%Y-%m-%dT%H:%M:%SZ')


def format_table_time(ts: Timestamp) -> str:
    """Formata como 'YYYY-MM-DD HH:MM:SS' (UTC), layout da listagem de sessões"""
    return _to_datetime(ts).strftime('%Y-%m-%d %H:%M:%S')


def parse_iso_time(text: str) -> Timestamp:
    """Inverso de format_iso_time"""
    d = datetime.strptime(text, '%Y-%m-%dT%H:%M:%SZ')
    return Timestamp(calendar.timegm(d.timetuple()), 0)


# ========== PARSING ==========

def _decode(line: Union[str, bytes]) -> str:
    if isinstance(line, bytes):
        line = line.decode('utf-8', 'surrogateescape')
    return line.rstrip('\r\n')


def _match(line: str):
    """Valida a parte comum a todos os formatos; devolve (campos, nível mais rico aceito)"""
    if not line.strip():
        raise MalformedLine("linha vazia")

    m = _LINE_RE.match(line)
    if not m:
        if '[' not in line or ']' not in line:
            raise MalformedLine("data sem colchetes")
        raise MalformedLine("número de campos incorreto")

    ip, ident, login, date_text, request, status, size, referrer, agent = m.groups()

    if not (status.isascii() and status.isdigit() and len(status) == 3):
        raise MalformedLine(f"status não numérico: {status!r}")
    status_code = int(status)
    if not 100 <= status_code <= 599:
        raise MalformedLine(f"status fora do intervalo: {status_code}")

    if size == '-':
        size_value = None
    elif size.isascii() and size.isdigit():
        size_value = int(size)
    else:
        raise MalformedLine(f"bytes não numérico: {size!r}")

    parts = _unescape(request).split()
    if len(parts) != 3:
        raise MalformedLine(f"requisição sem método/url/protocolo: {request!r}")
    method, url, protocol = parts
    if not (url.startswith('/') or '://' in url):
        raise MalformedLine(f"url inválida: {url!r}")

    time = parse_clf_time(date_text)

    if agent is not None:
        level = LogFormat.COMBINED
    elif referrer is not None:
        level = LogFormat.ECLF
    else:
        level = LogFormat.CLF

    fields = (ip, ident, login, time, method, url, protocol, status_code, size_value, referrer, agent)
    return fields, level


def parse_line(line: Union[str, bytes], log_format: LogFormat, line_no: int = 1) -> LogEntry:
    """
    Converte uma linha crua em LogEntry.
    Campos extras à direita (ex.: agent numa linha Combined lida como CLF) são
    descartados; campos faltantes para o formato geram MalformedLine.
    """
    fields, level = _match(_decode(line))
    if level.richness < log_format.richness:
        raise MalformedLine(f"número de campos incorreto para {log_format.value}")

    ip, ident, login, time, method, url, protocol, status, size, referrer, agent = fields
    if log_format.has_referrer:
        referrer = None if referrer == '-' else _unescape(referrer)
    else:
        referrer = None
    if log_format.has_agent:
        agent = None if agent == '-' else _unescape(agent)
    else:
        agent = None

    return LogEntry(
        ip=ip,
        ident=None if ident == '-' else ident,
        login=None if login == '-' else login,
        time=time,
        method=method,
        url=url,
        protocol=protocol,
        status=status,
        bytes=size,
        referrer=referrer,
        agent=agent,
        line_no=line_no,
    )


def detect_format(sample: Sequence[Union[str, bytes]]) -> LogFormat:
    """
    Escolhe o formato mais rico aceito por >= 90% das linhas válidas da amostra.
    Uma linha Combined também é aceita como ECLF e CLF (campos extras descartados).
    """
    if not sample:
        raise ValueError("Amostra vazia para detecção de formato")

    counts = {fmt: 0 for fmt in LogFormat}
    parseable = 0
    for raw in sample:
        try:
            _, level = _match(_decode(raw))
        except MalformedLine:
            continue
        parseable += 1
        for fmt in LogFormat:
            if fmt.richness <= level.richness:
                counts[fmt] += 1

    if parseable == 0:
        raise NoParseableLines(f"Nenhuma das {len(sample)} linhas da amostra corresponde a CLF/ECLF/Combined")

    for fmt in sorted(LogFormat, key=lambda f: f.richness, reverse=True):
        if counts[fmt] >= DETECTION_THRESHOLD * parseable:
            logger.info(f"Formato detectado: {fmt.value} ({counts[fmt]}/{parseable} linhas válidas)")
            return fmt

    # Inalcançável: toda linha válida é aceita como CLF
    return LogFormat.CLF


def parse_stream(source: Iterable[Union[str, bytes]], log_format: LogFormat) -> tuple[list, ParseReport]:
    """Lê todas as linhas da fonte; linhas inválidas vão para o relatório"""
    entries = []
    report = ParseReport()
    for line_no, raw in enumerate(source, start=1):
        report.total_lines += 1
        try:
            entries.append(parse_line(raw, log_format, line_no))
        except MalformedLine as e:
            report.reject(line_no, e.reason)
            logger.debug(f"Linha {line_no} descartada: {e.reason}")
    report.parsed = len(entries)
    return entries, report


def canonicalize(entry: LogEntry, log_format: LogFormat, lossy: bool = False) -> str:
    """
    Serializa a entrada no layout canônico (campos separados por um espaço).
    Com lossy=True os campos que o formato não comporta são omitidos em vez de
    gerar FormatTooNarrow.
    """
    if not lossy:
        if entry.referrer is not None and not log_format.has_referrer:
            raise FormatTooNarrow(f"Formato {log_format.value} não comporta referrer")
        if entry.agent is not None and not log_format.has_agent:
            raise FormatTooNarrow(f"Formato {log_format.value} não comporta agent")

    line = (
        f'{entry.ip} {"-" if entry.ident is None else entry.ident} '
        f'{"-" if entry.login is None else entry.login} '
        f'[{format_clf_time(entry.time)}] '
        f'"{_escape(entry.method)} {_escape(entry.url)} {_escape(entry.protocol)}" '
        f'{entry.status} {"-" if entry.bytes is None else entry.bytes}'
    )
    if log_format.has_referrer:
        line += f' "{"-" if entry.referrer is None else _escape(entry.referrer)}"'
    if log_format.has_agent:
        line += f' "{"-" if entry.agent is None else _escape(entry.agent)}"'
    return line


def url_path(url: str) -> str:
    """Parte de caminho da url (sem esquema/host); query mantida"""
    if '://' in url:
        rest = url.split('://', 1)[1]
        slash = rest.find('/')
        return rest[slash:] if slash >= 0 else '/'
    return url


def canonical_size(entry: LogEntry, log_format: LogFormat) -> int:
    """Tamanho em bytes da linha canônica (com quebra de linha)"""
    return len(canonicalize(entry, log_format, lossy=True).encode('utf-8', 'surrogateescape')) + 1
