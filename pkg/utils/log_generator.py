"""
Gerador de logs sintéticos para testes e benchmark.

Todas as funções recebem um random.Random já semeado; a mesma semente gera
sempre o mesmo log.
"""

import random
from dataclasses import replace
from pathlib import Path
from typing import Iterator, Optional

from log_parser import LogEntry, LogFormat, Timestamp, canonicalize
from merger import JointLog, LogSource

# 1995-07-01T00:00:00Z
BASE_EPOCH = 804556800

PAGES = [
    '/', '/index.html', '/history/apollo/apollo.html', '/shuttle/countdown/countdown.html',
    '/shuttle/countdown/liftoff.html', '/shuttle/missions/sts-69/mission-sts-69.html',
    '/shuttle/missions/sts-73/mission-sts-73.html', '/facts/about_ksc.html',
    '/cgi-bin/imagemap/countdown?99,176', '/software/winvn/winvn.html',
]
RESOURCES = [
    '/images/NASA-logosmall.gif', '/images/KSC-logosmall.gif', '/images/launch-logo.gif',
    '/shuttle/countdown/count.gif', '/images/ksclogo-medium.jpg', '/style/site.css',
    '/scripts/menu.js', '/shuttle/missions/sts-69/sts-69-patch-small.png',
]
AGENTS = [
    'Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1; SV1)',
    'Mozilla/5.0 (X11; Linux x86_64) Gecko/20100101 Firefox/115.0',
    'Lynx/2.8.8dev.3 libwww-FM/2.14',
    'Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) Safari/605.1.15',
]
ROBOT_AGENTS = [
    'Mozilla/5.0 (compatible; Yahoo! Slurp; http://help.yahoo.com/help/us/ysearch/slurp)',
    'Googlebot/2.1 (+http://www.google.com/bot.html)',
    'ia_archiver (+http://www.alexa.com/site/help/webmasters)',
]
METHODS = ['GET', 'GET', 'GET', 'POST', 'HEAD']
STATUSES = [200, 200, 200, 200, 304, 302, 404, 500]

# Caracteres que exercitam o escape dos campos entre aspas
_QUOTED_CHARS = 'abcxyz XYZ019;:/().,-_"\\çé'


def random_ip(rng: random.Random) -> str:
    return '.'.join(str(rng.randint(1, 254)) for _ in range(4))


def _random_text(rng: random.Random, min_len: int = 1, max_len: int = 30) -> str:
    text = ''.join(rng.choice(_QUOTED_CHARS) for _ in range(rng.randint(min_len, max_len)))
    # '-' sozinho significa ausente
    return 'x' if text == '-' else text


def _random_url(rng: random.Random) -> str:
    segments = [
        ''.join(rng.choice('abcdefghij0123_-.~%') for _ in range(rng.randint(1, 8)))
        for _ in range(rng.randint(0, 4))
    ]
    url = '/' + '/'.join(segments)
    if rng.random() < 0.2:
        url += f"?q={rng.randint(0, 999)}&p=\"x\""
    if rng.random() < 0.1:
        url = 'http://www.example.org' + url
    return url


def random_timestamp(rng: random.Random) -> Timestamp:
    offset = rng.choice([0, 0, 60, -300, -240, 330, 545, rng.randint(-840, 840)])
    # 1995 a ~2030, longe dos limites de ano no fuso local
    return Timestamp(rng.randint(BASE_EPOCH, BASE_EPOCH + 35 * 365 * 86400), offset)


def random_entry(rng: random.Random, log_format: LogFormat = LogFormat.COMBINED) -> LogEntry:
    """Entrada válida qualquer, com campos opcionais só quando o formato os comporta"""
    referrer = None
    agent = None
    if log_format.has_referrer and rng.random() < 0.7:
        referrer = rng.choice([_random_url(rng), 'http://www.example.org' + rng.choice(PAGES), _random_text(rng)])
    if log_format.has_agent and rng.random() < 0.8:
        agent = rng.choice(AGENTS + [_random_text(rng)])
    return LogEntry(
        ip=rng.choice([random_ip(rng), 'host-%d.example.net' % rng.randint(1, 99), '::1']),
        ident=rng.choice([None, None, 'ident%d' % rng.randint(0, 9)]),
        login=rng.choice([None, None, None, 'user%d' % rng.randint(0, 9)]),
        time=random_timestamp(rng),
        method=rng.choice(METHODS),
        url=_random_url(rng),
        protocol=rng.choice(['HTTP/1.0', 'HTTP/1.1']),
        status=rng.randint(100, 599),
        bytes=rng.choice([None, rng.randint(0, 10 ** 7)]),
        referrer=referrer,
        agent=agent,
    )


def random_line(rng: random.Random, log_format: LogFormat = LogFormat.COMBINED) -> str:
    return canonicalize(random_entry(rng, log_format), log_format)


def corrupt_line(rng: random.Random, log_format: LogFormat = LogFormat.COMBINED) -> str:
    """Linha que o parser sempre rejeita"""
    entry = random_entry(rng, log_format)
    kind = rng.randrange(5)
    if kind == 0:
        return 'lixo sem estrutura nenhuma'
    if kind == 1:
        return canonicalize(entry, log_format).replace('[', '').replace(']', '')
    if kind == 2:
        return canonicalize(replace(entry, status=rng.choice([99, 600, 999])), log_format)
    if kind == 3:
        # requisição com quatro tokens
        return canonicalize(replace(entry, method='GET /extra'), log_format)
    return canonicalize(entry, log_format).replace('[', '[99/', 1)


def lines_with_corruption(rng: random.Random, total: int, corrupted: int,
                          log_format: LogFormat = LogFormat.COMBINED) -> tuple[list, set]:
    """Gera `total` linhas das quais exatamente `corrupted` são inválidas; devolve (linhas, números das inválidas)"""
    bad = set(rng.sample(range(1, total + 1), corrupted))
    lines = [
        corrupt_line(rng, log_format) if n in bad else random_line(rng, log_format)
        for n in range(1, total + 1)
    ]
    return lines, bad


# ========== LOGS PEQUENOS PARA ORÁCULOS ==========

def random_log(rng: random.Random, max_entries: int = 50, max_users: int = 5,
               servers: tuple = ('www',), log_format: LogFormat = LogFormat.COMBINED) -> JointLog:
    """
    Log pequeno já ordenado por tempo, com poucos clientes e referrers
    tirados de urls anteriores (ou ausentes). Intervalos de 0 s forçam empates.
    """
    clients = []
    for _ in range(rng.randint(1, max_users)):
        login = 'user%d' % rng.randint(0, 3) if rng.random() < 0.15 else None
        agent = rng.choice(AGENTS) if log_format.has_agent else None
        clients.append((random_ip(rng) if rng.random() < 0.8 else '10.0.0.1', login, agent))

    t = BASE_EPOCH + rng.randint(0, 86400)
    seen = []
    entries = []
    for line_no in range(1, rng.randint(1, max_entries) + 1):
        t += rng.choice([0, 0, 5, 30, 120, 600, 1500, 1800, 1801, 2400, 7200])
        ip, login, agent = rng.choice(clients)
        url = rng.choice(PAGES + RESOURCES[:2])
        referrer = None
        if log_format.has_referrer and seen and rng.random() < 0.75:
            referrer = rng.choice(seen)
            if rng.random() < 0.3:
                referrer = 'http://www.example.org' + referrer
        elif log_format.has_referrer and rng.random() < 0.1:
            referrer = rng.choice(PAGES)
        entries.append(LogEntry(
            ip=ip, ident=None, login=login, time=Timestamp(t, 0), method='GET', url=url,
            protocol='HTTP/1.0', status=200, bytes=rng.randint(0, 5000),
            referrer=referrer, agent=agent, line_no=line_no, server=rng.choice(servers),
        ))
        seen.append(url)
    return JointLog(entries=entries, source_count=len(servers), log_format=log_format)


def random_sources(rng: random.Random, count: int, max_entries: int = 40, sort: bool = True) -> list:
    """Fontes com nomes www0..wwwN; com sort=False as entradas ficam embaralhadas"""
    sources = []
    for i in range(count):
        entries = [random_entry(rng) for _ in range(rng.randint(0, max_entries))]
        # poucos instantes distintos para haver empates entre servidores
        entries = [replace(e, time=Timestamp(BASE_EPOCH + rng.randint(0, 50), e.time.original_offset_minutes))
                   for e in entries]
        if sort:
            entries.sort(key=lambda e: e.time.utc_epoch_seconds)
        else:
            rng.shuffle(entries)
        for line_no, entry in enumerate(entries, start=1):
            entry.line_no = line_no
        sources.append(LogSource(f"www{i}", entries, rng.choice([0, 0, -90, 3600])))
    return sources


# ========== LOG GRANDE PARA BENCHMARK ==========

def synthetic_access_lines(rng: random.Random, total: int,
                           log_format: LogFormat = LogFormat.COMBINED) -> Iterator[str]:
    """
    Linhas no estilo de um servidor de 1995: muitas imagens por página,
    alguns robôs e erros. Ordenadas por tempo.
    """
    clients = [(random_ip(rng), rng.choice(AGENTS)) for _ in range(max(1, total // 20))]
    robots = [(random_ip(rng), rng.choice(ROBOT_AGENTS)) for _ in range(max(1, total // 2000))]
    t = BASE_EPOCH
    for _ in range(total):
        t += rng.choice([0, 0, 1, 1, 2, 5])
        if rng.random() < 0.03:
            ip, agent = rng.choice(robots)
            url = rng.choice(['/robots.txt'] + PAGES)
        else:
            ip, agent = rng.choice(clients)
            url = rng.choice(PAGES) if rng.random() < 0.3 else rng.choice(RESOURCES)
        entry = LogEntry(
            ip=ip, ident=None, login=None, time=Timestamp(t, -240), method=rng.choice(METHODS),
            url=url, protocol='HTTP/1.0', status=rng.choice(STATUSES),
            bytes=rng.choice([None, rng.randint(100, 80000)]),
            referrer=('http://www.example.org' + rng.choice(PAGES)) if log_format.has_referrer and rng.random() < 0.5 else None,
            agent=agent if log_format.has_agent else None,
        )
        yield canonicalize(entry, log_format)


def write_lines(path, lines, encoding: str = 'utf-8') -> Path:
    with open(path, 'w', encoding=encoding, errors='surrogateescape', newline='\n') as f:
        for line in lines:
            f.write(line + '\n')
    return Path(path)


def entries_with_skew(entries: list, skew_seconds: int, server: Optional[str] = None) -> list:
    """Cópias das entradas com o instante deslocado; referência para os testes de merge"""
    shifted = []
    for e in entries:
        ts = Timestamp(e.time.utc_epoch_seconds + skew_seconds, e.time.original_offset_minutes)
        shifted.append(replace(e, time=ts, server=server if server is not None else e.server))
    return shifted
