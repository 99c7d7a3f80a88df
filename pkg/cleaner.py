"""
Limpeza do log conjunto: remove recursos não analisados (imagens, estilos,
multimídia), robôs, métodos e status indesejados, e opcionalmente anonimiza
os clientes.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from log_parser import canonical_size, url_path
from merger import JointLog

logger = logging.getLogger(__name__)

DEFAULT_DROP_EXTENSIONS = frozenset({
    'jpg', 'jpeg', 'gif', 'png', 'bmp', 'ico', 'css', 'js', 'swf',
    'mp3', 'mp4', 'avi', 'mpg', 'wav', 'zip', 'gz',
})
DEFAULT_ALLOWED_METHODS = frozenset({'GET', 'POST'})
DEFAULT_KEEP_STATUS = ((200, 399),)
DEFAULT_ROBOT_KEYWORDS = frozenset({'bot', 'crawler', 'spider', 'slurp', 'archiver'})

ROBOTS_TXT_PATH = '/robots.txt'


class AnonymizeMode(Enum):
    OFF = 'off'
    HASH = 'hash'


@dataclass(frozen=True)
class CleaningConfig:
    drop_extensions: frozenset = DEFAULT_DROP_EXTENSIONS
    # None = todos os métodos são aceitos
    allowed_methods: Optional[frozenset] = DEFAULT_ALLOWED_METHODS
    # None = todos os status são aceitos
    keep_status_ranges: Optional[tuple] = DEFAULT_KEEP_STATUS
    robot_agent_keywords: frozenset = DEFAULT_ROBOT_KEYWORDS
    robots_txt_rule: bool = True
    anonymize: AnonymizeMode = AnonymizeMode.OFF

    def __post_init__(self):
        bad_ext = sorted(e for e in self.drop_extensions if '.' in e or e != e.lower() or not e)
        if bad_ext:
            raise ValueError(f"Extensões devem ser minúsculas e sem ponto: {', '.join(bad_ext)}")
        bad_kw = sorted(k for k in self.robot_agent_keywords if k != k.lower() or not k)
        if bad_kw:
            raise ValueError(f"Palavras-chave de robô devem ser minúsculas: {', '.join(bad_kw)}")
        for lo, hi in self.keep_status_ranges or ():
            if not 100 <= lo <= hi <= 599:
                raise ValueError(f"Faixa de status inválida: {lo}-{hi}")

    @classmethod
    def permissive(cls) -> 'CleaningConfig':
        """Configuração que não remove nada"""
        return cls(
            drop_extensions=frozenset(),
            allowed_methods=None,
            keep_status_ranges=None,
            robot_agent_keywords=frozenset(),
            robots_txt_rule=False,
        )

    def to_dict(self) -> dict:
        return {
            'drop_extensions': sorted(self.drop_extensions),
            'allowed_methods': None if self.allowed_methods is None else sorted(self.allowed_methods),
            'keep_status_ranges': None if self.keep_status_ranges is None else [list(r) for r in self.keep_status_ranges],
            'robot_agent_keywords': sorted(self.robot_agent_keywords),
            'robots_txt_rule': self.robots_txt_rule,
            'anonymize': self.anonymize.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CleaningConfig':
        return cls(
            drop_extensions=frozenset(data['drop_extensions']),
            allowed_methods=None if data['allowed_methods'] is None else frozenset(data['allowed_methods']),
            keep_status_ranges=None if data['keep_status_ranges'] is None else tuple(tuple(r) for r in data['keep_status_ranges']),
            robot_agent_keywords=frozenset(data['robot_agent_keywords']),
            robots_txt_rule=data['robots_txt_rule'],
            anonymize=AnonymizeMode(data['anonymize']),
        )


@dataclass
class CleaningReport:
    input_count: int = 0
    kept_count: int = 0
    dropped_by_extension: int = 0
    dropped_by_method: int = 0
    dropped_by_status: int = 0
    dropped_as_robot: int = 0
    input_bytes: int = 0
    kept_bytes: int = 0
    robot_clients: int = 0
    config: dict = field(default_factory=dict)

    @property
    def reduction_percent(self) -> Optional[float]:
        if self.input_bytes <= 0:
            return None
        return 100.0 * (1 - self.kept_bytes / self.input_bytes)

    @property
    def dropped_count(self) -> int:
        return self.dropped_by_extension + self.dropped_by_method + self.dropped_by_status + self.dropped_as_robot

    def to_dict(self) -> dict:
        return {
            'input_count': self.input_count,
            'kept_count': self.kept_count,
            'dropped_by_extension': self.dropped_by_extension,
            'dropped_by_method': self.dropped_by_method,
            'dropped_by_status': self.dropped_by_status,
            'dropped_as_robot': self.dropped_as_robot,
            'robot_clients': self.robot_clients,
            'input_bytes': self.input_bytes,
            'kept_bytes': self.kept_bytes,
            'config': self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CleaningReport':
        return cls(**data)


def is_irrelevant_resource(url: str, config: CleaningConfig) -> bool:
    """True se a extensão do último segmento do caminho estiver em drop_extensions"""
    if not config.drop_extensions:
        return False
    path = url_path(url)
    for sep in ('?', '#'):
        cut = path.find(sep)
        if cut >= 0:
            path = path[:cut]
    segment = path.rsplit('/', 1)[-1]
    dot = segment.rfind('.')
    if dot < 0:
        return False
    return segment[dot + 1:].lower() in config.drop_extensions


def _request_path(url: str) -> str:
    path = url_path(url)
    cut = path.find('?')
    return path if cut < 0 else path[:cut]


def detect_robots(log: JointLog, config: CleaningConfig) -> set:
    """Clientes (ip, agent) identificados como robôs pelo agent ou por pedir /robots.txt"""
    keywords = tuple(config.robot_agent_keywords)
    flagged = set()
    agent_verdict = {}
    for entry in log.entries:
        key = (entry.ip, entry.agent)
        if key in flagged:
            continue
        if config.robots_txt_rule and _request_path(entry.url) == ROBOTS_TXT_PATH:
            flagged.add(key)
            continue
        agent = entry.agent
        if agent is None or not keywords:
            continue
        verdict = agent_verdict.get(agent)
        if verdict is None:
            lowered = agent.lower()
            verdict = any(k in lowered for k in keywords)
            agent_verdict[agent] = verdict
        if verdict:
            flagged.add(key)
    return flagged


def _status_kept(status: int, ranges) -> bool:
    if ranges is None:
        return True
    return any(lo <= status <= hi for lo, hi in ranges)


def clean(log: JointLog, config: CleaningConfig) -> tuple[JointLog, CleaningReport]:
    """
    Remove as requisições inúteis. Cada descarte é atribuído a um único motivo,
    na ordem: robô > extensão > método > status.
    """
    robots = detect_robots(log, config)
    report = CleaningReport(input_count=len(log.entries), robot_clients=len(robots), config=config.to_dict())
    kept = []
    fmt = log.log_format

    for entry in log.entries:
        size = canonical_size(entry, fmt)
        report.input_bytes += size

        if (entry.ip, entry.agent) in robots:
            report.dropped_as_robot += 1
        elif is_irrelevant_resource(entry.url, config):
            report.dropped_by_extension += 1
        elif config.allowed_methods is not None and entry.method not in config.allowed_methods:
            report.dropped_by_method += 1
        elif not _status_kept(entry.status, config.keep_status_ranges):
            report.dropped_by_status += 1
        else:
            kept.append(entry)
            report.kept_bytes += size

    report.kept_count = len(kept)
    cleaned = JointLog(entries=kept, source_count=log.source_count, log_format=log.log_format)

    logger.info(
        f"Limpeza: {report.kept_count}/{report.input_count} mantidas "
        f"(robôs={report.dropped_as_robot}, extensão={report.dropped_by_extension}, "
        f"método={report.dropped_by_method}, status={report.dropped_by_status})"
    )
    if config.anonymize is AnonymizeMode.HASH:
        cleaned = anonymize(cleaned, config.anonymize)
    return cleaned, report


def anonymize(log: JointLog, mode: AnonymizeMode) -> JointLog:
    """Troca cada ip por um token opaco 'u0001', 'u0002'... na ordem de primeira aparição"""
    if mode is AnonymizeMode.OFF:
        return log

    tokens = {}
    entries = []
    for entry in log.entries:
        token = tokens.get(entry.ip)
        if token is None:
            token = f"u{len(tokens) + 1:04d}"
            tokens[entry.ip] = token
        entries.append(replace(entry, ip=token))

    logger.info(f"Anonimização: {len(tokens)} ip(s) substituído(s)")
    return JointLog(entries=entries, source_count=log.source_count, log_format=log.log_format)
