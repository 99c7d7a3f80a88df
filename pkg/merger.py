"""
Junção dos logs de vários servidores num único log ordenado por tempo.
"""

import heapq
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

from errors import DuplicateServerName
from log_parser import LogEntry, LogFormat, Timestamp

logger = logging.getLogger(__name__)


@dataclass
class LogSource:
    server_name: str
    entries: list
    clock_skew_seconds: int = 0
    log_format: Optional[LogFormat] = None

    def __post_init__(self):
        if not self.server_name or any(c.isspace() for c in self.server_name):
            raise ValueError(f"Nome de servidor inválido: {self.server_name!r}")


@dataclass
class JointLog:
    entries: list = field(default_factory=list)
    source_count: int = 0
    log_format: LogFormat = LogFormat.COMBINED

    def __len__(self):
        return len(self.entries)

    @property
    def server_names(self) -> list[str]:
        return sorted({e.server for e in self.entries})


def apply_skew(entry: LogEntry, skew_seconds: int) -> LogEntry:
    """Corrige o relógio do servidor somando skew_seconds ao instante UTC"""
    if skew_seconds == 0:
        return entry
    ts = entry.time
    return replace(entry, time=Timestamp(ts.utc_epoch_seconds + skew_seconds, ts.original_offset_minutes))


def _merge_key(entry: LogEntry):
    return (entry.time.utc_epoch_seconds, entry.server, entry.line_no)


def _is_sorted(entries: list) -> bool:
    return all(_merge_key(a) <= _merge_key(b) for a, b in zip(entries, entries[1:]))


def merge(sources: list) -> JointLog:
    """
    Junta as fontes em ordem crescente de tempo UTC (após o ajuste de relógio).
    Empates: nome do servidor, depois número da linha na fonte.
    """
    names = [s.server_name for s in sources]
    duplicated = sorted({n for n in names if names.count(n) > 1})
    if duplicated:
        raise DuplicateServerName(f"Servidores repetidos: {', '.join(duplicated)}")

    streams = []
    for source in sources:
        skew = source.clock_skew_seconds
        tagged = [replace(apply_skew(e, skew), server=source.server_name) for e in source.entries]
        streams.append(tagged)
        if skew:
            logger.info(f"Servidor {source.server_name}: relógio ajustado em {skew:+d}s")

    if all(_is_sorted(s) for s in streams):
        # Merge k-way: cada fonte já está ordenada
        entries = list(heapq.merge(*streams, key=_merge_key))
    else:
        logger.info("Fontes fora de ordem; usando ordenação completa")
        entries = sorted((e for s in streams for e in s), key=_merge_key)

    formats = [s.log_format for s in sources if s.log_format is not None]
    log_format = LogFormat.richest(formats) or LogFormat.COMBINED

    logger.info(f"Log conjunto: {len(entries)} entradas de {len(sources)} servidor(es)")
    return JointLog(entries=entries, source_count=len(sources), log_format=log_format)
