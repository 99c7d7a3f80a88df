"""
Reconstrução de visitas (históricos H_i) por usuário.

Uma entrada abre um novo histórico quando o intervalo para a entrada anterior
do mesmo usuário excede o timeout, ou quando o referrer não é a url de
nenhuma entrada já colocada nos históricos desse usuário. Caso contrário ela
entra no histórico que acessou o referrer mais recentemente.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from errors import ReferrerNotFound
from identity import AnnotatedLog
from log_parser import LogEntry, Timestamp, url_path

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_SECONDS = 1800


@dataclass(frozen=True)
class SessionizerConfig:
    timeout_seconds: int = DEFAULT_TIMEOUT_SECONDS
    referrer_rule: bool = True
    # 0 = sem limite de duração total da visita
    max_visit_seconds: int = 0

    def __post_init__(self):
        if self.timeout_seconds <= 0:
            raise ValueError(f"timeout_seconds deve ser positivo: {self.timeout_seconds}")
        if self.max_visit_seconds < 0:
            raise ValueError(f"max_visit_seconds não pode ser negativo: {self.max_visit_seconds}")

    def to_dict(self) -> dict:
        return {
            'timeout_seconds': self.timeout_seconds,
            'referrer_rule': self.referrer_rule,
            'max_visit_seconds': self.max_visit_seconds,
        }


@dataclass
class Visit:
    visit_id: int
    user_id: int
    entries: list  # índices no log anotado, em ordem de tempo
    start: Timestamp
    end: Timestamp

    @property
    def page_views(self) -> int:
        return len(self.entries)

    @property
    def length_seconds(self) -> int:
        return self.end.utc_epoch_seconds - self.start.utc_epoch_seconds


@dataclass
class SessionSet:
    visits: list = field(default_factory=list)
    per_user_visits: dict = field(default_factory=dict)
    visit_of_entry: list = field(default_factory=list)

    def __len__(self):
        return len(self.visits)

    def visit(self, visit_id: int) -> Visit:
        return self.visits[visit_id - 1]


def referrer_path(url: str) -> str:
    return url_path(url)


def distance(histories: Sequence[Sequence[LogEntry]], referrer: str) -> int:
    """
    Índice do histórico que acessou o referrer mais recentemente.
    Empate de instante entre históricos fica com o maior índice.
    """
    target = referrer_path(referrer)
    best_index = None
    best_time = None
    for index, history in enumerate(histories):
        for entry in history:
            if referrer_path(entry.url) != target:
                continue
            t = entry.time.utc_epoch_seconds
            if best_time is None or t >= best_time:
                best_time, best_index = t, index
    if best_index is None:
        raise ReferrerNotFound(f"Referrer {referrer!r} não aparece em nenhum histórico")
    return best_index


def _user_histories(entries: list, indices: list, config: SessionizerConfig) -> list:
    """Aplica a regra de timeout/referrer à sequência de um único usuário"""
    timeout = config.timeout_seconds
    max_visit = config.max_visit_seconds
    rule = config.referrer_rule

    histories = []
    # caminho -> (instante, índice do histórico) do acesso mais recente
    latest = {}
    prev_t = None

    for idx in indices:
        entry = entries[idx]
        t = entry.time.utc_epoch_seconds
        target = None

        if prev_t is not None and t - prev_t <= timeout:
            if not rule:
                target = len(histories) - 1
            elif entry.referrer is not None:
                hit = latest.get(referrer_path(entry.referrer))
                if hit is not None:
                    target = hit[1]

        if target is not None and max_visit:
            first = entries[histories[target][0]].time.utc_epoch_seconds
            if t - first > max_visit:
                target = None

        if target is None:
            histories.append([idx])
            target = len(histories) - 1
        else:
            histories[target].append(idx)

        if rule:
            path = referrer_path(entry.url)
            old = latest.get(path)
            if old is None or t > old[0] or (t == old[0] and target > old[1]):
                latest[path] = (t, target)
        prev_t = t

    return histories


def session_gen(annotated: AnnotatedLog, config: SessionizerConfig) -> SessionSet:
    """
    Gera as visitas de todos os usuários. Os ids são globais e densos, na ordem
    (instante da primeira entrada, user_id, ordem de criação no usuário).
    """
    entries = annotated.entries
    by_user = defaultdict(list)
    for idx, user_id in enumerate(annotated.user_ids):
        by_user[user_id].append(idx)

    if config.referrer_rule and entries and not annotated.log.log_format.has_referrer:
        logger.warning(
            "Regra do referrer ativa mas o formato não registra referrer: "
            "cada requisição vira uma visita (use --referrer-rule off)"
        )

    pending = []
    for user_id in sorted(by_user):
        indices = by_user[user_id]
        indices.sort(key=lambda i: entries[i].time.utc_epoch_seconds)
        for order, history in enumerate(_user_histories(entries, indices, config)):
            start = entries[history[0]].time.utc_epoch_seconds
            pending.append((start, user_id, order, history))

    pending.sort(key=lambda p: (p[0], p[1], p[2]))

    sessions = SessionSet(visit_of_entry=[0] * len(entries))
    for visit_id, (_, user_id, _, history) in enumerate(pending, start=1):
        visit = Visit(
            visit_id=visit_id,
            user_id=user_id,
            entries=history,
            start=entries[history[0]].time,
            end=entries[history[-1]].time,
        )
        sessions.visits.append(visit)
        sessions.per_user_visits.setdefault(user_id, []).append(visit_id)
        for idx in history:
            sessions.visit_of_entry[idx] = visit_id

    logger.info(f"Visitas reconstruídas: {len(sessions.visits)} para {len(by_user)} usuário(s)")
    return sessions
