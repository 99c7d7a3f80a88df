"""
Identificação de usuários: login quando presente, senão a combinação ip + agent.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from log_parser import LogEntry, Timestamp
from merger import JointLog

logger = logging.getLogger(__name__)


class UserKind(Enum):
    LOGIN = 'login'
    IP_AGENT = 'ip_agent'


@dataclass(frozen=True, slots=True)
class UserKey:
    kind: UserKind
    login: Optional[str] = None
    ip: Optional[str] = None
    agent: Optional[str] = None

    def __post_init__(self):
        if self.kind is UserKind.LOGIN:
            if self.login is None or self.ip is not None or self.agent is not None:
                raise ValueError("UserKey de login deve ter apenas o campo login")
        elif self.login is not None or self.ip is None:
            raise ValueError("UserKey ip/agent deve ter ip e não deve ter login")

    @classmethod
    def for_login(cls, login: str) -> 'UserKey':
        return cls(UserKind.LOGIN, login=login)

    @classmethod
    def for_ip_agent(cls, ip: str, agent: Optional[str]) -> 'UserKey':
        return cls(UserKind.IP_AGENT, ip=ip, agent=agent)


@dataclass
class UserRecord:
    user_id: int
    key: UserKey
    first_seen: Timestamp
    request_count: int = 0


@dataclass
class UserTable:
    users: list = field(default_factory=list)

    def __len__(self):
        return len(self.users)

    def __iter__(self):
        return iter(self.users)


@dataclass
class AnnotatedLog:
    """Log limpo em que cada entrada (por índice) carrega o user_id"""
    log: JointLog
    user_ids: list = field(default_factory=list)

    @property
    def entries(self) -> list:
        return self.log.entries

    def __len__(self):
        return len(self.log.entries)


def user_key(entry: LogEntry) -> UserKey:
    if entry.login is not None:
        return UserKey.for_login(entry.login)
    return UserKey.for_ip_agent(entry.ip, entry.agent)


def assign_users(log: JointLog) -> tuple[UserTable, AnnotatedLog]:
    """Numera os usuários de 1 em diante na ordem de primeira aparição"""
    ids = {}
    table = UserTable()
    user_ids = []

    for entry in log.entries:
        key = user_key(entry)
        user_id = ids.get(key)
        if user_id is None:
            user_id = len(table.users) + 1
            ids[key] = user_id
            table.users.append(UserRecord(user_id=user_id, key=key, first_seen=entry.time))
        table.users[user_id - 1].request_count += 1
        user_ids.append(user_id)

    logger.info(f"Usuários identificados: {len(table)}")
    return table, AnnotatedLog(log=log, user_ids=user_ids)
