"""
Arquivo intermediário entre as etapas: linha Combined canônica precedida de
duas colunas (servidor e user_id, '-' quando ainda não atribuído), separadas
por tab. Um bloco inicial de linhas '#chave: json' guarda os metadados da
etapa que gerou o arquivo.
"""
import json
from pathlib import Path
from typing import Optional

from log_parser import LogFormat, canonicalize, parse_line
from merger import JointLog
from models.csv_table import ENCODING, ERRORS

UNASSIGNED = '-'


def write_joint_log(path, log: JointLog, user_ids: Optional[list] = None, metadata: Optional[dict] = None) -> Path:
    with open(path, 'w', encoding=ENCODING, errors=ERRORS, newline='\n') as f:
        for key in sorted(metadata or {}):
            f.write(f"#{key}: {json.dumps(metadata[key], sort_keys=True, ensure_ascii=False)}\n")
        for idx, entry in enumerate(log.entries):
            user = UNASSIGNED if user_ids is None else str(user_ids[idx])
            f.write(f"{entry.server}\t{user}\t{canonicalize(entry, LogFormat.COMBINED)}\n")
    return Path(path)


def read_joint_log(path) -> tuple[JointLog, Optional[list], dict]:
    """Devolve (log, user_ids ou None, metadados)"""
    metadata = {}
    entries = []
    user_ids = []
    with open(path, 'r', encoding=ENCODING, errors=ERRORS, newline='') as f:
        for line in f:
            line = line.rstrip('\r\n')
            if line.startswith('#') and not entries:
                key, _, value = line[1:].partition(': ')
                metadata[key] = json.loads(value)
                continue
            server, user, raw = line.split('\t', 2)
            entry = parse_line(raw, LogFormat.COMBINED, line_no=len(entries) + 1)
            entry.server = server
            entries.append(entry)
            user_ids.append(None if user == UNASSIGNED else int(user))

    log_format = LogFormat(metadata.get('format', LogFormat.COMBINED.value))
    log = JointLog(entries=entries, source_count=metadata.get('source_count', 0), log_format=log_format)
    assigned = user_ids if entries and all(u is not None for u in user_ids) else None
    return log, assigned, metadata
