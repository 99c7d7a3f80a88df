import csv
from pathlib import Path
from typing import Iterable, Optional

# Mesma política de bytes do parser: bytes não UTF-8 passam intactos
ENCODING = 'utf-8'
ERRORS = 'surrogateescape'


def opt_str(value: Optional[str]) -> str:
    return '' if value is None else value


def opt_int(value: Optional[int]) -> str:
    return '' if value is None else str(value)


def read_opt_str(value: str) -> Optional[str]:
    return None if value == '' else value


def read_opt_int(value: str) -> Optional[int]:
    return None if value == '' else int(value)


def write_table(path: Path, header: list[str], records: Iterable[list]) -> Path:
    """Grava um CSV (RFC-4180, cabeçalho, UTF-8, quebra LF)"""
    with open(path, 'w', encoding=ENCODING, errors=ERRORS, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(records)
    return Path(path)


def read_table(path: Path, header: list[str]) -> list[list[str]]:
    """Lê um CSV gravado por write_table, conferindo o cabeçalho"""
    with open(path, 'r', encoding=ENCODING, errors=ERRORS, newline='') as f:
        reader = csv.reader(f)
        found = next(reader, None)
        if found != header:
            raise ValueError(f"Cabeçalho inesperado em {path}: {found}")
        return [row for row in reader]
