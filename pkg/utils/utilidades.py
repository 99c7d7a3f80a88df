import logging
from numbers import Number

from settings import PREPROCESSOR_CONFIG

DEBUG_MODE = PREPROCESSOR_CONFIG['debug']

logger = logging.getLogger(__name__)


def printdbg(*args):
    if DEBUG_MODE:
        print(" ".join(map(str, args)))


class StageProgress:
    """
    Progresso por etapa do pipeline.

    Usa tqdm (stderr) quando instalado; sem tqdm, cada etapa vira uma linha
    de log "[i/N] etapa". Com enabled=False não mostra nada (--quiet).
    """

    def __init__(self, total: int, desc: str = "", enabled: bool = True):
        self.total = total
        self.count = 0
        self.enabled = enabled
        self._bar = None
        if not enabled:
            return
        try:
            from tqdm import tqdm
            self._bar = tqdm(total=total, desc=desc, ncols=80, leave=False)
        except ImportError:
            if desc:
                logger.info(f"[0/{total}] {desc}")

    def update(self, n: int = 1):
        self.count = min(self.count + n, self.total)
        if self._bar is not None:
            self._bar.update(n)

    def set_description(self, text: str):
        if not self.enabled:
            return
        if self._bar is not None:
            self._bar.set_description(text)
        else:
            logger.info(f"[{min(self.count + 1, self.total)}/{self.total}] {text}")

    def close(self):
        if self._bar is not None:
            self._bar.close()
            self._bar = None


def get_progress(total: int, desc: str = "", enabled: bool = True) -> StageProgress:
    return StageProgress(total, desc, enabled)


def format_table(title: str, headers: list, rows: list) -> str:
    """Tabela de texto com colunas alinhadas; números à direita, texto à esquerda"""
    cells = [[str(h) for h in headers]] + [["" if c is None else str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    numeric = [
        bool(rows) and all(isinstance(row[i], Number) for row in rows)
        for i in range(len(headers))
    ]

    def render(row: list) -> str:
        parts = [c.rjust(w) if num else c.ljust(w) for c, w, num in zip(row, widths, numeric)]
        return " | ".join(parts).rstrip()

    rule = "-+-".join("-" * w for w in widths)
    lines = [f"=== {title} ===", render(cells[0]), rule]
    lines.extend(render(row) for row in cells[1:])
    return "\n".join(lines)
