#!/usr/bin/env python3
"""
Benchmark do pré-processador: mede a vazão do parse e o tempo do pipeline
completo sobre um log sintético (ou sobre um log real passado em --input).
"""

import argparse
import logging
import random
import sys
import tempfile
import time
from pathlib import Path

from log_parser import LogFormat, parse_stream
from log_preprocessor import InputSpec, PipelineConfig, Preprocessor
from utils.log_generator import synthetic_access_lines, write_lines
from utils.utilidades import format_table

logger = logging.getLogger(__name__)

# Metas de desempenho para um log de 100k linhas
MIN_PARSE_LINES_PER_SECOND = 50_000
MAX_RUN_SECONDS = 10.0


def measure_parse(path: Path, log_format: LogFormat) -> tuple[int, float]:
    """Devolve (linhas, segundos) do parse completo do arquivo"""
    t0 = time.perf_counter()
    with open(path, 'rb') as f:
        _, report = parse_stream(f, log_format)
    return report.total_lines, time.perf_counter() - t0


def measure_run(path: Path, out_dir: Path) -> float:
    config = PipelineConfig(inputs=[InputSpec('www', str(path))], out_dir=out_dir, quiet=True)
    t0 = time.perf_counter()
    Preprocessor(config).run_pipeline()
    return time.perf_counter() - t0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Benchmark do pré-processador de logs")
    parser.add_argument('--lines', type=int, default=100_000, help="linhas do log sintético")
    parser.add_argument('--seed', type=int, default=1995)
    parser.add_argument('--input', type=Path, default=None, help="log real (ex.: NASA jul/95) no lugar do sintético")
    parser.add_argument('--format', choices=[f.value for f in LogFormat], default='combined')
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    log_format = LogFormat(args.format)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        if args.input is None:
            path = tmp / 'synthetic_access.log'
            print(f"Gerando {args.lines} linhas sintéticas (seed={args.seed})...")
            write_lines(path, synthetic_access_lines(random.Random(args.seed), args.lines, log_format))
        else:
            path = args.input

        lines, parse_seconds = measure_parse(path, log_format)
        run_seconds = measure_run(path, tmp / 'out')

    rate = lines / parse_seconds if parse_seconds > 0 else float('inf')
    rows = [
        ['parse', lines, f"{parse_seconds:.2f}s", f"{rate:,.0f} linhas/s"],
        ['run', lines, f"{run_seconds:.2f}s", '-'],
    ]
    print(format_table("Benchmark", ['Etapa', 'Linhas', 'Tempo', 'Vazão'], rows))

    ok = True
    if rate < MIN_PARSE_LINES_PER_SECOND:
        print(f"[AVISO] Parse abaixo de {MIN_PARSE_LINES_PER_SECOND} linhas/s")
        ok = False
    if lines >= 100_000 and run_seconds > MAX_RUN_SECONDS * lines / 100_000:
        print(f"[AVISO] Pipeline completo acima de {MAX_RUN_SECONDS:.0f}s por 100k linhas")
        ok = False
    if ok:
        print("[OK] Metas de desempenho atingidas")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
