"""
Pré-processador de logs de acesso Web.

Converte logs CLF/ECLF/Combined de vários servidores num conjunto relacional
limpo, com usuários, visitas e estatísticas agregadas.

Etapas (nesta ordem):
- Parse das linhas de cada servidor
- Junção num log único ordenado por tempo (com ajuste de relógio)
- Limpeza (recursos, robôs, métodos, status) e anonimização opcional
- Identificação de usuários
- Reconstrução de visitas
- Sumarização
- Exportação (CSV + report.json)
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from itertools import chain, islice
from pathlib import Path
from typing import Optional

from cleaner import AnonymizeMode, CleaningConfig, CleaningReport, clean
from errors import NoParseableLines, PreprocessingError
from exporter import REFERENCE_RESULTS, RunCounts, build_bundle, export_tables, render_report
from identity import assign_users
from log_parser import LogFormat, ParseReport, Timestamp, detect_format, parse_stream
from merger import JointLog, LogSource, merge
from models import aggregates as aggregates_model
from models import visits as visits_model
from models.joint_log import read_joint_log, write_joint_log
from sessionizer import SessionizerConfig, session_gen
from settings import PERIOD_CHOICES, PREPROCESSOR_CONFIG
from summarizer import period_aggregates, server_shares, session_aggregates, url_aggregates
from utils.utilidades import get_progress, printdbg

VERSION = '1.0.0'

STAGES = ('parse', 'merge', 'clean', 'identify', 'sessionize', 'summarize', 'export')
# Etapas que gravam um log intermediário que pode ser retomado com --from
INTERMEDIATE_FILES = {
    'parse': 'parsed.log',
    'merge': 'joint.log',
    'clean': 'cleaned.log',
    'sessionize': 'sessionized.log',
}
RESUMABLE_STAGES = ('parse', 'merge', 'clean', 'sessionize')
# Subcomando da CLI -> última etapa executada
COMMAND_STAGES = {'run': 'export'}

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NO_INPUT = 4
EXIT_DATA = 5

logger = logging.getLogger(__name__)


def configure_logging(quiet: bool = False, log_file: Optional[str] = None):
    """Mesmo layout de log do serviço: arquivo + stdout"""
    stream = logging.StreamHandler()
    stream.setLevel(logging.WARNING if quiet else logging.INFO)
    handlers = [stream]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


# ========== CONFIGURAÇÃO ==========

@dataclass(frozen=True)
class InputSpec:
    server_name: str
    path: str
    skew_seconds: int = 0


def parse_input_spec(text: str) -> InputSpec:
    """Interpreta 'servidor=caminho[:skew_segundos]'"""
    name, sep, rest = text.partition('=')
    if not sep or not name or not rest:
        raise argparse.ArgumentTypeError(f"Entrada inválida (use servidor=caminho[:skew]): {text!r}")
    path, skew = rest, 0
    head, colon, tail = rest.rpartition(':')
    if colon and head:
        try:
            skew = int(tail)
            path = head
        except ValueError:
            pass
    return InputSpec(server_name=name, path=path, skew_seconds=skew)


def parse_status_range(text: str) -> tuple:
    lo, sep, hi = text.partition('-')
    try:
        low = int(lo)
        high = int(hi) if sep else low
    except ValueError:
        raise argparse.ArgumentTypeError(f"Faixa de status inválida: {text!r}")
    return (low, high)


@dataclass
class PipelineConfig:
    inputs: list = field(default_factory=list)
    log_format: Optional[LogFormat] = None  # None = detecção automática
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    sessionizer: SessionizerConfig = field(default_factory=SessionizerConfig)
    period: str = 'day'
    generalize_depth: int = 0
    out_dir: Path = Path('out')
    site_name: Optional[str] = None
    reference: Optional[str] = None
    resume_from: Optional[Path] = None
    sample_lines: int = 200
    quiet: bool = False

    def __post_init__(self):
        if not self.inputs and self.resume_from is None:
            raise ValueError("Informe ao menos uma entrada (--input) ou um arquivo intermediário (--from)")
        if self.inputs and self.resume_from is not None:
            raise ValueError("Use --input ou --from, não ambos")
        if any(i.path == '-' for i in self.inputs) and len(self.inputs) > 1:
            raise ValueError("stdin ('-') só pode ser usado com uma única entrada")
        if self.period not in PERIOD_CHOICES:
            raise ValueError(f"Período inválido: {self.period}")
        if self.generalize_depth < 0:
            raise ValueError(f"Profundidade de generalização inválida: {self.generalize_depth}")
        if self.reference is not None and self.reference not in REFERENCE_RESULTS:
            raise ValueError(f"Referência desconhecida: {self.reference}")

    @property
    def referrer_rule(self) -> bool:
        return self.sessionizer.referrer_rule

    def to_dict(self) -> dict:
        """Eco da configuração no relatório (sem caminhos, para manter o determinismo)"""
        return {
            'format': 'auto' if self.log_format is None else self.log_format.value,
            'sessionizer': self.sessionizer.to_dict(),
            'period': self.period,
            'generalize_depth': self.generalize_depth,
        }


@dataclass
class PipelineResult:
    stage: str
    written: list = field(default_factory=list)
    report: Optional[object] = None
    elapsed_seconds: float = 0.0


# ========== SERVIÇO ==========

class Preprocessor:
    """Executa as etapas do pré-processamento até a etapa pedida"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.last_run_stage = None
        self.last_run_elapsed = None

    def read_source(self, spec: InputSpec) -> tuple[LogSource, ParseReport]:
        """Lê um arquivo de log (ou stdin), detectando o formato se necessário"""
        if spec.path == '-':
            stream, close = sys.stdin.buffer, False
        else:
            stream, close = open(spec.path, 'rb'), True

        try:
            head = list(islice(stream, self.config.sample_lines))
            log_format = self.config.log_format
            if log_format is None:
                sample = [line for line in head if line.strip()]
                if sample:
                    log_format = detect_format(sample)
                else:
                    log_format = LogFormat.COMBINED
                    logger.info(f"Servidor {spec.server_name}: entrada vazia, assumindo formato combined")
            entries, report = parse_stream(chain(head, stream), log_format)
        finally:
            if close:
                stream.close()

        logger.info(f"Servidor {spec.server_name}: {report.parsed}/{report.total_lines} linhas lidas ({log_format.value})")
        if report.rejected:
            logger.warning(f"Servidor {spec.server_name}: {report.rejected} linha(s) descartada(s) por formato inválido")
            for line_no, reason in report.rejects[:5]:
                printdbg(f"  linha {line_no}: {reason}")
        return LogSource(spec.server_name, entries, spec.skew_seconds, log_format), report

    def load_sources(self) -> tuple[list, ParseReport]:
        sources = []
        total = ParseReport()
        for spec in self.config.inputs:
            source, report = self.read_source(spec)
            sources.append(source)
            total = total.merge(report)

        if total.total_lines and not total.parsed:
            raise NoParseableLines("Nenhuma linha válida nas entradas")
        return sources, total

    def _metadata(self, stage: str, log: JointLog, state: dict) -> dict:
        meta = {
            'stage': stage,
            'format': log.log_format.value,
            'source_count': log.source_count,
            'servers': state['servers'],
            'inputs': state['inputs'],
            'parse': state['parse'].to_dict(),
            'input_span': state['input_span'],
        }
        if state.get('cleaning') is not None:
            meta['cleaning'] = state['cleaning'].to_dict()
        return meta

    def _resume(self) -> tuple[JointLog, Optional[list], dict, int]:
        """Lê um arquivo intermediário; devolve (log, fontes, estado, índice da última etapa feita)"""
        log, _, meta = read_joint_log(self.config.resume_from)
        stage = meta.get('stage')
        if stage not in RESUMABLE_STAGES:
            raise ValueError(f"Arquivo {self.config.resume_from} não pode ser retomado (etapa {stage!r})")
        parse = meta.get('parse', {})
        state = {
            'servers': meta.get('servers', log.server_names),
            'inputs': meta.get('inputs', []),
            'parse': ParseReport(parse.get('total_lines', 0), parse.get('parsed', 0), parse.get('rejected', 0)),
            'input_span': meta.get('input_span'),
            'cleaning': CleaningReport.from_dict(meta['cleaning']) if 'cleaning' in meta else None,
        }
        logger.info(f"Retomando após a etapa '{stage}' a partir de {self.config.resume_from} ({len(log)} entradas)")
        sources = _sources_from_parsed(log, meta) if stage == 'parse' else None
        # identify/sessionize são sempre recalculadas; retomar delas equivale a retomar da limpeza
        done = min(STAGES.index(stage), STAGES.index('clean'))
        return log, sources, state, done

    def run_until(self, last_stage: str = 'export') -> PipelineResult:
        stop = STAGES.index(last_stage)
        out = Path(self.config.out_dir)
        t0 = time.time()
        result = PipelineResult(stage=last_stage)
        progress = get_progress(stop + 1, desc="Pré-processamento", enabled=not self.config.quiet)

        try:
            if self.config.resume_from is not None:
                log, sources, state, done = self._resume()
                if done >= stop:
                    raise ValueError(f"O arquivo já passou pela etapa '{last_stage}'")
                progress.update(done + 1)
            else:
                progress.set_description("Lendo logs")
                sources, parse_report = self.load_sources()
                progress.update()
                state = {
                    'servers': [s.server_name for s in sources],
                    'inputs': [{'server': s.server_name, 'skew_seconds': s.clock_skew_seconds} for s in sources],
                    'parse': parse_report,
                    'cleaning': None,
                }
                done = STAGES.index('parse')
                out.mkdir(parents=True, exist_ok=True)

                if last_stage == 'parse':
                    result.written = self._write_parsed(sources, parse_report, out)
                    return result

            out.mkdir(parents=True, exist_ok=True)

            if done < STAGES.index('merge'):
                progress.set_description("Juntando logs")
                log = merge(sources)
                progress.update()
                state['input_span'] = (
                    [log.entries[0].time.utc_epoch_seconds, log.entries[-1].time.utc_epoch_seconds]
                    if log.entries else None
                )
                if last_stage == 'merge':
                    path = out / INTERMEDIATE_FILES['merge']
                    result.written = [write_joint_log(path, log, None, self._metadata('merge', log, state))]
                    return result

            if done < STAGES.index('clean'):
                progress.set_description("Limpando")
                log, state['cleaning'] = clean(log, self.config.cleaning)
                progress.update()
                if last_stage == 'clean':
                    path = out / INTERMEDIATE_FILES['clean']
                    result.written = [write_joint_log(path, log, None, self._metadata('clean', log, state))]
                    return result

            progress.set_description("Identificando usuários")
            users, annotated = assign_users(log)
            progress.update()

            progress.set_description("Reconstruindo visitas")
            sessions = session_gen(annotated, self.config.sessionizer)
            progress.update()
            if last_stage == 'sessionize':
                path = out / INTERMEDIATE_FILES['sessionize']
                result.written = [
                    write_joint_log(path, log, annotated.user_ids, self._metadata('sessionize', log, state)),
                    visits_model.write_visits(out / visits_model.FILE_NAME, visits_model.build_visit_rows(sessions)),
                ]
                return result

            progress.set_description("Sumarizando")
            session_aggs = session_aggregates(sessions, annotated)
            period_aggs = period_aggregates(annotated, sessions, self.config.period)
            shares = server_shares(annotated.log)
            url_aggs = None
            if self.config.generalize_depth > 0:
                url_aggs = url_aggregates(annotated, sessions, self.config.generalize_depth)
            progress.update()

            bundle = build_bundle(annotated, users, sessions, session_aggs, period_aggs, shares, url_aggs)
            if last_stage == 'summarize':
                result.written = self._write_summaries(bundle, out)
                return result

            progress.set_description("Exportando")
            counts = self._counts(state, annotated, users, sessions)
            cleaning = state['cleaning'] or CleaningReport()
            bundle.report = render_report(cleaning, counts)
            result.report = bundle.report
            result.written = export_tables(bundle, out)
            progress.update()
            return result
        finally:
            progress.close()
            result.elapsed_seconds = time.time() - t0
            self.last_run_stage = last_stage
            self.last_run_elapsed = result.elapsed_seconds
            logger.info(f"Etapa '{last_stage}' concluída em {result.elapsed_seconds:.2f}s")

    def run_pipeline(self) -> PipelineResult:
        return self.run_until('export')

    def _counts(self, state, annotated, users, sessions) -> RunCounts:
        span = state.get('input_span')
        return RunCounts(
            site=self.config.site_name or ','.join(state['servers']) or '-',
            first_time=Timestamp(span[0], 0) if span else None,
            last_time=Timestamp(span[1], 0) if span else None,
            parse=state['parse'].to_dict(),
            requests=len(annotated),
            visits=len(sessions.visits),
            user_sessions=len(sessions.per_user_visits),
            users=len(users),
            config={**self.config.to_dict(), 'inputs': state['inputs']},
            reference=self.config.reference,
        )

    def _write_parsed(self, sources, parse_report, out: Path) -> list:
        entries = [e for s in sources for e in s.entries]
        for source in sources:
            for entry in source.entries:
                entry.server = source.server_name
        formats = [s.log_format for s in sources]
        log = JointLog(entries=entries, source_count=len(sources),
                       log_format=LogFormat.richest(formats) or LogFormat.COMBINED)
        meta = {
            'stage': 'parse',
            'format': log.log_format.value,
            'source_count': len(sources),
            'servers': [s.server_name for s in sources],
            'inputs': [{'server': s.server_name, 'skew_seconds': s.clock_skew_seconds} for s in sources],
            'source_formats': {s.server_name: s.log_format.value for s in sources if s.log_format is not None},
            'parse': parse_report.to_dict(),
        }
        report_path = out / 'parse_report.json'
        report_path.write_text(json.dumps({
            **parse_report.to_dict(),
            'rejects': [[n, reason] for n, reason in parse_report.rejects],
        }, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding='utf-8')
        return [write_joint_log(out / INTERMEDIATE_FILES['parse'], log, None, meta), report_path]

    def _write_summaries(self, bundle, out: Path) -> list:
        written = [
            aggregates_model.write_session_aggregates(out / aggregates_model.SESSION_AGGREGATES_FILE, bundle.session_aggregates),
            aggregates_model.write_period_aggregates(out / aggregates_model.PERIOD_AGGREGATES_FILE, bundle.period_aggregates),
            aggregates_model.write_server_shares(out / aggregates_model.SERVER_SHARES_FILE, bundle.server_shares),
        ]
        if bundle.url_aggregates is not None:
            written.append(aggregates_model.write_url_aggregates(out / aggregates_model.URL_AGGREGATES_FILE, bundle.url_aggregates))
        return written

    def get_status(self) -> dict:
        """Retorna o status da última execução"""
        return {
            'last_run_stage': self.last_run_stage,
            'last_run_elapsed': self.last_run_elapsed,
        }


def _sources_from_parsed(log: JointLog, meta: dict) -> list:
    """Refaz uma fonte por servidor a partir do parsed.log, com o skew e o formato de cada uma"""
    skews = {item['server']: item.get('skew_seconds', 0) for item in meta.get('inputs', [])}
    formats = meta.get('source_formats', {})
    by_server = {name: [] for name in meta.get('servers', [])}
    for entry in log.entries:
        entries = by_server.setdefault(entry.server, [])
        # posição dentro do servidor: mantém a ordem relativa das linhas originais
        entry.line_no = len(entries) + 1
        entries.append(entry)
    return [
        LogSource(name, entries, skews.get(name, 0), LogFormat(formats[name]) if name in formats else None)
        for name, entries in by_server.items()
    ]


# ========== CLI ==========

def _split_values(values: Optional[list]) -> Optional[list]:
    """Junta valores repetidos e separados por vírgula; 'none' esvazia a lista"""
    if values is None:
        return None
    items = [v.strip() for value in values for v in value.split(',') if v.strip()]
    if [i.lower() for i in items] == ['none']:
        return []
    return items


def build_arg_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--input', dest='inputs', action='append', type=parse_input_spec, default=[],
                        metavar='SERVIDOR=CAMINHO[:SKEW]',
                        help="log de um servidor; SKEW corrige o relógio em segundos. '-' lê stdin")
    common.add_argument('--from', dest='resume_from', type=Path, default=None, metavar='ARQUIVO',
                        help="retoma de um log intermediário (joint.log, cleaned.log, sessionized.log)")
    common.add_argument('--format', choices=['auto'] + [f.value for f in LogFormat], default='auto')
    common.add_argument('--out', dest='out_dir', type=Path, default=Path(PREPROCESSOR_CONFIG['out_dir']))
    common.add_argument('--quiet', action='store_true', help="sem barra de progresso nem relatório no stdout")

    cleaning = common.add_argument_group('limpeza')
    cleaning.add_argument('--drop-ext', action='append', default=None,
                          help="extensões descartadas (substitui o padrão; 'none' para nenhuma)")
    cleaning.add_argument('--robot-keyword', action='append', default=None,
                          help="palavras-chave de robô no agent (substitui o padrão; 'none' para nenhuma)")
    cleaning.add_argument('--no-robots-txt-rule', action='store_true',
                          help="não marca como robô quem pede /robots.txt")
    cleaning.add_argument('--keep-status', action='append', type=parse_status_range, default=None,
                          metavar='LO-HI', help="faixa de status mantida (padrão 200-399)")
    cleaning.add_argument('--allow-method', action='append', default=None,
                          help="métodos mantidos (padrão GET,POST; '*' para todos)")
    cleaning.add_argument('--anonymize', nargs='?', const='hash', default='off',
                          choices=[m.value for m in AnonymizeMode])

    sessions = common.add_argument_group('sessões')
    sessions.add_argument('--timeout-seconds', type=int, default=PREPROCESSOR_CONFIG['timeout_seconds'])
    sessions.add_argument('--referrer-rule', choices=['on', 'off'], default='on')
    sessions.add_argument('--max-visit-seconds', type=int, default=0,
                          help="duração máxima de uma visita (0 = sem limite)")

    summary = common.add_argument_group('sumarização')
    summary.add_argument('--period', choices=PERIOD_CHOICES, default=PREPROCESSOR_CONFIG['period'])
    summary.add_argument('--generalize-depth', type=int, default=PREPROCESSOR_CONFIG['generalize_depth'],
                         help="segmentos mantidos na generalização de urls (0 desliga)")
    summary.add_argument('--site-name', default=None)
    summary.add_argument('--reference', choices=sorted(REFERENCE_RESULTS), default=None,
                         help="mostra a linha de resultados publicada para comparação")

    parser = argparse.ArgumentParser(
        prog='log_preprocessor',
        description="Pré-processamento de logs de acesso Web (junção, limpeza, usuários, visitas, sumarização)",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('parse', parents=[common], help="lê os logs e grava parsed.log")
    sub.add_parser('merge', parents=[common], help="até a junção; grava joint.log")
    sub.add_parser('clean', parents=[common], help="até a limpeza; grava cleaned.log")
    sub.add_parser('sessionize', parents=[common], help="até as visitas; grava sessionized.log e visits.csv")
    sub.add_parser('summarize', parents=[common], help="até a sumarização; grava os agregados")
    sub.add_parser('run', parents=[common], help="pipeline completo com exportação")
    return parser


def build_config(args) -> PipelineConfig:
    """Converte os argumentos da CLI em PipelineConfig (ValueError se inválidos)"""
    defaults = CleaningConfig()

    drop_ext = _split_values(args.drop_ext)
    keywords = _split_values(args.robot_keyword)
    methods = _split_values(args.allow_method)

    cleaning = CleaningConfig(
        drop_extensions=defaults.drop_extensions if drop_ext is None
        else frozenset(e.lstrip('.').lower() for e in drop_ext),
        allowed_methods=defaults.allowed_methods if methods is None
        else (None if '*' in methods else frozenset(m.upper() for m in methods)),
        keep_status_ranges=defaults.keep_status_ranges if args.keep_status is None else tuple(args.keep_status),
        robot_agent_keywords=defaults.robot_agent_keywords if keywords is None
        else frozenset(k.lower() for k in keywords),
        robots_txt_rule=not args.no_robots_txt_rule,
        anonymize=AnonymizeMode(args.anonymize),
    )
    sessionizer = SessionizerConfig(
        timeout_seconds=args.timeout_seconds,
        referrer_rule=args.referrer_rule == 'on',
        max_visit_seconds=args.max_visit_seconds,
    )
    return PipelineConfig(
        inputs=args.inputs,
        log_format=None if args.format == 'auto' else LogFormat(args.format),
        cleaning=cleaning,
        sessionizer=sessionizer,
        period=args.period,
        generalize_depth=args.generalize_depth,
        out_dir=args.out_dir,
        site_name=args.site_name,
        reference=args.reference,
        resume_from=args.resume_from,
        sample_lines=PREPROCESSOR_CONFIG['sample_lines'],
        quiet=args.quiet,
    )


def main(argv: Optional[list] = None) -> int:
    """Função principal da CLI; devolve o código de saída"""
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    configure_logging(args.quiet, PREPROCESSOR_CONFIG['log_file'])

    try:
        config = build_config(args)
    except ValueError as e:
        print(f"[ERRO] {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        result = Preprocessor(config).run_until(COMMAND_STAGES.get(args.command, args.command))
    except NoParseableLines as e:
        logger.error(f"Nenhuma entrada válida: {e}")
        return EXIT_NO_INPUT
    except OSError as e:
        logger.error(f"Erro de leitura/escrita: {e}")
        return EXIT_IO
    except PreprocessingError as e:
        logger.error(f"Erro nos dados: {e}")
        return EXIT_DATA
    except ValueError as e:
        logger.error(f"Uso inválido: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Erro fatal: {e}", exc_info=True)
        return EXIT_ERROR

    if result.report is not None and not config.quiet:
        print(result.report.text)
    for path in result.written:
        printdbg(f"Gravado: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
