"""
Exportação do modelo relacional (CSV) e do relatório da execução.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from errors import RefIntegrityViolation
from log_parser import Timestamp, format_table_time
from models import aggregates as aggregates_model
from models import requests as requests_model
from models import session_detail as session_detail_model
from models import users as users_model
from models import visits as visits_model
from utils.utilidades import format_table

logger = logging.getLogger(__name__)

REPORT_FILE = 'report.json'

TABLE_COLUMNS = [
    'Website', 'Duration', 'Original Size', 'Size after Preprocessing',
    '% Reduction in Size', 'No. of Sessions', 'No. of Users',
]

# Resultados publicados para comparação (não são esperados exatamente)
REFERENCE_RESULTS = {
    'nasa-aug95': ['NASA', '1-10 Aug 1995', '75361 bytes', '20362 bytes', '72.98%', 6821, 5421],
    'nasa-jul95': ['NASA', '20-24 Jul 1995', '205532 bytes', '57092 bytes', '72.22%', 16810, 12525],
    'academic-2001': ['Academic Site', '12-28 May 2001', '28972 bytes', '5043 bytes', '82.5%', 1645, 936],
}


@dataclass
class ExportBundle:
    requests: list = field(default_factory=list)
    users: list = field(default_factory=list)
    visits: list = field(default_factory=list)
    session_detail: list = field(default_factory=list)
    session_aggregates: list = field(default_factory=list)
    period_aggregates: list = field(default_factory=list)
    server_shares: list = field(default_factory=list)
    # None = generalização desligada, o arquivo não é gerado
    url_aggregates: Optional[list] = None
    report: Optional['RunReport'] = None


@dataclass
class RunCounts:
    site: str
    first_time: Optional[Timestamp] = None
    last_time: Optional[Timestamp] = None
    parse: dict = field(default_factory=dict)
    requests: int = 0
    visits: int = 0
    user_sessions: int = 0
    users: int = 0
    config: dict = field(default_factory=dict)
    reference: Optional[str] = None


@dataclass
class RunReport:
    text: str
    data: dict


def build_bundle(log, users, sessions, session_aggs, period_aggs, shares, url_aggs=None, report=None) -> ExportBundle:
    """Converte os resultados das etapas nas linhas de cada tabela"""
    return ExportBundle(
        requests=requests_model.build_request_rows(log, sessions),
        users=users_model.build_user_rows(users),
        visits=visits_model.build_visit_rows(sessions),
        session_detail=session_detail_model.build_session_detail_rows(log, sessions),
        session_aggregates=aggregates_model.build_session_aggregate_rows(session_aggs),
        period_aggregates=aggregates_model.build_period_aggregate_rows(period_aggs),
        server_shares=aggregates_model.build_server_share_rows(shares),
        url_aggregates=None if url_aggs is None else aggregates_model.build_url_aggregate_rows(url_aggs),
        report=report,
    )


def check_integrity(bundle: ExportBundle):
    """Confere se todas as chaves estrangeiras resolvem"""
    user_ids = {u.user_id for u in bundle.users}
    visit_ids = {v.visit_id for v in bundle.visits}
    problems = []

    if len(user_ids) != len(bundle.users):
        problems.append("user_id repetido em users")
    if len(visit_ids) != len(bundle.visits):
        problems.append("visit_id repetido em visits")
    for r in bundle.requests:
        if r.user_id not in user_ids:
            problems.append(f"requests {r.request_id}: user_id {r.user_id} inexistente")
        if r.visit_id not in visit_ids:
            problems.append(f"requests {r.request_id}: visit_id {r.visit_id} inexistente")
    for v in bundle.visits:
        if v.user_id not in user_ids:
            problems.append(f"visits {v.visit_id}: user_id {v.user_id} inexistente")
    for d in bundle.session_detail:
        if d.session_id not in visit_ids:
            problems.append(f"session_detail: session_id {d.session_id} inexistente")
    for a in bundle.session_aggregates:
        if a.user_id not in user_ids:
            problems.append(f"session_aggregates: user_id {a.user_id} inexistente")
    if len(bundle.session_detail) != len(bundle.requests):
        problems.append("session_detail e requests com quantidades diferentes")

    if problems:
        shown = '; '.join(problems[:5])
        raise RefIntegrityViolation(f"{len(problems)} problema(s) de integridade: {shown}")


def export_tables(bundle: ExportBundle, out_dir) -> list:
    """Grava as tabelas (e o report.json, se houver) em out_dir"""
    check_integrity(bundle)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    written = [
        requests_model.write_requests(out / requests_model.FILE_NAME, bundle.requests),
        users_model.write_users(out / users_model.FILE_NAME, bundle.users),
        visits_model.write_visits(out / visits_model.FILE_NAME, bundle.visits),
        session_detail_model.write_session_detail(out / session_detail_model.FILE_NAME, bundle.session_detail),
        aggregates_model.write_session_aggregates(out / aggregates_model.SESSION_AGGREGATES_FILE, bundle.session_aggregates),
        aggregates_model.write_period_aggregates(out / aggregates_model.PERIOD_AGGREGATES_FILE, bundle.period_aggregates),
        aggregates_model.write_server_shares(out / aggregates_model.SERVER_SHARES_FILE, bundle.server_shares),
    ]
    if bundle.url_aggregates is not None:
        written.append(aggregates_model.write_url_aggregates(out / aggregates_model.URL_AGGREGATES_FILE, bundle.url_aggregates))
    if bundle.report is not None:
        written.append(write_report(bundle.report, out))

    logger.info(f"[OK] {len(written)} arquivo(s) gravado(s) em {out}")
    return written


def read_bundle(out_dir) -> ExportBundle:
    """Relê as tabelas gravadas por export_tables"""
    out = Path(out_dir)
    url_path = out / aggregates_model.URL_AGGREGATES_FILE
    report_path = out / REPORT_FILE
    report = None
    if report_path.exists():
        data = json.loads(report_path.read_text(encoding='utf-8'))
        report = RunReport(text=render_text(data), data=data)
    return ExportBundle(
        requests=requests_model.read_requests(out / requests_model.FILE_NAME),
        users=users_model.read_users(out / users_model.FILE_NAME),
        visits=visits_model.read_visits(out / visits_model.FILE_NAME),
        session_detail=session_detail_model.read_session_detail(out / session_detail_model.FILE_NAME),
        session_aggregates=aggregates_model.read_session_aggregates(out / aggregates_model.SESSION_AGGREGATES_FILE),
        period_aggregates=aggregates_model.read_period_aggregates(out / aggregates_model.PERIOD_AGGREGATES_FILE),
        server_shares=aggregates_model.read_server_shares(out / aggregates_model.SERVER_SHARES_FILE),
        url_aggregates=aggregates_model.read_url_aggregates(url_path) if url_path.exists() else None,
        report=report,
    )


# ========== RELATÓRIO ==========

def format_percent(value: Optional[float]) -> str:
    return 'n/a' if value is None else f"{value:.2f}%"


def _duration(first: Optional[Timestamp], last: Optional[Timestamp]) -> str:
    if first is None or last is None:
        return 'n/a'
    return f"{format_table_time(first)[:10]}/{format_table_time(last)[:10]}"


def render_report(cleaning, counts: RunCounts) -> RunReport:
    """Monta o relatório com as colunas da tabela de resultados (texto + dicionário)"""
    reduction = cleaning.reduction_percent
    data = {
        'website': counts.site,
        'duration': _duration(counts.first_time, counts.last_time),
        'original_size_bytes': cleaning.input_bytes,
        'size_after_bytes': cleaning.kept_bytes,
        'reduction': format_percent(reduction),
        'reduction_percent': None if reduction is None else round(reduction, 6),
        'sessions': counts.visits,
        'users': counts.users,
        'user_sessions': counts.user_sessions,
        'requests': counts.requests,
        'parse': counts.parse,
        'cleaning': cleaning.to_dict(),
        'config': counts.config,
        'reference': None,
    }
    if counts.reference:
        row = REFERENCE_RESULTS[counts.reference]
        data['reference'] = {'name': counts.reference, **dict(zip(TABLE_COLUMNS, row))}
    return RunReport(text=render_text(data), data=data)


def render_text(data: dict) -> str:
    rows = [[
        data['website'], data['duration'], f"{data['original_size_bytes']} bytes",
        f"{data['size_after_bytes']} bytes", data['reduction'], data['sessions'], data['users'],
    ]]
    reference = data.get('reference')
    if reference:
        rows.append([reference[c] for c in TABLE_COLUMNS])

    cleaning = data['cleaning']
    lines = [
        format_table("Resultados após o pré-processamento", TABLE_COLUMNS, rows),
        "",
        f"Linhas lidas: {data['parse'].get('total_lines', 0)} "
        f"(válidas: {data['parse'].get('parsed', 0)}, rejeitadas: {data['parse'].get('rejected', 0)})",
        f"Requisições mantidas: {cleaning['kept_count']}/{cleaning['input_count']} "
        f"(robôs: {cleaning['dropped_as_robot']}, extensão: {cleaning['dropped_by_extension']}, "
        f"método: {cleaning['dropped_by_method']}, status: {cleaning['dropped_by_status']})",
        f"Sessões de usuário: {data['user_sessions']}",
    ]
    if reference:
        lines.append(f"[INFO] Linha de referência '{reference['name']}' apenas para comparação")
    return "\n".join(lines)


def write_report(report: RunReport, out_dir) -> Path:
    path = Path(out_dir) / REPORT_FILE
    path.write_text(json.dumps(report.data, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding='utf-8')
    return path
