import os
from dotenv import load_dotenv

# Carrega variáveis de ambiente do .env com encoding utf-8
load_dotenv(encoding='utf-8')

PERIOD_CHOICES = ('hour', 'day', 'week', 'month')


def _env_int(name: str, default: int):
    """Lê um inteiro do ambiente; devolve None se o valor for inválido"""
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        return None


def _env_bool(name: str, default: bool = False) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ('1', 'true', 'yes', 'sim', 'on')


def load_config() -> dict:
    """Monta a configuração do pré-processador a partir das variáveis de ambiente"""
    config = {
        'timeout_seconds': _env_int('PREPROC_TIMEOUT_SECONDS', 1800),
        'period': os.getenv('PREPROC_PERIOD', 'day').strip().lower(),
        'generalize_depth': _env_int('PREPROC_GENERALIZE_DEPTH', 0),
        'sample_lines': _env_int('PREPROC_SAMPLE_LINES', 200),
        'log_file': os.getenv('PREPROC_LOG_FILE', 'log_preprocessor.log'),
        'debug': _env_bool('PREPROC_DEBUG'),
        'out_dir': os.getenv('PREPROC_OUT_DIR', 'out'),
    }

    # Validar valores fornecidos
    invalid_vars = []
    if config['timeout_seconds'] is None or config['timeout_seconds'] <= 0:
        invalid_vars.append('PREPROC_TIMEOUT_SECONDS')
    if config['period'] not in PERIOD_CHOICES:
        invalid_vars.append('PREPROC_PERIOD')
    if config['generalize_depth'] is None or config['generalize_depth'] < 0:
        invalid_vars.append('PREPROC_GENERALIZE_DEPTH')
    if config['sample_lines'] is None or config['sample_lines'] <= 0:
        invalid_vars.append('PREPROC_SAMPLE_LINES')

    if invalid_vars:
        raise ValueError(f"Variáveis de ambiente com valor inválido no .env: {', '.join(invalid_vars)}")

    return config


PREPROCESSOR_CONFIG = load_config()
