"""
Exceções do pré-processamento de logs.

Todas herdam de PreprocessingError para que a CLI consiga mapear cada uma
para um código de saída. Falhas de IO continuam sendo OSError.
"""


class PreprocessingError(Exception):
    """Erro base do pré-processamento"""


class MalformedLine(PreprocessingError):
    """Linha de log que não segue o layout esperado"""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class NoParseableLines(PreprocessingError):
    """Nenhuma linha da amostra corresponde a um formato conhecido"""


class FormatTooNarrow(PreprocessingError):
    """O formato escolhido não comporta referrer/agent da entrada"""


class DuplicateServerName(PreprocessingError):
    """Dois logs de entrada com o mesmo nome de servidor"""


class ReferrerNotFound(PreprocessingError):
    """Referrer ausente de todos os históricos (erro de quem chamou)"""


class RefIntegrityViolation(PreprocessingError):
    """Chave estrangeira que não resolve entre as tabelas exportadas"""
