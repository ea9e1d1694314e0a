# bloch/exceptions.py
from __future__ import annotations

from typing import Optional


class RSPError(Exception):
    """Base de todos os erros de domínio do projeto."""


class PreconditionError(RSPError, ValueError):
    """Parâmetro fora do domínio aceito pela operação."""


class InvalidStateError(RSPError, ValueError):
    """Matriz que não é um estado quântico válido (hermitiana, traço 1, PSD)."""


class NumericalError(RSPError, ArithmeticError):
    """Quadratura ou iteração que não atingiu a tolerância pedida."""

    def __init__(self, message: str, *, achieved: Optional[float] = None):
        super().__init__(message)
        self.achieved = achieved


class ResourceLimitError(RSPError, RuntimeError):
    """Execução barrada por um limite de escala de bancada."""
