"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: domain rejections (bad or degenerate
inputs, failed preconditions) are distinct from inconclusive verdicts and
from genuine internal faults.
"""

from __future__ import annotations


class SrdcertError(Exception):
    """Base class for all toolkit errors."""


class RejectionError(SrdcertError):
    """Input rejected: degenerate or invalid for the requested operation.

    Carries the name of the failing condition so front ends can report it.
    """

    def __init__(self, condition: str, message: str = ""):
        self.condition = condition
        super().__init__(f"{condition}: {message}" if message else condition)


class QuadratureError(SrdcertError):
    """Adaptive quadrature exhausted its budget without converging.

    ``partial`` holds the best value obtained, ``residual`` the error
    estimate attached to it.
    """

    def __init__(self, message: str, partial: float | complex = float("nan"),
                 residual: float = float("inf")):
        self.partial = partial
        self.residual = residual
        super().__init__(f"{message} (partial={partial!r}, residual={residual:.3e})")


class DivergentNormError(SrdcertError):
    """An L^p norm was requested for a kernel whose declared decay cannot
    support it (p * beta <= d)."""


class ConfigError(SrdcertError):
    """Run configuration file is malformed or references missing data."""
