"""conefactor: exact decisions about polyhedral state spaces via rational LPs."""

from .ratlin import (
    LinearProgram,
    LPResult,
    Rational,
    RatMatrix,
    linsolve,
    lp_solve,
    rat,
    rat_str,
)

__all__ = [
    "LinearProgram",
    "LPResult",
    "Rational",
    "RatMatrix",
    "linsolve",
    "lp_solve",
    "rat",
    "rat_str",
]

__version__ = "0.1.0"
