"""STL formulas: abstract syntax, concrete-syntax parser and grid semantics."""

from .formula import (
    And,
    BinOp,
    Const,
    Eventually,
    Expr,
    Formula,
    Globally,
    Interval,
    Neg,
    Not,
    Or,
    Pred,
    Until,
    Var,
)
from .parser import ParseError, parse
from .semantics import (
    HorizonError,
    UnknownSignalError,
    eval_qualitative,
    eval_robustness,
    satisfaction_signal,
)

__all__ = [
    "And",
    "BinOp",
    "Const",
    "Eventually",
    "Expr",
    "Formula",
    "Globally",
    "HorizonError",
    "Interval",
    "Neg",
    "Not",
    "Or",
    "ParseError",
    "Pred",
    "UnknownSignalError",
    "Until",
    "Var",
    "eval_qualitative",
    "eval_robustness",
    "parse",
    "satisfaction_signal",
]
