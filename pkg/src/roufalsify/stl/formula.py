"""Formula and expression AST.

Predicates are stored in normal form ``g >= 0`` (or ``g > 0`` when the
source comparison was strict): ``a <= b`` becomes ``b - a >= 0`` and a bare
arithmetic expression ``e`` is shorthand for ``e >= 0``.  Robustness of a
predicate is the value of ``g`` either way; strictness only matters for
qualitative evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass


# --- arithmetic expressions over signal names ---------------------------------


class Expr:
    def free_vars(self) -> set[str]:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def free_vars(self):
        return set()

    def to_text(self):
        return f"{self.value:.17g}"


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def free_vars(self):
        return {self.name}

    def to_text(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def free_vars(self):
        return self.operand.free_vars()

    def to_text(self):
        return f"-{_paren(self.operand, 3)}"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # + - * /
    left: Expr
    right: Expr

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def to_text(self):
        prec = _PREC[self.op]
        lhs = _paren(self.left, prec)
        # right operand of - and / needs parens at equal precedence
        rhs = _paren(self.right, prec + (1 if self.op in "-/" else 0))
        return f"{lhs} {self.op} {rhs}"


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _expr_prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 4


def _paren(e: Expr, min_prec: int) -> str:
    text = e.to_text()
    if _expr_prec(e) < min_prec:
        return f"({text})"
    return text


def sub(a: Expr, b: Expr) -> Expr:
    """``a - b`` with literal-zero operands dropped, keeping normal forms short."""
    if isinstance(b, Const) and b.value == 0.0:
        return a
    if isinstance(a, Const) and a.value == 0.0:
        return Neg(b)
    return BinOp("-", a, b)


# --- formulas ------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise ValueError(f"interval [{self.lo},{self.hi}] must satisfy 0 <= lo < hi")

    def to_text(self):
        return f"[{self.lo:.17g},{self.hi:.17g}]"


class Formula:
    def to_text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Pred(Formula):
    g: Expr
    strict: bool = False

    def to_text(self):
        return f"{self.g.to_text()} {'>' if self.strict else '>='} 0"


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def to_text(self):
        return f"!({self.child.to_text()})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def to_text(self):
        return f"({self.left.to_text()} & {self.right.to_text()})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def to_text(self):
        return f"({self.left.to_text()} | {self.right.to_text()})"


@dataclass(frozen=True)
class Until(Formula):
    interval: Interval
    left: Formula
    right: Formula

    def to_text(self):
        return f"({self.left.to_text()} U{self.interval.to_text()} {self.right.to_text()})"


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula
    interval: Interval | None = None  # None: bound to the trace horizon

    def to_text(self):
        iv = self.interval.to_text() if self.interval else ""
        return f"F{iv}({self.child.to_text()})"


@dataclass(frozen=True)
class Globally(Formula):
    child: Formula
    interval: Interval | None = None

    def to_text(self):
        iv = self.interval.to_text() if self.interval else ""
        return f"G{iv}({self.child.to_text()})"


def free_signals(f: Formula) -> set[str]:
    if isinstance(f, Pred):
        return f.g.free_vars()
    if isinstance(f, Not):
        return free_signals(f.child)
    if isinstance(f, (And, Or)):
        return free_signals(f.left) | free_signals(f.right)
    if isinstance(f, Until):
        return free_signals(f.left) | free_signals(f.right)
    if isinstance(f, (Eventually, Globally)):
        return free_signals(f.child)
    raise TypeError(f"not a formula node: {f!r}")
