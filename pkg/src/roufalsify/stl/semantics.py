"""Qualitative and quantitative (robustness) STL semantics on uniform grids.

All temporal quantifiers range over grid points only; no inter-sample
interpolation of robustness is performed.  ``G``/``F`` without an interval
are bound to the trace horizon: they quantify over every later grid point
at which their argument is still evaluable.  A time window that contains
no grid point yields ``-inf`` robustness for F/Until (vacuously false) and
``+inf`` for G (vacuously true).
"""

from __future__ import annotations

import math

import numpy as np

from ..trace import Signal, TimeGrid, Trace
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

_STEP_TOL = 1e-9


class HorizonError(ValueError):
    """The trace is too short to evaluate the formula at the requested time."""


class UnknownSignalError(KeyError):
    """The formula references a signal the trace does not provide."""


def _interval_steps(interval: Interval, dt: float) -> tuple[int, int]:
    """Grid-index offsets [ka, kb] covered by a shifted interval."""
    ka = math.ceil(interval.lo / dt - _STEP_TOL)
    kb = math.floor(interval.hi / dt + _STEP_TOL)
    return max(ka, 0), kb


def _eval_expr(e: Expr, env: dict[str, np.ndarray], n: int) -> np.ndarray:
    if isinstance(e, Const):
        return np.full(n, e.value)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnknownSignalError(e.name) from None
    if isinstance(e, Neg):
        return -_eval_expr(e.operand, env, n)
    if isinstance(e, BinOp):
        lhs = _eval_expr(e.left, env, n)
        rhs = _eval_expr(e.right, env, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            if e.op == "+":
                return lhs + rhs
            if e.op == "-":
                return lhs - rhs
            if e.op == "*":
                return lhs * rhs
            if e.op == "/":
                return lhs / rhs
    raise TypeError(f"not an expression node: {e!r}")


def _rho(f: Formula, env: dict[str, np.ndarray], n: int, dt: float) -> np.ndarray:
    """Robustness over the maximal valid index prefix (array length = prefix)."""
    if isinstance(f, Pred):
        return _eval_expr(f.g, env, n)
    if isinstance(f, Not):
        return -_rho(f.child, env, n, dt)
    if isinstance(f, (And, Or)):
        lhs = _rho(f.left, env, n, dt)
        rhs = _rho(f.right, env, n, dt)
        m = min(len(lhs), len(rhs))
        op = np.minimum if isinstance(f, And) else np.maximum
        return op(lhs[:m], rhs[:m])
    if isinstance(f, Until):
        r1 = _rho(f.left, env, n, dt)
        r2 = _rho(f.right, env, n, dt)
        ka, kb = _interval_steps(f.interval, dt)
        valid = min(len(r1), len(r2)) - kb
        out = np.full(max(valid, 0), -math.inf)
        for k in range(len(out)):
            best = -math.inf
            runmin = math.inf
            for tp in range(k, k + kb + 1):
                runmin = min(runmin, r1[tp])
                if tp >= k + ka:
                    best = max(best, min(r2[tp], runmin))
            out[k] = best
        return out
    if isinstance(f, (Eventually, Globally)):
        child = _rho(f.child, env, n, dt)
        is_g = isinstance(f, Globally)
        if f.interval is None:
            # suffix extremum over the child's valid prefix
            if len(child) == 0:
                return child
            acc = np.minimum.accumulate if is_g else np.maximum.accumulate
            return acc(child[::-1])[::-1]
        ka, kb = _interval_steps(f.interval, dt)
        valid = len(child) - kb
        out = np.empty(max(valid, 0))
        empty_val = math.inf if is_g else -math.inf
        for k in range(len(out)):
            window = child[k + ka : k + kb + 1]
            if len(window) == 0:
                out[k] = empty_val
            else:
                out[k] = window.min() if is_g else window.max()
        return out
    raise TypeError(f"not a formula node: {f!r}")


def _sat(f: Formula, env: dict[str, np.ndarray], n: int, dt: float) -> np.ndarray:
    """Qualitative truth over the maximal valid index prefix."""
    if isinstance(f, Pred):
        g = _eval_expr(f.g, env, n)
        return g > 0 if f.strict else g >= 0
    if isinstance(f, Not):
        return ~_sat(f.child, env, n, dt)
    if isinstance(f, (And, Or)):
        lhs = _sat(f.left, env, n, dt)
        rhs = _sat(f.right, env, n, dt)
        m = min(len(lhs), len(rhs))
        return (lhs[:m] & rhs[:m]) if isinstance(f, And) else (lhs[:m] | rhs[:m])
    if isinstance(f, Until):
        s1 = _sat(f.left, env, n, dt)
        s2 = _sat(f.right, env, n, dt)
        ka, kb = _interval_steps(f.interval, dt)
        valid = min(len(s1), len(s2)) - kb
        out = np.zeros(max(valid, 0), dtype=bool)
        for k in range(len(out)):
            all_s1 = True
            for tp in range(k, k + kb + 1):
                all_s1 = all_s1 and bool(s1[tp])
                if tp >= k + ka and all_s1 and s2[tp]:
                    out[k] = True
                    break
                if not all_s1:
                    break
        return out
    if isinstance(f, (Eventually, Globally)):
        child = _sat(f.child, env, n, dt)
        is_g = isinstance(f, Globally)
        if f.interval is None:
            if len(child) == 0:
                return child
            acc = np.logical_and.accumulate if is_g else np.logical_or.accumulate
            return acc(child[::-1])[::-1]
        ka, kb = _interval_steps(f.interval, dt)
        valid = len(child) - kb
        out = np.zeros(max(valid, 0), dtype=bool)
        for k in range(len(out)):
            window = child[k + ka : k + kb + 1]
            out[k] = bool(window.all()) if is_g else bool(window.any())
        return out
    raise TypeError(f"not a formula node: {f!r}")


def _env(trace: Trace) -> dict[str, np.ndarray]:
    return {name: sig.values for name, sig in trace.signals.items()}


def eval_robustness(formula: Formula, trace: Trace, t: float = 0.0) -> float:
    k0 = trace.grid.index_of(t)
    arr = _rho(formula, _env(trace), trace.grid.n_steps, trace.grid.dt)
    if k0 >= len(arr):
        raise HorizonError(
            f"formula horizon exceeds the trace at t={t} (valid prefix: {len(arr)} points)"
        )
    return float(arr[k0])


def eval_qualitative(formula: Formula, trace: Trace, t: float = 0.0) -> bool:
    k0 = trace.grid.index_of(t)
    arr = _sat(formula, _env(trace), trace.grid.n_steps, trace.grid.dt)
    if k0 >= len(arr):
        raise HorizonError(
            f"formula horizon exceeds the trace at t={t} (valid prefix: {len(arr)} points)"
        )
    return bool(arr[k0])


def satisfaction_signal(formula: Formula, trace: Trace, name: str = "sat") -> Signal:
    """Per-grid-point qualitative value over the maximal valid prefix."""
    arr = _sat(formula, _env(trace), trace.grid.n_steps, trace.grid.dt)
    if len(arr) == 0:
        raise HorizonError("no grid point admits evaluation of the formula")
    grid = TimeGrid(t0=trace.grid.t0, dt=trace.grid.dt, n_steps=len(arr))
    return Signal(name=name, grid=grid, values=arr.astype(float), interp="hold")
