"""Independent brute-force oracles the library results are checked against.

Everything here is written as plain recursive enumeration over grid indices
(no arrays, no sharing with the library's evaluation path).
"""

from __future__ import annotations

import math

from roufalsify.stl.formula import (
    And,
    BinOp,
    Const,
    Eventually,
    Globally,
    Neg,
    Not,
    Or,
    Pred,
    Until,
    Var,
)


def expr_value(e, trace, k):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(trace.signals[e.name].values[k])
    if isinstance(e, Neg):
        return -expr_value(e.operand, trace, k)
    if isinstance(e, BinOp):
        a = expr_value(e.left, trace, k)
        b = expr_value(e.right, trace, k)
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b != 0 else math.inf}[e.op]
    raise TypeError(e)


def steps(interval, dt):
    ka = math.ceil(interval.lo / dt - 1e-9)
    kb = math.floor(interval.hi / dt + 1e-9)
    return max(ka, 0), kb


def valid_len(f, n, dt):
    if isinstance(f, Pred):
        return n
    if isinstance(f, Not):
        return valid_len(f.child, n, dt)
    if isinstance(f, (And, Or)):
        return min(valid_len(f.left, n, dt), valid_len(f.right, n, dt))
    if isinstance(f, Until):
        ka, kb = steps(f.interval, dt)
        return min(valid_len(f.left, n, dt), valid_len(f.right, n, dt)) - kb
    if isinstance(f, (Eventually, Globally)):
        inner = valid_len(f.child, n, dt)
        if f.interval is None:
            return inner
        ka, kb = steps(f.interval, dt)
        return inner - kb
    raise TypeError(f)


def rho_brute(f, trace, k):
    dt = trace.grid.dt
    n = trace.grid.n_steps
    if isinstance(f, Pred):
        return expr_value(f.g, trace, k)
    if isinstance(f, Not):
        return -rho_brute(f.child, trace, k)
    if isinstance(f, And):
        return min(rho_brute(f.left, trace, k), rho_brute(f.right, trace, k))
    if isinstance(f, Or):
        return max(rho_brute(f.left, trace, k), rho_brute(f.right, trace, k))
    if isinstance(f, Until):
        ka, kb = steps(f.interval, dt)
        best = -math.inf
        for tp in range(k + ka, k + kb + 1):
            prefix = min(rho_brute(f.left, trace, tq) for tq in range(k, tp + 1))
            best = max(best, min(rho_brute(f.right, trace, tp), prefix))
        return best
    if isinstance(f, (Eventually, Globally)):
        is_g = isinstance(f, Globally)
        if f.interval is None:
            last = valid_len(f.child, n, dt) - 1
            window = range(k, last + 1)
        else:
            ka, kb = steps(f.interval, dt)
            window = range(k + ka, k + kb + 1)
        vals = [rho_brute(f.child, trace, tp) for tp in window]
        if not vals:
            return math.inf if is_g else -math.inf
        return min(vals) if is_g else max(vals)
    raise TypeError(f)


def sat_brute(f, trace, k):
    dt = trace.grid.dt
    n = trace.grid.n_steps
    if isinstance(f, Pred):
        g = expr_value(f.g, trace, k)
        return g > 0 if f.strict else g >= 0
    if isinstance(f, Not):
        return not sat_brute(f.child, trace, k)
    if isinstance(f, And):
        return sat_brute(f.left, trace, k) and sat_brute(f.right, trace, k)
    if isinstance(f, Or):
        return sat_brute(f.left, trace, k) or sat_brute(f.right, trace, k)
    if isinstance(f, Until):
        ka, kb = steps(f.interval, dt)
        for tp in range(k + ka, k + kb + 1):
            if sat_brute(f.right, trace, tp) and all(
                sat_brute(f.left, trace, tq) for tq in range(k, tp + 1)
            ):
                return True
        return False
    if isinstance(f, (Eventually, Globally)):
        is_g = isinstance(f, Globally)
        if f.interval is None:
            last = valid_len(f.child, n, dt) - 1
            window = range(k, last + 1)
        else:
            ka, kb = steps(f.interval, dt)
            window = range(k + ka, k + kb + 1)
        vals = [sat_brute(f.child, trace, tp) for tp in window]
        return all(vals) if is_g else any(vals)
    raise TypeError(f)


def star_discrepancy_1d(xs):
    """Exhaustive over all meaningful anchored intervals [0, b]."""
    m = len(xs)
    cands = set()
    for x in xs:
        cands.add(x)
        cands.add(max(0.0, x - 1e-12))
    cands.add(1.0)
    best = 0.0
    for b in cands:
        count = sum(1 for x in xs if x <= b)
        best = max(best, abs(count / m - b))
    return best


def star_discrepancy_2d(points):
    m = len(points)
    cands_x, cands_y = set(), set()
    for x, y in points:
        cands_x.update((x, max(0.0, x - 1e-12)))
        cands_y.update((y, max(0.0, y - 1e-12)))
    cands_x.add(1.0)
    cands_y.add(1.0)
    best = 0.0
    for bx in cands_x:
        for by in cands_y:
            count = sum(1 for x, y in points if x <= bx and y <= by)
            best = max(best, abs(count / m - bx * by))
    return best


def linkage_clusters(points, radius):
    """Transitive closure of the within-radius relation, by repeated merging."""
    clusters = [{i} for i in range(len(points))]

    def dist(i, j):
        return math.dist(points[i], points[j])

    merged = True
    while merged:
        merged = False
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                if any(dist(i, j) <= radius for i in clusters[a] for j in clusters[b]):
                    clusters[a] |= clusters[b]
                    del clusters[b]
                    merged = True
                    break
            if merged:
                break
    return [sorted(c) for c in clusters]
