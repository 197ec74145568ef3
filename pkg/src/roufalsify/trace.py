"""Signals and traces on a shared uniform time grid.

Traces are immutable after construction and safe to share across workers.
The CSV format is ``time,<name>,...`` with a ``.`` decimal separator,
UTF-8 and LF line endings; values are written with 17 significant digits
so that a write/read round trip preserves float64 exactly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

_TIME_TOL = 1e-9


class TraceError(ValueError):
    """Malformed trace construction or CSV input."""


class DomainError(ValueError):
    """Time query outside the trace's domain."""


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0):
            raise TraceError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise TraceError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n_steps - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps)

    def _tol(self) -> float:
        return _TIME_TOL * max(1.0, abs(self.t0), abs(self.t_end))

    def contains(self, t: float) -> bool:
        tol = self._tol()
        return self.t0 - tol <= t <= self.t_end + tol

    def index_of(self, t: float) -> int:
        """Index of the grid point at ``t``; raises if ``t`` is off-grid."""
        if not self.contains(t):
            raise DomainError(f"t={t} outside [{self.t0}, {self.t_end}]")
        k = int(round((t - self.t0) / self.dt))
        k = min(max(k, 0), self.n_steps - 1)
        if abs(self.t0 + k * self.dt - t) > self._tol():
            raise DomainError(f"t={t} is not on the grid (dt={self.dt})")
        return k

    def floor_index(self, t: float) -> int:
        if not self.contains(t):
            raise DomainError(f"t={t} outside [{self.t0}, {self.t_end}]")
        k = int(math.floor((t - self.t0) / self.dt + self._tol()))
        return min(max(k, 0), self.n_steps - 1)


@dataclass(frozen=True)
class Signal:
    name: str
    grid: TimeGrid
    values: np.ndarray
    interp: str = "linear"  # "linear" | "hold"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) != self.grid.n_steps:
            raise TraceError(
                f"signal {self.name!r}: expected {self.grid.n_steps} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise TraceError(f"signal {self.name!r}: values must be finite")
        if self.interp not in ("linear", "hold"):
            raise TraceError(f"signal {self.name!r}: unknown interp {self.interp!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def value_at(signal: Signal, t: float) -> float:
    """Sample value at time ``t``; hold-previous or linear between grid points."""
    grid = signal.grid
    if not grid.contains(t):
        raise DomainError(f"t={t} outside [{grid.t0}, {grid.t_end}]")
    # Exact grid hit returns the stored sample in both modes.
    k = int(round((t - grid.t0) / grid.dt))
    k = min(max(k, 0), grid.n_steps - 1)
    if abs(grid.t0 + k * grid.dt - t) <= grid._tol():
        return float(signal.values[k])
    k = grid.floor_index(t)
    if signal.interp == "hold":
        return float(signal.values[k])
    t_k = grid.t0 + k * grid.dt
    frac = (t - t_k) / grid.dt
    return float(signal.values[k] * (1.0 - frac) + signal.values[k + 1] * frac)


@dataclass(frozen=True)
class Trace:
    grid: TimeGrid
    signals: Mapping[str, Signal] = field(default_factory=dict)

    def __post_init__(self):
        for name, sig in self.signals.items():
            if name != sig.name:
                raise TraceError(f"signal key {name!r} != signal name {sig.name!r}")
            if sig.grid != self.grid:
                raise TraceError(f"signal {name!r} is on a different grid")

    @staticmethod
    def from_signals(signals: list[Signal]) -> "Trace":
        if not signals:
            raise TraceError("a trace needs at least one signal")
        names = [s.name for s in signals]
        if len(set(names)) != len(names):
            raise TraceError("duplicate signal names")
        return Trace(grid=signals[0].grid, signals={s.name: s for s in signals})

    def signal(self, name: str) -> Signal:
        return self.signals[name]

    @property
    def names(self) -> list[str]:
        return list(self.signals.keys())


def trace_to_csv(trace: Trace) -> str:
    names = trace.names
    out = io.StringIO()
    out.write("time," + ",".join(names) + "\n")
    times = trace.grid.times()
    cols = [trace.signals[n].values for n in names]
    for i in range(trace.grid.n_steps):
        row = [f"{times[i]:.17g}"] + [f"{col[i]:.17g}" for col in cols]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def trace_from_csv(text: str, interp: Mapping[str, str] | None = None) -> Trace:
    """Parse the CSV trace format; ``interp`` overrides the per-signal default."""
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise TraceError("empty trace CSV")
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) < 2 or header[0] != "time":
        raise TraceError("header must be 'time,<name>,...'")
    names = header[1:]
    if len(set(names)) != len(names):
        raise TraceError("duplicate signal names in header")
    if len(lines) - 1 < 2:
        # a single data row has no defined spacing
        raise TraceError("need at least 2 data rows")
    times: list[float] = []
    columns: list[list[float]] = [[] for _ in names]
    for rownum, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise TraceError(f"row {rownum}: expected {len(header)} fields, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise TraceError(f"row {rownum}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise TraceError(f"row {rownum}: non-finite value")
        times.append(vals[0])
        for j in range(len(names)):
            columns[j].append(vals[1 + j])
    dt = times[1] - times[0]
    if dt <= 0:
        raise TraceError("row 3: times must be strictly increasing")
    tol = _TIME_TOL * max(1.0, abs(times[-1]))
    for i in range(1, len(times)):
        if abs((times[i] - times[i - 1]) - dt) > max(tol, _TIME_TOL * dt):
            raise TraceError(f"row {i + 2}: non-uniform time spacing")
    grid = TimeGrid(t0=times[0], dt=dt, n_steps=len(times))
    interp = interp or {}
    sigs = [
        Signal(name=n, grid=grid, values=np.array(col), interp=interp.get(n, "linear"))
        for n, col in zip(names, columns)
    ]
    return Trace.from_signals(sigs)
