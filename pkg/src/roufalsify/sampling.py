"""Samplers over the unit hypercube and a discrepancy estimator.

Halton points start at index 1 (the all-zeros point is skipped), lattice
points at index 0 as in the defining formula.  Both are deterministic:
equal arguments give bitwise-equal batches, and ``halton(m)`` is a prefix
of ``halton(m')`` for ``m < m'``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

# first 64 primes, one base per dimension
PRIMES = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
]

MAX_GRID_POINTS = 10**7


class SamplerConfigError(ValueError):
    """Unsupported sampler arguments (dimension, size, ...)."""


@dataclass(frozen=True)
class SampleBatch:
    n: int
    points: np.ndarray  # shape (m, n), all coordinates in [0, 1]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n:
            raise SamplerConfigError(f"points must have shape (m, {self.n})")
        if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
            raise SamplerConfigError("coordinates must lie in [0, 1]")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def radical_inverse(i: int, base: int) -> float:
    f = 1.0
    r = 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def halton(m: int, n: int, start_index: int = 1) -> SampleBatch:
    if n < 1:
        raise SamplerConfigError("dimension must be >= 1")
    if n > len(PRIMES):
        raise SamplerConfigError(f"halton supports at most {len(PRIMES)} dimensions")
    if m < 0:
        raise SamplerConfigError("m must be >= 0")
    bases = PRIMES[:n]
    pts = np.empty((m, n))
    for row, i in enumerate(range(start_index, start_index + m)):
        for j, p in enumerate(bases):
            pts[row, j] = radical_inverse(i, p)
    return SampleBatch(n=n, points=pts, provenance={"kind": "halton", "m": m, "start_index": start_index, "primes": bases})


def default_lattice_alphas(n: int) -> list[float]:
    """Fractional parts of square roots of the first n-1 primes."""
    return [math.sqrt(p) % 1.0 for p in PRIMES[: n - 1]]


def lattice(m: int, n: int, alphas: Iterable[float] | None = None) -> SampleBatch:
    if n < 1:
        raise SamplerConfigError("dimension must be >= 1")
    if m < 1:
        raise SamplerConfigError("m must be >= 1")
    if alphas is None:
        alphas = default_lattice_alphas(n)
    alphas = list(alphas)
    if len(alphas) != n - 1:
        raise SamplerConfigError(f"need {n - 1} alphas, got {len(alphas)}")
    if any(not (0.0 < a < 1.0) for a in alphas):
        raise SamplerConfigError("alphas must lie in (0, 1)")
    pts = np.empty((m, n))
    for i in range(m):
        pts[i, 0] = i / m
        for j, a in enumerate(alphas):
            pts[i, 1 + j] = (i * a) % 1.0
    return SampleBatch(n=n, points=pts, provenance={"kind": "lattice", "m": m, "alphas": alphas})


def grid(k_per_dim: int, n: int) -> SampleBatch:
    """Cell centers ((2i+1)/(2k)) per dimension, k**n points in row-major order."""
    if n < 1:
        raise SamplerConfigError("dimension must be >= 1")
    if k_per_dim < 1:
        raise SamplerConfigError("k_per_dim must be >= 1")
    if k_per_dim**n > MAX_GRID_POINTS:
        raise SamplerConfigError(f"grid would have {k_per_dim ** n} points (limit {MAX_GRID_POINTS})")
    axis = (2 * np.arange(k_per_dim) + 1) / (2 * k_per_dim)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return SampleBatch(n=n, points=pts, provenance={"kind": "grid", "k_per_dim": k_per_dim})


def uniform_random(m: int, n: int, seed: int) -> SampleBatch:
    if n < 1:
        raise SamplerConfigError("dimension must be >= 1")
    if m < 0:
        raise SamplerConfigError("m must be >= 0")
    rng = np.random.default_rng(seed)
    pts = rng.random((m, n))
    return SampleBatch(n=n, points=pts, provenance={"kind": "uniform", "m": m, "seed": seed})


def batch_to_csv(batch: SampleBatch) -> str:
    """One point per row, n columns, 17 significant digits."""
    lines = [",".join(f"{v:.17g}" for v in row) for row in batch.points]
    return "\n".join(lines) + ("\n" if lines else "")


def provenance_json(batch: SampleBatch) -> str:
    """Sidecar describing how to regenerate the batch exactly."""
    return json.dumps({"n": batch.n, "m": len(batch), **batch.provenance}, sort_keys=True)


def _axis_candidates(coords: np.ndarray, cap: int | None = None) -> np.ndarray:
    """Upper-corner candidates: each coordinate, just below it, and 1."""
    vals = np.unique(coords)
    below = np.nextafter(vals, -np.inf)
    cands = np.unique(np.clip(np.concatenate([vals, below, [1.0]]), 0.0, 1.0))
    if cap is not None and len(cands) > cap:
        idx = np.linspace(0, len(cands) - 1, cap).round().astype(int)
        cands = cands[np.unique(idx)]
    return cands


def discrepancy_estimate(batch: SampleBatch, effort: int = 2000) -> float:
    """Lower bound on sup over origin-anchored boxes of |#(X,B)/m - vol(B)|.

    Candidate upper corners are drawn from the sample coordinates (with a
    just-below perturbation so both open and closed boundaries are probed).
    For n <= 2 the candidate enumeration is exhaustive; higher dimensions
    cap the per-axis candidates and add ``effort`` random corners.
    """
    m = len(batch)
    if m == 0:
        raise SamplerConfigError("discrepancy of an empty batch is undefined")
    pts = batch.points
    n = batch.n
    if n == 1:
        x = np.sort(pts[:, 0])
        cands = _axis_candidates(x)
        counts = np.searchsorted(x, cands, side="right")
        return float(np.max(np.abs(counts / m - cands)))
    if n == 2:
        bx = _axis_candidates(pts[:, 0])
        by = _axis_candidates(pts[:, 1])
        inside_x = pts[:, 0][None, :] <= bx[:, None]  # (kx, m)
        inside_y = pts[:, 1][:, None] <= by[None, :]  # (m, ky)
        counts = inside_x.astype(np.float64) @ inside_y.astype(np.float64)
        vols = np.outer(bx, by)
        return float(np.max(np.abs(counts / m - vols)))
    # n >= 3: capped axis enumeration plus random corners
    best = 0.0
    cap = max(2, int(round((20000) ** (1.0 / n))))
    axes = [_axis_candidates(pts[:, j], cap=cap) for j in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    corners = np.stack([mm.reshape(-1) for mm in mesh], axis=1)
    if effort > 0:
        rng = np.random.default_rng(0xD15C)
        corners = np.vstack([corners, rng.random((effort, n))])
    for chunk_start in range(0, len(corners), 4096):
        chunk = corners[chunk_start : chunk_start + 4096]
        inside = np.all(pts[None, :, :] <= chunk[:, None, :], axis=2)
        counts = inside.sum(axis=1)
        vols = np.prod(chunk, axis=1)
        best = max(best, float(np.max(np.abs(counts / m - vols))))
    return best
