"""Abstract feature-space analysis of a classifier.

The abstract space is a unit hypercube whose axes carry semantic meaning
(scene parameters such as lateral position, obstacle distance, brightness).
A surrogate classifier is grown from labeled low-discrepancy samples until
its error on fresh uniform test sets drops below a threshold; samples the
real classifier got wrong (relative to the scenario ground truth) are
clustered into misclassification regions, which are projected back to the
simulation parameter space for the targeted falsification phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sampling
from .classifier import ClassifierHandle, LabeledSet, TransportError


class AnalyzerConfigError(ValueError):
    pass


class EmptyRouError(ValueError):
    """The region of uncertainty is empty; there is nothing to analyze."""


class ApproximationBudgetError(RuntimeError):
    """The approximation loop ran out of iterations before reaching epsilon.

    Carries the best surrogate seen so far and the last measured error, so
    callers may keep going with a degraded approximation if they choose to.
    """

    def __init__(self, best: "ApproximationResult", last_error: float):
        super().__init__(
            f"approximation budget exhausted (best error {best.error:.4f}, last {last_error:.4f})"
        )
        self.best = best
        self.last_error = last_error


@dataclass(frozen=True)
class Dim:
    name: str
    lo: float
    hi: float
    unit: str = ""

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise AnalyzerConfigError(f"dim {self.name!r}: need lo < hi")

    def to_semantic(self, a: float) -> float:
        return self.lo + a * (self.hi - self.lo)

    def to_normalized(self, value: float) -> float:
        return (value - self.lo) / (self.hi - self.lo)


@dataclass(frozen=True)
class AbstractSpace:
    dims: tuple[Dim, ...]
    box: tuple[tuple[float, float], ...] = ()  # normalized bounds per dim

    def __post_init__(self):
        if not self.dims:
            raise AnalyzerConfigError("abstract space needs at least one dim")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise AnalyzerConfigError("duplicate dim names")
        box = self.box or tuple((0.0, 1.0) for _ in self.dims)
        if len(box) != len(self.dims):
            raise AnalyzerConfigError("box must have one (lo, hi) per dim")
        for lo, hi in box:
            if not (0.0 <= lo < hi <= 1.0):
                raise AnalyzerConfigError(f"normalized bounds ({lo}, {hi}) must nest in [0, 1]")
        object.__setattr__(self, "box", box)

    @property
    def n(self) -> int:
        return len(self.dims)

    def index_of(self, name: str) -> int:
        for i, d in enumerate(self.dims):
            if d.name == name:
                return i
        raise KeyError(name)

    def from_unit(self, unit_points: np.ndarray) -> np.ndarray:
        """Map raw sampler output in [0,1]^n into this space's normalized box."""
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + np.asarray(unit_points, dtype=float) * (hi - lo)

    def restrict(self, bounds: dict[str, tuple[float, float]]) -> "AbstractSpace":
        new_box = list(self.box)
        for name, (lo, hi) in bounds.items():
            i = self.index_of(name)
            cur_lo, cur_hi = new_box[i]
            new_lo = max(cur_lo, lo)
            new_hi = min(cur_hi, hi)
            if not (new_lo < new_hi):
                raise AnalyzerConfigError(f"restriction of dim {name!r} to ({lo}, {hi}) is empty")
            new_box[i] = (new_lo, new_hi)
        return AbstractSpace(dims=self.dims, box=tuple(new_box))

    def to_semantic(self, point: np.ndarray) -> np.ndarray:
        return np.array([d.to_semantic(a) for d, a in zip(self.dims, point)])


class Concretizer:
    """Maps abstract points to classifier feature vectors.

    For this toolkit the feature space is the normalized scene-parameter
    vector itself, so concretization is the identity; it is kept explicit as
    the seam where a renderer-backed generator would plug in.  The map is
    injective by construction.
    """

    def __init__(self, space: AbstractSpace):
        self.space = space
        self.arity = space.n

    def concretize(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (self.arity,):
            raise AnalyzerConfigError(f"abstract point has shape {a.shape}, expected ({self.arity},)")
        return a.copy()


@dataclass
class ApproxClassifier:
    """1-nearest-neighbor surrogate; ties go to the lowest sample index."""

    points: np.ndarray  # (k, n)
    labels: np.ndarray  # (k,)

    def predict(self, a: np.ndarray) -> int:
        d = np.linalg.norm(self.points - np.asarray(a, dtype=float), axis=1)
        return int(self.labels[int(np.argmin(d))])

    def predict_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = np.empty(len(pts), dtype=int)
        chunk = max(1, int(2e6 // max(len(self.points), 1)))
        for s in range(0, len(pts), chunk):
            block = pts[s : s + chunk]
            d = np.linalg.norm(block[:, None, :] - self.points[None, :, :], axis=2)
            out[s : s + chunk] = self.labels[np.argmin(d, axis=1)]
        return out

    def labeled_set(self) -> LabeledSet:
        return LabeledSet(points=self.points, labels=self.labels)


@dataclass(frozen=True)
class ApproximationResult:
    classifier: ApproxClassifier
    error: float  # error on the last fresh test set
    iterations: int
    classifier_queries: int


class _SamplerSequence:
    """Deterministic point sequence supporting incremental batch draws.

    Halton extends naturally; a lattice of size batch*max_iters and a grid
    with k**n >= batch*max_iters are precomputed and sliced, so the sample
    set grows monotonically for every sampler kind.
    """

    def __init__(self, kind: str, n: int, batch: int, max_iters: int):
        self.kind = kind
        self.n = n
        self._offset = 0
        total = batch * max_iters
        if kind == "halton":
            self._pool = None
        elif kind == "lattice":
            self._pool = sampling.lattice(total, n).points
        elif kind == "grid":
            k = max(2, math.ceil(total ** (1.0 / n)))
            self._pool = sampling.grid(k, n).points
        else:
            raise AnalyzerConfigError(f"unknown sampler {kind!r}")

    def take(self, count: int) -> np.ndarray:
        if self.kind == "halton":
            pts = sampling.halton(count, self.n, start_index=self._offset + 1).points
        else:
            if self._offset + count > len(self._pool):
                raise AnalyzerConfigError("sampler pool exhausted")
            pts = self._pool[self._offset : self._offset + count]
        self._offset += count
        return pts


def sample_and_label(space: AbstractSpace, gamma: Concretizer, handle: ClassifierHandle,
                     batch: sampling.SampleBatch) -> LabeledSet:
    """Label each abstract point of a raw sampler batch with f(gamma(a))."""
    if batch.n != space.n:
        raise AnalyzerConfigError(f"batch dimension {batch.n} != space dimension {space.n}")
    pts = space.from_unit(batch.points)
    labels = _label_points(gamma, handle, pts)
    return LabeledSet(points=pts, labels=labels)


def _label_points(gamma: Concretizer, handle: ClassifierHandle, pts: np.ndarray) -> np.ndarray:
    labels = np.empty(len(pts), dtype=int)
    for i, a in enumerate(pts):
        try:
            labels[i] = handle.classify(gamma.concretize(a)).label
        except TransportError as exc:
            raise TransportError(str(exc), item_index=i) from exc
    return labels


def approximate(space: AbstractSpace, gamma: Concretizer, handle: ClassifierHandle,
                epsilon: float, sampler: str = "halton", batch: int = 64,
                max_iters: int = 10, seed: int = 0) -> ApproximationResult:
    """Grow a labeled sample set until the surrogate error drops to epsilon.

    Each iteration extends the interpolation set with the next ``batch``
    sampler points labeled by the real classifier, rebuilds the 1-NN
    surrogate, and measures its error on a fresh uniform-random test set of
    size max(100, |T_I|/4).  Termination is not guaranteed; when
    ``max_iters`` is exhausted an ApproximationBudgetError carrying the best
    surrogate is raised.
    """
    if not (0.0 <= epsilon <= 1.0):
        raise AnalyzerConfigError("epsilon must be in [0, 1]")
    if batch < 1 or max_iters < 1:
        raise AnalyzerConfigError("batch and max_iters must be >= 1")
    seq = _SamplerSequence(sampler, space.n, batch, max_iters)
    rng = np.random.default_rng(seed)
    pts = np.empty((0, space.n))
    labels = np.empty(0, dtype=int)
    queries = 0
    best: ApproximationResult | None = None
    err = 1.0
    for it in range(1, max_iters + 1):
        new_pts = space.from_unit(seq.take(batch))
        new_labels = _label_points(gamma, handle, new_pts)
        queries += len(new_pts)
        pts = np.vstack([pts, new_pts])
        labels = np.concatenate([labels, new_labels])
        surrogate = ApproxClassifier(points=pts, labels=labels)
        te_size = max(100, len(pts) // 4)
        te_pts = space.from_unit(rng.random((te_size, space.n)))
        te_labels = _label_points(gamma, handle, te_pts)
        queries += te_size
        err = float(np.mean(surrogate.predict_batch(te_pts) != te_labels))
        result = ApproximationResult(classifier=surrogate, error=err, iterations=it,
                                     classifier_queries=queries)
        if best is None or err < best.error:
            best = result
        if err <= epsilon:
            return result
    raise ApproximationBudgetError(best=best, last_error=err)


def misclassified(samples: LabeledSet, truth) -> np.ndarray:
    """Points whose sampled label disagrees with the ground-truth rule."""
    bad = [samples.points[i] for i in range(len(samples))
           if samples.labels[i] != int(truth(samples.points[i]))]
    if not bad:
        return np.empty((0, samples.points.shape[1]))
    return np.array(bad)


@dataclass(frozen=True)
class Region:
    lo: np.ndarray
    hi: np.ndarray
    members: np.ndarray  # (k, n)
    tag: str  # "cluster" | "corner-case"


def extract_regions(points: np.ndarray, link_radius: float = 0.1) -> list[Region]:
    """Single-linkage clusters of misclassified points and their padded boxes.

    Points within ``link_radius`` (Euclidean) are linked; each cluster's
    axis-aligned bounding box is padded by half the average nearest-neighbor
    spacing and clamped to the unit cube.  Singleton clusters are tagged as
    corner cases.
    """
    if link_radius <= 0:
        raise AnalyzerConfigError("link_radius must be positive")
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return []
    m = len(points)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    if m > 1:
        diffs = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
        for i in range(m):
            for j in range(i + 1, m):
                if diffs[i, j] <= link_radius:
                    union(i, j)
        np.fill_diagonal(diffs, np.inf)
        pad = 0.5 * float(np.mean(diffs.min(axis=1)))
    else:
        pad = 0.0

    clusters: dict[int, list[int]] = {}
    for i in range(m):
        clusters.setdefault(find(i), []).append(i)
    regions = []
    for root in sorted(clusters):
        idx = clusters[root]
        members = points[idx]
        lo = np.clip(members.min(axis=0) - pad, 0.0, 1.0)
        hi = np.clip(members.max(axis=0) + pad, 0.0, 1.0)
        tag = "corner-case" if len(idx) == 1 else "cluster"
        regions.append(Region(lo=lo, hi=hi, members=members, tag=tag))
    return regions


def restrict_to_rou(space: AbstractSpace, rou_cells: list[dict[str, tuple[float, float]]],
                    binding: dict[str, str]) -> AbstractSpace:
    """Restrict bound dims to the interval hull of the ROU's projection.

    ``binding`` maps abstract dim names to simulation parameter names; dims
    without a binding are untouched.  An empty ROU raises EmptyRouError so
    the caller can skip the ML analysis stage.
    """
    if not rou_cells:
        raise EmptyRouError("region of uncertainty is empty")
    space_out = space
    for dim_name, param_name in binding.items():
        dim = space.dims[space.index_of(dim_name)]
        los = [cell[param_name][0] for cell in rou_cells if param_name in cell]
        his = [cell[param_name][1] for cell in rou_cells if param_name in cell]
        if not los:
            continue
        nlo = max(0.0, dim.to_normalized(min(los)))
        nhi = min(1.0, dim.to_normalized(max(his)))
        if nlo <= 0.0 and nhi >= 1.0:
            continue
        space_out = space_out.restrict({dim_name: (nlo, nhi)})
    return space_out


@dataclass(frozen=True)
class UmlRegion:
    """One misclassification region projected onto the simulation input space."""

    param_ranges: dict[str, tuple[float, float]]  # bound params, semantic units
    scene_box: dict[str, tuple[float, float]]  # unbound dims, normalized
    scene_dim_indices: dict[str, int]  # unbound dim name -> scene vector index
    scene_points: np.ndarray  # member abstract points, full vectors
    scene_center: np.ndarray  # region box center, full vector
    tag: str
    param_cells: tuple = ()  # simulation grid cells targeted by this region


def project_to_cps(regions: list[Region], binding: dict[str, str], space: AbstractSpace,
                   rou_cells: list[dict[str, tuple[float, float]]] | None = None) -> list[UmlRegion]:
    """De-normalize bound dims of each region into parameter sub-ranges.

    When ``rou_cells`` is provided, the cells whose bound-parameter centers
    fall inside a region's ranges are attached as that region's targets.
    """
    out = []
    for region in regions:
        param_ranges = {}
        scene_box = {}
        scene_dim_indices = {}
        for i, dim in enumerate(space.dims):
            if dim.name in binding:
                param_ranges[binding[dim.name]] = (
                    dim.to_semantic(float(region.lo[i])),
                    dim.to_semantic(float(region.hi[i])),
                )
            else:
                scene_box[dim.name] = (float(region.lo[i]), float(region.hi[i]))
                scene_dim_indices[dim.name] = i
        cells: list = []
        if rou_cells:
            for cell in rou_cells:
                ok = True
                for pname, (plo, phi) in param_ranges.items():
                    if pname in cell:
                        clo, chi = cell[pname]
                        if phi < clo or plo > chi:  # no interval overlap
                            ok = False
                            break
                if ok:
                    cells.append(cell)
        out.append(UmlRegion(
            param_ranges=param_ranges,
            scene_box=scene_box,
            scene_dim_indices=scene_dim_indices,
            scene_points=region.members,
            scene_center=0.5 * (region.lo + region.hi),
            tag=region.tag,
            param_cells=tuple(cells),
        ))
    return out
