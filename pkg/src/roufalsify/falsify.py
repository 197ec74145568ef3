"""Validity domains, region of uncertainty and targeted counterexample search.

A validity grid partitions the simulation parameter box into cells and
records per-cell satisfaction of the specification, evaluated at cell
centers.  The region of uncertainty is the set difference between the
optimistic and pessimistic grids: cells where perception errors are the
only thing that can break the property.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .aebs import MPH_TO_MS
from .trace import Trace

_UNIT_SCALES = {"mph": MPH_TO_MS, "m": 1.0, "m/s": 1.0, "": 1.0}


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    name: str
    lo: float
    hi: float
    unit: str = ""

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"param {self.name!r}: need lo < hi")
        if self.unit not in _UNIT_SCALES:
            raise ValueError(f"param {self.name!r}: unknown unit {self.unit!r}")

    @property
    def si_scale(self) -> float:
        return _UNIT_SCALES[self.unit]


@dataclass(frozen=True)
class ParamBox:
    params: tuple[Param, ...]

    def __post_init__(self):
        names = [p.name for p in self.params]
        if not names or len(set(names)) != len(names):
            raise ValueError("param names must be nonempty and unique")

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class ValidityGrid:
    box: ParamBox
    resolution: tuple[int, ...]
    status: np.ndarray  # bool, shape == resolution; True means satisfied
    variant: str  # "plus" | "minus" | "concrete"
    formula: str

    def __post_init__(self):
        status = np.asarray(self.status, dtype=bool)
        if status.shape != tuple(self.resolution):
            raise ValueError(f"status shape {status.shape} != resolution {self.resolution}")
        if len(self.resolution) != len(self.box.params):
            raise ValueError("resolution must have one entry per param")
        status.flags.writeable = False
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "resolution", tuple(int(r) for r in self.resolution))

    def axis_centers(self, i: int) -> np.ndarray:
        p = self.box.params[i]
        r = self.resolution[i]
        return p.lo + (np.arange(r) + 0.5) * (p.hi - p.lo) / r

    def cell_center(self, idx: tuple[int, ...]) -> dict[str, float]:
        return {p.name: float(self.axis_centers(i)[idx[i]]) for i, p in enumerate(self.box.params)}

    def cell_ranges(self, idx: tuple[int, ...]) -> dict[str, tuple[float, float]]:
        out = {}
        for i, p in enumerate(self.box.params):
            width = (p.hi - p.lo) / self.resolution[i]
            out[p.name] = (p.lo + idx[i] * width, p.lo + (idx[i] + 1) * width)
        return out

    def indices(self):
        return itertools.product(*(range(r) for r in self.resolution))

    def sat_cells(self) -> list[tuple[int, ...]]:
        return [idx for idx in self.indices() if self.status[idx]]

    def unsat_cells(self) -> list[tuple[int, ...]]:
        return [idx for idx in self.indices() if not self.status[idx]]

    def to_csv(self) -> str:
        if len(self.resolution) != 2:
            raise ValueError("CSV export is defined for 2-D grids")
        out = io.StringIO()
        for i in range(self.resolution[0]):
            out.write(",".join(str(int(v)) for v in self.status[i]) + "\n")
        return out.getvalue()


def grid_centers(box: ParamBox, resolution: tuple[int, ...]) -> list[dict[str, float]]:
    axes = []
    for i, p in enumerate(box.params):
        r = resolution[i]
        axes.append(p.lo + (np.arange(r) + 0.5) * (p.hi - p.lo) / r)
    return [
        {p.name: float(axes[i][idx[i]]) for i, p in enumerate(box.params)}
        for idx in itertools.product(*(range(r) for r in resolution))
    ]


def validity_domain_from_fn(evaluate: Callable[[dict[str, float]], bool], box: ParamBox,
                            resolution: tuple[int, ...], variant: str,
                            formula: str) -> ValidityGrid:
    """Evaluate satisfaction at every cell center; ``evaluate`` gets native units."""
    if any(r < 2 for r in resolution):
        raise ValueError("resolution must be >= 2 per dim")
    status = np.empty(tuple(resolution), dtype=bool)
    for idx in itertools.product(*(range(r) for r in resolution)):
        center = {}
        for i, p in enumerate(box.params):
            center[p.name] = p.lo + (idx[i] + 0.5) * (p.hi - p.lo) / resolution[i]
        status[idx] = evaluate(center)
    return ValidityGrid(box=box, resolution=tuple(resolution), status=status,
                        variant=variant, formula=formula)


@dataclass(frozen=True)
class RouMap:
    box: ParamBox
    resolution: tuple[int, ...]
    mask: np.ndarray  # True where M+ satisfies and M- violates
    formula: str

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    def cells(self) -> list[tuple[int, ...]]:
        return [idx for idx in itertools.product(*(range(r) for r in self.resolution))
                if self.mask[idx]]

    def cell_ranges(self) -> list[dict[str, tuple[float, float]]]:
        helper = ValidityGrid(box=self.box, resolution=self.resolution,
                              status=self.mask, variant="plus", formula=self.formula)
        return [helper.cell_ranges(idx) for idx in self.cells()]

    def cell_centers(self) -> list[dict[str, float]]:
        helper = ValidityGrid(box=self.box, resolution=self.resolution,
                              status=self.mask, variant="plus", formula=self.formula)
        return [helper.cell_center(idx) for idx in self.cells()]

    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    def to_csv(self) -> str:
        if len(self.resolution) != 2:
            raise ValueError("CSV export is defined for 2-D grids")
        out = io.StringIO()
        for i in range(self.resolution[0]):
            out.write(",".join(str(int(v)) for v in self.mask[i]) + "\n")
        return out.getvalue()


def region_of_uncertainty(grid_plus: ValidityGrid, grid_minus: ValidityGrid) -> RouMap:
    """Cells satisfied under the optimistic abstraction but not the pessimistic one."""
    if grid_plus.box != grid_minus.box or grid_plus.resolution != grid_minus.resolution \
            or grid_plus.formula != grid_minus.formula:
        raise GridMismatchError("grids differ in box, resolution or formula")
    mask = grid_plus.status & ~grid_minus.status
    return RouMap(box=grid_plus.box, resolution=grid_plus.resolution, mask=mask,
                  formula=grid_plus.formula)


@dataclass(frozen=True)
class Candidate:
    params: dict[str, float]  # native units
    scene: tuple[float, ...]  # abstract scene point
    rho: float
    trace: Trace | None = None


@dataclass(frozen=True)
class Counterexample:
    params: dict[str, float]
    scene: tuple[float, ...]
    rho: float
    trace: Trace


@dataclass
class TargetedResult:
    counterexamples: list[Counterexample]
    disproved: list[Candidate]
    evaluations: int
    incomplete: bool = False


def falsify_targeted(evaluate: Callable[[dict[str, float], np.ndarray], tuple[float, Trace]],
                     uml_regions: list, budget: int,
                     descent_seeds: int = 5, descent_rounds: int = 3) -> TargetedResult:
    """Robustness-minimizing search over the projected misclassification set.

    Phase 1 evaluates the cross product of each region's targeted grid cells
    with its scene representatives (box center plus member points).  Phase 2
    refines the lowest-robustness seeds by per-coordinate step-halving
    descent inside the cell and region bounds.  ``evaluate`` maps native
    parameter values and an abstract scene point to (robustness, trace).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    evals = 0
    seen: list[tuple[Candidate, dict]] = []
    incomplete = False

    def run(params: dict[str, float], scene_pt: np.ndarray, bounds: dict) -> Candidate | None:
        nonlocal evals
        if evals >= budget:
            return None
        evals += 1
        rho, trace = evaluate(params, scene_pt)
        cand = Candidate(params=dict(params), scene=tuple(float(v) for v in scene_pt),
                         rho=rho, trace=trace)
        seen.append((cand, bounds))
        return cand

    # phase 1: targeted cell centers x scene representatives
    for region in uml_regions:
        reps = [np.asarray(region.scene_center, dtype=float)]
        reps.extend(np.asarray(p, dtype=float) for p in region.scene_points)
        for cell in region.param_cells:
            center = {name: 0.5 * (lo + hi) for name, (lo, hi) in cell.items()}
            for rep in reps:
                if run(center, rep, {"cell": cell, "region": region}) is None:
                    incomplete = True
                    break
            if incomplete:
                break
        if incomplete:
            break

    # phase 2: coordinate descent from the lowest-robustness seeds
    if not incomplete:
        order = sorted(range(len(seen)), key=lambda i: (seen[i][0].rho, i))
        for i in order[:descent_seeds]:
            cand, bounds = seen[i]
            cell = bounds["cell"]
            region = bounds["region"]
            # bound every free coordinate: params inside the cell, unbound
            # scene dims inside the region box
            coord_bounds: list[tuple[str, int | str, float, float]] = []
            for name, (lo, hi) in cell.items():
                coord_bounds.append(("param", name, lo, hi))
            for dim_name, j in region.scene_dim_indices.items():
                lo, hi = region.scene_box[dim_name]
                coord_bounds.append(("scene", j, lo, hi))
            best = cand
            steps = [(b[3] - b[2]) / 4.0 for b in coord_bounds]
            for _ in range(descent_rounds):
                for ci, (kind, key, lo, hi) in enumerate(coord_bounds):
                    for delta in (-steps[ci], steps[ci]):
                        trial_params = dict(best.params)
                        trial_scene = np.array(best.scene, dtype=float)
                        if kind == "param":
                            trial_params[key] = min(max(best.params[key] + delta, lo), hi)
                        else:
                            trial_scene[key] = min(max(trial_scene[key] + delta, lo), hi)
                        trial = run(trial_params, trial_scene, bounds)
                        if trial is None:
                            break
                        if trial.rho < best.rho:
                            best = trial
                    if evals >= budget:
                        break
                steps = [s / 2.0 for s in steps]
                if evals >= budget:
                    break

    counterexamples = []
    disproved = []
    for cand, _ in seen:
        if cand.rho < 0:
            counterexamples.append(Counterexample(params=cand.params, scene=cand.scene,
                                                  rho=cand.rho, trace=cand.trace))
        elif cand.rho > 0:
            disproved.append(Candidate(params=cand.params, scene=cand.scene, rho=cand.rho))
    return TargetedResult(counterexamples=counterexamples, disproved=disproved,
                          evaluations=evals, incomplete=incomplete)
