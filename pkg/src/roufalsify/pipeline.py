"""End-to-end falsification pipeline driven by a scenario.

Stage order: optimistic validity grid, pessimistic validity grid, region of
uncertainty, scene-space restriction, surrogate approximation of the
classifier, misclassification-region extraction, projection back to the
parameter space, targeted robustness-minimizing search.  Counterexamples
reported here are for the concrete model (the one with the real
classifier), never for an abstraction.

Grid evaluation parallelizes over contiguous cell chunks with an ordered
merge, so results are identical for any worker count.
"""

from __future__ import annotations

import datetime
import functools
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import aebs, analyzer, falsify
from .analyzer import ApproximationBudgetError
from .scenario import Scenario, load_scenario
from .stl import eval_qualitative, eval_robustness, parse
from .trace import Trace, trace_to_csv

REPORT_SCHEMA = "rou-falsify/1"


class StageError(RuntimeError):
    """A pipeline stage failed; partial artifacts are attached."""

    def __init__(self, stage: str, cause: Exception, partial_files: dict[str, str]):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial_files = partial_files


def _variant_ml(scenario: Scenario, variant: str) -> aebs.MLMode:
    if variant == "plus":
        return aebs.Perfect()
    if variant == "minus":
        return aebs.AlwaysWrong()
    if variant == "concrete":
        space = scenario.build_space()
        return aebs.Concrete(scenario.build_classifier(), analyzer.Concretizer(space))
    raise ValueError(f"unknown variant {variant!r}")


def _params_to_si(scenario: Scenario, params: dict[str, float]) -> tuple[float, float]:
    box = scenario.build_box()
    v_param, d_param = box.params[0], box.params[1]
    return params[v_param.name] * v_param.si_scale, params[d_param.name] * d_param.si_scale


@functools.lru_cache(maxsize=8)
def _cached_bundle(scenario_json: str, variant: str):
    scenario = load_scenario(scenario_json)
    model = aebs.make_variant(scenario.build_model(), _variant_ml(scenario, variant))
    formula = parse(scenario.formula)
    return scenario, model, formula


def _eval_chunk(payload: tuple[str, str, list[dict[str, float]]]) -> list[bool]:
    scenario_json, variant, centers = payload
    scenario, model, formula = _cached_bundle(scenario_json, variant)
    out = []
    for center in centers:
        v0_si, d0_si = _params_to_si(scenario, center)
        scene = scenario.build_scene()
        trace = aebs.simulate(model, v0_si, d0_si, scene)
        out.append(bool(eval_qualitative(formula, trace, 0.0)))
    return out


def resolve_jobs(jobs: int | None) -> int:
    if jobs is not None and jobs >= 1:
        return jobs
    env = os.environ.get("ROU_FALSIFY_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def validity_domain(scenario: Scenario, variant: str, jobs: int | None = None) -> falsify.ValidityGrid:
    """Per-cell satisfaction of the scenario formula under a model variant."""
    box = scenario.build_box()
    resolution = tuple(scenario.resolution)
    if any(r < 2 for r in resolution):
        raise ValueError("resolution must be >= 2 per dim")
    centers = falsify.grid_centers(box, resolution)
    jobs = resolve_jobs(jobs)
    scenario_json = scenario.canonical_json()
    if jobs == 1 or len(centers) < 64:
        flat = _eval_chunk((scenario_json, variant, centers))
    else:
        chunk_size = max(1, (len(centers) + jobs * 4 - 1) // (jobs * 4))
        chunks = [centers[i : i + chunk_size] for i in range(0, len(centers), chunk_size)]
        payloads = [(scenario_json, variant, chunk) for chunk in chunks]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(itertools.chain.from_iterable(pool.map(_eval_chunk, payloads)))
    status = np.array(flat, dtype=bool).reshape(resolution)
    return falsify.ValidityGrid(box=box, resolution=resolution, status=status,
                                variant=variant, formula=scenario.formula)


class ConcreteRunner:
    """Simulates the concrete model at explicit parameter/scene points."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.model = scenario.build_model()
        self.formula = parse(scenario.formula)
        space = scenario.build_space()
        self.handle = scenario.build_classifier()
        self.ml = aebs.Concrete(self.handle, analyzer.Concretizer(space))
        self.simulations = 0

    def run(self, params: dict[str, float], scene_point: np.ndarray) -> tuple[float, Trace]:
        v0_si, d0_si = _params_to_si(self.scenario, params)
        scene = self.scenario.build_scene(scene_point)
        trace = aebs.simulate(self.model, v0_si, d0_si, scene, ml=self.ml)
        self.simulations += 1
        rho = eval_robustness(self.formula, trace, 0.0)
        return rho, trace

    @property
    def classifier_queries(self) -> int:
        return self.ml.queries


@dataclass
class FalsificationReport:
    scenario: Scenario
    grid_plus: falsify.ValidityGrid
    grid_minus: falsify.ValidityGrid
    rou: falsify.RouMap
    analyzer_report: dict
    uml: list[analyzer.UmlRegion] = field(default_factory=list)
    counterexamples: list[falsify.Counterexample] = field(default_factory=list)
    disproved: list[falsify.Candidate] = field(default_factory=list)
    unsat_plus_raw: list[tuple[int, ...]] = field(default_factory=list)
    unsat_plus_confirmed: list[dict] = field(default_factory=list)
    budgets: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    targeted_incomplete: bool = False
    timestamp: str = ""

    def to_dict(self) -> dict:
        def celllist(cells):
            return [list(map(int, idx)) for idx in cells]

        return {
            "schema": REPORT_SCHEMA,
            "timestamp": self.timestamp,
            "seed": self.scenario.seed,
            "formula": self.scenario.formula,
            "scenario": self.scenario.model_dump(),
            "grids": {
                "plus": {"resolution": list(self.grid_plus.resolution),
                         "sat_cells": int(self.grid_plus.status.sum()),
                         "unsat_cells": int((~self.grid_plus.status).sum())},
                "minus": {"resolution": list(self.grid_minus.resolution),
                          "sat_cells": int(self.grid_minus.status.sum()),
                          "unsat_cells": int((~self.grid_minus.status).sum())},
            },
            "rou": {
                "cell_count": len(self.rou.cells()),
                "cells": celllist(self.rou.cells()),
            },
            "analyzer": self.analyzer_report,
            "uml": [
                {
                    "param_ranges": {k: list(v) for k, v in r.param_ranges.items()},
                    "scene_box": {k: list(v) for k, v in r.scene_box.items()},
                    "tag": r.tag,
                    "member_count": int(len(r.scene_points)),
                    "targeted_cells": len(r.param_cells),
                }
                for r in self.uml
            ],
            "counterexamples": [
                {"params": c.params, "scene": list(c.scene), "robustness": c.rho}
                for c in self.counterexamples
            ],
            "disproved": [
                {"params": c.params, "scene": list(c.scene), "robustness": c.rho}
                for c in self.disproved
            ],
            "unsat_plus": {
                "raw_count": len(self.unsat_plus_raw),
                "raw_cells": celllist(self.unsat_plus_raw),
                "confirmed_sample": self.unsat_plus_confirmed,
            },
            "targeted_incomplete": self.targeted_incomplete,
            "budgets": self.budgets,
            "notes": self.notes,
        }

    def artifact_files(self) -> dict[str, str]:
        files = {
            "report.json": json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            "grid_plus.csv": self.grid_plus.to_csv(),
            "grid_minus.csv": self.grid_minus.to_csv(),
            "rou.csv": self.rou.to_csv(),
        }
        for i, cex in enumerate(self.counterexamples):
            files[f"cex_{i:03d}.csv"] = trace_to_csv(cex.trace)
        return files


def _analyzer_report(scenario: Scenario, result: analyzer.ApproximationResult | None,
                     samples: np.ndarray | None, labels: np.ndarray | None,
                     mis: np.ndarray | None, regions: list[analyzer.Region],
                     skipped: str | None, budget_exhausted: bool) -> dict:
    if skipped is not None:
        return {"skipped": True, "reason": skipped}
    truth = scenario.truth_fn()
    return {
        "skipped": False,
        "sampler": scenario.analyzer.sampler,
        "epsilon": scenario.analyzer.epsilon,
        "error": result.error,
        "iterations": result.iterations,
        "classifier_queries": result.classifier_queries,
        "budget_exhausted": budget_exhausted,
        "sample_count": int(len(samples)),
        "misclassified_count": int(len(mis)),
        "truth": scenario.analyzer.truth,
        "samples": [
            {"point": [float(v) for v in pt], "label": int(lab), "truth": int(truth(pt))}
            for pt, lab in zip(samples, labels)
        ],
        "regions": [
            {"lo": [float(v) for v in r.lo], "hi": [float(v) for v in r.hi],
             "tag": r.tag, "member_count": int(len(r.members))}
            for r in regions
        ],
    }


def analyze_ml(scenario: Scenario) -> tuple[dict, str]:
    """Standalone scene-space analysis over the full abstract space.

    Returns the analyzer report and a CSV dump of the labeled samples
    (one row per sample: abstract coordinates, sampled label, truth label).
    """
    space = scenario.build_space()
    gamma = analyzer.Concretizer(space)
    handle = scenario.build_classifier()
    budget_exhausted = False
    try:
        result = analyzer.approximate(
            space, gamma, handle,
            epsilon=scenario.analyzer.epsilon,
            sampler=scenario.analyzer.sampler,
            batch=scenario.analyzer.batch,
            max_iters=scenario.analyzer.max_iters,
            seed=scenario.seed,
        )
    except ApproximationBudgetError as exc:
        result = exc.best
        budget_exhausted = True
    truth = scenario.truth_fn()
    mis = analyzer.misclassified(result.classifier.labeled_set(), truth)
    regions = analyzer.extract_regions(mis, link_radius=scenario.analyzer.link_radius)
    report = _analyzer_report(scenario, result, result.classifier.points,
                              result.classifier.labels, mis, regions, None, budget_exhausted)
    header = ",".join(d.name for d in space.dims) + ",label,truth\n"
    rows = []
    for pt, label in zip(result.classifier.points, result.classifier.labels):
        coords = ",".join(f"{v:.17g}" for v in pt)
        rows.append(f"{coords},{int(label)},{int(truth(pt))}\n")
    return report, header + "".join(rows)


def _attach_cells_by_surrogate(uml: list[analyzer.UmlRegion], rou: falsify.RouMap,
                               scenario: Scenario,
                               surrogate: analyzer.ApproxClassifier) -> list[analyzer.UmlRegion]:
    """Also target cells where the surrogate predicts a misclassification.

    A region's bound-dim extent can be degenerate when it holds few samples;
    the surrogate generalizes it: a cell is targeted when the approximation
    mislabels the scene assembled from the region center and the cell's own
    slaved distance.  Cells attached by interval overlap are kept.
    """
    slaved = scenario.distance_dim_index()
    truth_label = scenario.analyzer.truth
    if slaved is None:
        return uml
    space = scenario.build_space()
    dim = space.dims[slaved]
    gap_param = scenario.params[1].name
    out = []
    for region in uml:
        cells = list(region.param_cells)
        seen = {tuple(sorted((k, v) for k, v in c.items())) for c in cells}
        for cell in rou.cell_ranges():
            key = tuple(sorted((k, v) for k, v in cell.items()))
            if key in seen or gap_param not in cell:
                continue
            center = 0.5 * (cell[gap_param][0] + cell[gap_param][1])
            probe = np.array(region.scene_center, dtype=float)
            probe[slaved] = min(max(dim.to_normalized(center), 0.0), 1.0)
            if surrogate.predict(probe) != truth_label:
                cells.append(cell)
                seen.add(key)
        out.append(analyzer.UmlRegion(
            param_ranges=region.param_ranges, scene_box=region.scene_box,
            scene_dim_indices=region.scene_dim_indices, scene_points=region.scene_points,
            scene_center=region.scene_center, tag=region.tag, param_cells=tuple(cells)))
    return out


def comp_falsify(scenario: Scenario, jobs: int | None = None) -> FalsificationReport:
    """Run the whole compositional pipeline and collect every artifact."""
    stage = "validity-domain-plus"
    partial: dict[str, str] = {}
    try:
        grid_plus = validity_domain(scenario, "plus", jobs=jobs)
        partial["grid_plus.csv"] = grid_plus.to_csv()
        stage = "validity-domain-minus"
        grid_minus = validity_domain(scenario, "minus", jobs=jobs)
        partial["grid_minus.csv"] = grid_minus.to_csv()
        stage = "region-of-uncertainty"
        rou = falsify.region_of_uncertainty(grid_plus, grid_minus)
        partial["rou.csv"] = rou.to_csv()

        report = FalsificationReport(
            scenario=scenario, grid_plus=grid_plus, grid_minus=grid_minus, rou=rou,
            analyzer_report={}, timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )

        grid_sims = 2 * int(np.prod(grid_plus.resolution))
        runner = ConcreteRunner(scenario)

        if rou.is_empty():
            report.analyzer_report = _analyzer_report(
                scenario, None, None, None, None, [], "empty region of uncertainty", False)
            report.notes.append("region of uncertainty is empty; ML analysis skipped")
            targeted = falsify.TargetedResult(counterexamples=[], disproved=[], evaluations=0)
        else:
            stage = "ml-analysis"
            space = scenario.build_space()
            restricted = analyzer.restrict_to_rou(space, rou.cell_ranges(), scenario.binding)
            gamma = analyzer.Concretizer(restricted)
            budget_exhausted = False
            try:
                result = analyzer.approximate(
                    restricted, gamma, runner.handle,
                    epsilon=scenario.analyzer.epsilon,
                    sampler=scenario.analyzer.sampler,
                    batch=scenario.analyzer.batch,
                    max_iters=scenario.analyzer.max_iters,
                    seed=scenario.seed,
                )
            except ApproximationBudgetError as exc:
                result = exc.best
                budget_exhausted = True
                report.notes.append(
                    f"approximation budget exhausted; continuing with best error {result.error:.4f}")
            samples = result.classifier.points
            labels = result.classifier.labels
            truth = scenario.truth_fn()
            mis = analyzer.misclassified(result.classifier.labeled_set(), truth)
            regions = analyzer.extract_regions(mis, link_radius=scenario.analyzer.link_radius)
            report.analyzer_report = _analyzer_report(
                scenario, result, samples, labels, mis, regions, None, budget_exhausted)
            stage = "projection"
            report.uml = analyzer.project_to_cps(regions, scenario.binding, restricted,
                                                 rou_cells=rou.cell_ranges())
            report.uml = _attach_cells_by_surrogate(report.uml, rou, scenario,
                                                    result.classifier)
            stage = "targeted-falsification"
            if report.uml:
                targeted = falsify.falsify_targeted(runner.run, report.uml, scenario.budget)
            else:
                targeted = falsify.TargetedResult(counterexamples=[], disproved=[], evaluations=0)
                report.notes.append("no misclassification regions; targeted search skipped")

        report.counterexamples = targeted.counterexamples
        report.disproved = targeted.disproved
        report.targeted_incomplete = targeted.incomplete

        stage = "confirm-unsat-plus"
        report.unsat_plus_raw = grid_plus.unsat_cells()
        for idx in report.unsat_plus_raw[:20]:
            center = grid_plus.cell_center(idx)
            rho, _tr = runner.run(center, scenario.build_scene().point)
            report.unsat_plus_confirmed.append(
                {"cell": list(map(int, idx)), "params": center, "robustness": rho,
                 "confirmed": bool(rho < 0)})

        analyze_queries = 0
        if not report.analyzer_report.get("skipped", True):
            analyze_queries = report.analyzer_report.get("classifier_queries", 0)
        report.budgets = {
            "grid_simulations": grid_sims,
            "targeted_evaluations": targeted.evaluations,
            "confirm_simulations": min(20, len(report.unsat_plus_raw)),
            "classifier_queries": runner.classifier_queries + analyze_queries,
            "budget": scenario.budget,
        }
        return report
    except Exception as exc:
        if isinstance(exc, StageError):
            raise
        raise StageError(stage, exc, partial) from exc
