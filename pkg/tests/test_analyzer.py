import numpy as np
import pytest

from roufalsify.analyzer import (
    AbstractSpace,
    AnalyzerConfigError,
    ApproximationBudgetError,
    ApproxClassifier,
    Concretizer,
    Dim,
    EmptyRouError,
    approximate,
    extract_regions,
    misclassified,
    project_to_cps,
    restrict_to_rou,
    sample_and_label,
)
from roufalsify.classifier import Box, SyntheticClassifier
from roufalsify.sampling import grid, uniform_random

from oracles import linkage_clusters

SPACE3 = AbstractSpace(dims=(
    Dim("x_pos", 0.0, 1.0),
    Dim("distance", 0.0, 60.0, "m"),
    Dim("brightness", 0.0, 1.0),
))

PLANTED = Box(lo=(0.4, 0.0, 0.15), hi=(0.5, 1.0, 0.25))


def planted_classifier():
    return SyntheticClassifier(arity=3, base_label=1, boxes=[PLANTED])


def test_constant_classifier_converges_immediately():
    clf = SyntheticClassifier(arity=3, base_label=1)
    result = approximate(SPACE3, Concretizer(SPACE3), clf, epsilon=0.1, batch=32, seed=0)
    assert result.iterations == 1
    assert result.error == 0.0


def test_planted_box_error_below_epsilon():
    # box volume 0.05
    clf = SyntheticClassifier(arity=3, base_label=1,
                              boxes=[Box((0.3, 0.2, 0.3), (0.8, 0.7, 0.5))])
    result = approximate(SPACE3, Concretizer(SPACE3), clf, epsilon=0.1,
                         sampler="halton", batch=64, max_iters=10, seed=0)
    assert result.error <= 0.1
    # re-measure on a fresh 10k Monte Carlo set
    probe = uniform_random(10_000, 3, seed=123456).points
    truth = np.array([clf.classify(p).label for p in probe])
    pred = result.classifier.predict_batch(probe)
    assert float(np.mean(pred != truth)) <= 0.1


def test_zero_epsilon_exhausts_budget():
    clf = SyntheticClassifier(arity=3, base_label=1,
                              boxes=[Box((0.3, 0.2, 0.3), (0.8, 0.7, 0.5))])
    with pytest.raises(ApproximationBudgetError) as info:
        approximate(SPACE3, Concretizer(SPACE3), clf, epsilon=0.0,
                    batch=32, max_iters=2, seed=1)
    assert info.value.best.error > 0.0
    assert info.value.best.classifier.points.shape[1] == 3


def test_surrogate_interpolates_its_samples():
    clf = planted_classifier()
    result = approximate(SPACE3, Concretizer(SPACE3), clf, epsilon=0.2, batch=64, seed=3)
    surrogate = result.classifier
    pred = surrogate.predict_batch(surrogate.points)
    assert np.array_equal(pred, surrogate.labels)


def test_nn_tie_breaks_to_lowest_index():
    surrogate = ApproxClassifier(points=np.array([[0.0, 0.0], [1.0, 0.0]]),
                                 labels=np.array([1, 0]))
    assert surrogate.predict(np.array([0.5, 0.0])) == 1


def test_sample_and_label_empty_batch():
    batch = uniform_random(0, 3, seed=0)
    out = sample_and_label(SPACE3, Concretizer(SPACE3), planted_classifier(), batch)
    assert len(out) == 0


def test_sample_and_label_constant():
    clf = SyntheticClassifier(arity=3, base_label=1)
    out = sample_and_label(SPACE3, Concretizer(SPACE3), clf, uniform_random(20, 3, seed=4))
    assert set(out.labels) == {1}


def test_sample_and_label_grid_membership_count():
    batch = grid(10, 3)
    out = sample_and_label(SPACE3, Concretizer(SPACE3), planted_classifier(), batch)
    inside = [
        p for p in batch.points
        if 0.4 <= p[0] < 0.5 and 0.15 <= p[2] < 0.25
    ]
    assert len(inside) == 10  # one x slab, one brightness slab, full distance axis
    assert int(np.sum(out.labels == 0)) == len(inside)


def test_misclassified_against_constant_truth():
    clf = planted_classifier()
    out = sample_and_label(SPACE3, Concretizer(SPACE3), clf, grid(6, 3))
    bad = misclassified(out, lambda a: 1)
    # exactly the in-box points
    for p in bad:
        assert PLANTED.contains(p)
    assert len(bad) == sum(1 for p in out.points if PLANTED.contains(p))


def test_misclassified_empty_for_perfect():
    clf = SyntheticClassifier(arity=3, base_label=1)
    out = sample_and_label(SPACE3, Concretizer(SPACE3), clf, grid(4, 3))
    assert len(misclassified(out, lambda a: 1)) == 0


def test_misclassified_all_for_always_wrong():
    clf = SyntheticClassifier(arity=3, base_label=0)
    out = sample_and_label(SPACE3, Concretizer(SPACE3), clf, grid(4, 3))
    assert len(misclassified(out, lambda a: 1)) == len(out)


def test_single_point_is_corner_case():
    regions = extract_regions(np.array([[0.3, 0.3, 0.3]]))
    assert len(regions) == 1
    assert regions[0].tag == "corner-case"


def test_two_close_points_form_one_cluster():
    pts = np.array([[0.3, 0.3], [0.3, 0.35]])
    regions = extract_regions(pts, link_radius=0.1)
    assert len(regions) == 1
    assert regions[0].tag == "cluster"


def test_cluster_plus_corner_case_pattern():
    rng = np.random.default_rng(6)
    dense = 0.08 + 0.04 * rng.random((12, 2))  # lower-left blob
    lone = np.array([[0.85, 0.9]])
    pts = np.vstack([dense, lone])
    regions = extract_regions(pts, link_radius=0.1)
    assert len(regions) == 2
    tags = sorted(r.tag for r in regions)
    assert tags == ["cluster", "corner-case"]
    # agree with the brute-force transitive closure
    clusters = linkage_clusters([tuple(p) for p in pts], 0.1)
    assert sorted(len(c) for c in clusters) == sorted(len(r.members) for r in regions)


def test_regions_boxes_contain_members():
    rng = np.random.default_rng(7)
    pts = rng.random((25, 3))
    for region in extract_regions(pts, link_radius=0.15):
        for p in region.members:
            assert np.all(region.lo <= p) and np.all(p <= region.hi)
        assert np.all(region.lo >= 0.0) and np.all(region.hi <= 1.0)


def test_restrict_to_rou_rescales_bound_dim():
    cells = [{"d0": (30.0, 31.0)}, {"d0": (59.0, 60.0)}]
    restricted = restrict_to_rou(SPACE3, cells, {"distance": "d0"})
    assert restricted.box[SPACE3.index_of("distance")] == (0.5, 1.0)
    assert restricted.box[SPACE3.index_of("x_pos")] == (0.0, 1.0)


def test_restrict_without_binding_is_identity():
    cells = [{"d0": (30.0, 40.0)}]
    restricted = restrict_to_rou(SPACE3, cells, {})
    assert restricted.box == SPACE3.box


def test_restrict_full_span_is_identity():
    cells = [{"d0": (0.0, 60.0)}]
    restricted = restrict_to_rou(SPACE3, cells, {"distance": "d0"})
    assert restricted.box == SPACE3.box


def test_restrict_empty_rou_signals():
    with pytest.raises(EmptyRouError):
        restrict_to_rou(SPACE3, [], {"distance": "d0"})


def test_project_region_to_params():
    regions = extract_regions(np.array([[0.45, 0.5, 0.2], [0.45, 0.9, 0.2]]), link_radius=0.5)
    uml = project_to_cps(regions, {"distance": "d0"}, SPACE3)
    assert len(uml) == 1
    lo, hi = uml[0].param_ranges["d0"]
    assert lo <= 30.0 <= 60.0 * 0.9 <= hi  # padded hull around [0.5, 0.9] x 60
    assert set(uml[0].scene_box) == {"x_pos", "brightness"}


def test_project_empty_regions():
    assert project_to_cps([], {"distance": "d0"}, SPACE3) == []


def test_project_attaches_matching_cells():
    regions = [r for r in extract_regions(np.array([[0.45, 0.6, 0.2]]))]
    cells = [{"v0": (34.0, 35.0), "d0": (35.0, 36.0)},
             {"v0": (34.0, 35.0), "d0": (55.0, 56.0)}]
    uml = project_to_cps(regions, {"distance": "d0"}, SPACE3, rou_cells=cells)
    # region around distance 0.6*60 = 36 m: only the first cell center matches
    assert len(uml[0].param_cells) == 1
    assert uml[0].param_cells[0]["d0"] == (35.0, 36.0)


def test_restrict_then_project_round_trip():
    cells = [{"d0": (30.0, 31.0)}, {"d0": (59.0, 60.0)}]
    restricted = restrict_to_rou(SPACE3, cells, {"distance": "d0"})
    # a region spanning the full restricted distance slab round-trips the hull
    dd = SPACE3.index_of("distance")
    lo = np.array([0.45, restricted.box[dd][0], 0.2])
    hi = np.array([0.46, restricted.box[dd][1], 0.21])
    from roufalsify.analyzer import Region
    region = Region(lo=lo, hi=hi, members=np.array([lo]), tag="cluster")
    uml = project_to_cps([region], {"distance": "d0"}, restricted)
    plo, phi = uml[0].param_ranges["d0"]
    assert plo == pytest.approx(30.0, abs=1.0)  # within one cell width
    assert phi == pytest.approx(60.0, abs=1.0)


def test_lattice_and_grid_samplers_supported():
    clf = SyntheticClassifier(arity=3, base_label=1)
    for sampler in ("lattice", "grid"):
        result = approximate(SPACE3, Concretizer(SPACE3), clf, epsilon=0.5,
                             sampler=sampler, batch=16, max_iters=4, seed=0)
        assert result.error == 0.0


def test_bad_epsilon_rejected():
    clf = SyntheticClassifier(arity=3, base_label=1)
    with pytest.raises(AnalyzerConfigError):
        approximate(SPACE3, Concretizer(SPACE3), clf, epsilon=1.5)


def test_project_corner_case_point_arithmetic():
    # lone misclassified point: its distance coordinate de-normalizes to
    # 0.0244 * 60 = 1.464 m under the standard binding
    pt = np.array([[0.1933, 0.0244, 0.4589]])
    regions = extract_regions(pt)
    uml = project_to_cps(regions, {"distance": "d0"}, SPACE3)
    lo, hi = uml[0].param_ranges["d0"]
    assert lo == pytest.approx(1.464, abs=1e-9)
    assert hi == pytest.approx(1.464, abs=1e-9)
    assert uml[0].tag == "corner-case"


def test_planted_box_recovery_within_two_cell_layers():
    k = 12
    clf = planted_classifier()
    out = sample_and_label(SPACE3, Concretizer(SPACE3), clf, grid(k, 3))
    bad = misclassified(out, lambda a: 1)
    regions = extract_regions(bad, link_radius=0.1)
    assert len(regions) == 1
    region = regions[0]
    layer = 2.0 / k
    for i, (lo, hi) in enumerate(((0.4, 0.5), (0.0, 1.0), (0.15, 0.25))):
        assert abs(float(region.lo[i]) - lo) <= layer
        assert abs(float(region.hi[i]) - hi) <= layer
