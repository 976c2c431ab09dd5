import numpy as np
import pytest

from graphonlab import (
    Box,
    Composite,
    CoverageError,
    Degree,
    GraphonError,
    LabelledHomDensity,
    LabelledGraph,
    RegionSet,
    SpectralEmbedding,
    StepFunction,
    StepGraphon,
    compute_statistic,
    consistency_experiment,
    cut_norm_exact,
    inconsistency_demo_degree_mass,
    lipschitz_check,
    motif,
    partition_by_regions,
    threshold_cluster,
)
from graphonlab import families
from graphonlab.clustering import DegreeMassSetup, cluster, erdos_renyi_demo, lipschitz_sweep, random_covered_pair

from oracles import random_graphon

EDGE = LabelledGraph(motif("K2"), (0,))


# -- statistics -------------------------------------------------------------------


def test_degree_of_constant():
    assert compute_statistic(Degree(), StepGraphon.constant(0.3, 3)).values[:, 0] == pytest.approx([0.3] * 3)


def test_labelled_edge_density_equals_degree(rng):
    W = random_graphon(rng, 5)
    a = compute_statistic(LabelledHomDensity(EDGE), W).values
    b = compute_statistic(Degree(), W).values
    assert a == pytest.approx(b, abs=1e-15)


def test_composite_concatenates():
    W = StepGraphon([0.5, 0.5], [[0.2, 0.4], [0.4, 0.6]])
    v = compute_statistic(Composite((Degree(), Degree())), W).values
    assert v.shape == (2, 2) and np.array_equal(v[:, 0], v[:, 1])
    assert Composite((Degree(), SpectralEmbedding(2))).dim == 3


def test_labelled_statistic_needs_one_label():
    with pytest.raises(GraphonError):
        LabelledHomDensity(LabelledGraph(motif("K2"), (0, 1)))


# -- regions -----------------------------------------------------------------------


def test_regions_must_be_disjoint_and_separated():
    with pytest.raises(GraphonError):
        RegionSet((Box.interval(0, 0.6), Box.interval(0.5, 1)))
    with pytest.raises(GraphonError):
        RegionSet((Box.interval(0, 0.4), Box.interval(0.5, 1)), d_min=0.2)
    R = RegionSet((Box.interval(0, 0.4), Box.interval(0.6, 1)), d_min=0.2)
    assert R.boxes[0].distance(R.boxes[1]) == pytest.approx(0.2)


def test_region_json_round_trip():
    R = RegionSet((Box([None, 0.0], [0.5, None]), Box([0.5, None], [None, None])))
    again = RegionSet.from_json({"regions": R.to_json(), "coverage_tol": 0.05})
    assert again.to_json() == R.to_json() and again.coverage_tol == 0.05


# -- coloring ------------------------------------------------------------------------


def test_partition_two_block_degrees():
    regions = RegionSet((Box.interval(0, 0.5), Box.interval(0.5, 1)))
    f = StepFunction([0.5, 0.5], [0.2, 0.8])
    rep = partition_by_regions(f, regions)
    assert rep.colors.tolist() == [1, 2] and rep.uncovered_mass == 0.0


def test_partition_constant_in_region_two():
    W = StepGraphon.constant(0.7, 3)
    rep = cluster(W, Degree(), RegionSet((Box.interval(0, 0.5), Box.interval(0.5, 1))))
    assert rep.colors.tolist() == [2, 2, 2]


def test_partition_on_the_boundary_raises():
    W = StepGraphon.constant(0.5, 2)
    regions = RegionSet((Box.interval(0, 0.5), Box.interval(0.5, 1)))
    with pytest.raises(CoverageError) as exc:
        cluster(W, Degree(), regions)
    assert exc.value.reason == "coverage"
    rep = cluster(W, Degree(), regions, strict=False)
    assert rep.uncovered_mass == 1.0
    assert rep.boundary_blocks == (0, 1)
    assert rep.colors.tolist() == [1, 1]


def test_small_uncovered_mass_within_tolerance():
    regions = RegionSet((Box.interval(0, 0.5), Box.interval(0.5, 1)), coverage_tol=0.05)
    f = StepFunction([0.04, 0.96], [0.5, 0.9])
    rep = partition_by_regions(f, regions)
    assert rep.uncovered_mass == pytest.approx(0.04)
    assert rep.colors.tolist() == [1, 2]


def test_far_values_take_the_nearest_region():
    regions = RegionSet((Box.interval(0, 0.2), Box.interval(0.8, 1)))
    f = StepFunction([0.5, 0.5], [0.3, 0.75])
    rep = partition_by_regions(f, regions, strict=False)
    assert rep.colors.tolist() == [1, 2]
    assert rep.boundary_blocks == ()


def test_dimension_mismatch():
    with pytest.raises(GraphonError):
        partition_by_regions(StepFunction([1.0], [[0.1, 0.2]]), RegionSet.thresholds(0.5))


def test_threshold_cluster_examples():
    W = families.planted(2, 0.8, 0.2, masses=[0.25, 0.75])
    # block degrees: 0.25*0.8 + 0.75*0.2 = 0.35 and 0.25*0.2 + 0.75*0.8 = 0.65
    assert threshold_cluster(W, EDGE, 0.5).colors.tolist() == [1, 2]
    assert threshold_cluster(StepGraphon.constant(0.3), EDGE, 0.5).colors.tolist() == [1]
    assert threshold_cluster(StepGraphon.constant(0.7), EDGE, 0.5).colors.tolist() == [2]
    with pytest.raises(GraphonError):
        threshold_cluster(W, EDGE, 1.5)


def test_threshold_value_at_alpha_gets_color_two_but_is_uncovered():
    rep = threshold_cluster(StepGraphon.constant(0.5), EDGE, 0.5, strict=False)
    assert rep.colors.tolist() == [2]
    assert rep.uncovered_mass == 1.0


# -- experiments and demos -----------------------------------------------------------


def test_consistency_experiment_constant_graphon_colors_agree():
    table = consistency_experiment(StepGraphon.constant(0.8), Degree(), 0.3, (30, 60), 3, seed=4)
    for n in (30, 60):
        assert np.all(table.values("uncovered_mass", n) == 0)
    assert table.notes["limit_colors"] == [2]


def test_consistency_experiment_rejects_uncovered_limit():
    with pytest.raises(CoverageError):
        consistency_experiment(StepGraphon.constant(0.5), Degree(), 0.5, (10,), 1, seed=0)


def test_consistency_experiment_reports_precondition_failures():
    # sparse limit: small samples have isolated vertices, so their embedding is undefined
    W0 = families.planted(3, 0.08, 0.02, masses=[0.2, 0.3, 0.5])
    table = consistency_experiment(W0, SpectralEmbedding(2), _spectral_regions(W0), (20,), 4, seed=1)
    assert table.values("precondition_failure", 20).sum() >= 1


def _spectral_regions(W0):
    from graphonlab import spectral_embedding, weighted_kmeans

    regions, _ = weighted_kmeans(spectral_embedding(W0, 2), 3)
    return regions


def test_lipschitz_identical_graphons():
    W = StepGraphon([0.5, 0.5], [[0.1, 0.2], [0.2, 0.9]])
    regions = RegionSet((Box.interval(None, 0.3), Box.interval(0.5, None)), d_min=0.2)
    res = lipschitz_check(W, W, Degree(), regions)
    assert res.lhs == 0.0 and res.rhs == 0.0


def test_lipschitz_requires_separation():
    W = StepGraphon.constant(0.2)
    with pytest.raises(GraphonError):
        lipschitz_check(W, W, Degree(), RegionSet.thresholds(0.5))


def test_lipschitz_bound_with_doubled_statistic_term_holds():
    # every mismatched point appears in two color fibres, so the color term
    # is controlled by 2 d_1 / d_min
    for res in lipschitz_sweep(300, seed=3):
        assert res.lhs <= res.cut_term + 2 * res.statistic_distance / 0.2 + 1e-9


def test_lipschitz_single_statistic_term_counterexample():
    W1, W2 = StepGraphon.constant(0.39), StepGraphon.constant(0.61)
    regions = RegionSet((Box.interval(None, 0.4), Box.interval(0.6, None)), d_min=0.2)
    res = lipschitz_check(W1, W2, Degree(), regions)
    assert res.cut_term == pytest.approx(0.22)
    assert res.color_term == pytest.approx(2.0)
    assert res.rhs == pytest.approx(0.22 + 0.22 / 0.2)
    assert res.lhs > res.rhs


def test_random_covered_pair_is_covered():
    rng = np.random.default_rng(0)
    for _ in range(20):
        W1, W2, regions = random_covered_pair(rng, 0.2)
        for W in (W1, W2):
            assert cluster(W, Degree(), regions).uncovered_mass == 0.0


def test_erdos_renyi_ratio():
    rows = erdos_renyi_demo(EDGE, 0.5, (0.1, 0.01))
    for r in rows:
        assert r["cut_norm"] == pytest.approx(2 * r["eps"], rel=1e-12)
        assert r["colored_cut_norm"] >= 2
    assert rows[1]["ratio"] > 100


def test_degree_mass_setup_degrees():
    setup = DegreeMassSetup()
    d = setup.base().values @ setup.masses
    assert d[:2].tolist() == [0.5, 0.5]
    W = setup.perturbed((0,), 0.1)
    d = W.values @ W.masses
    # Y' gains ε ∫_{Y'} (1 - W0); Y'' loses ε ∫_{Y''} W0
    assert d[0] == pytest.approx(0.5 + 0.1 * 0.125 * 0.5)
    assert d[1] == pytest.approx(0.5 - 0.1 * 0.375 * 0.5)
    assert d[2] == pytest.approx(0.5 * 0.5 + 0.5 * 0.75)
    with pytest.raises(GraphonError):
        setup.perturbed((0, 1), 0.1)


def test_degree_mass_demo_and_undefined_limit():
    rep = inconsistency_demo_degree_mass()
    cuts = [r["cut_norm_a"] for r in rep["rows"]]
    assert cuts[0] > cuts[1] > cuts[2]
    for r in rep["rows"]:
        assert r["differing_mass"] == pytest.approx(rep["y_mass"])
    with pytest.raises(CoverageError):
        cluster(DegreeMassSetup().base(), Degree(), 0.5)
    rep0 = cluster(DegreeMassSetup().base(), Degree(), 0.5, strict=False)
    assert rep0.uncovered_mass == pytest.approx(0.5)


def test_cut_norm_of_perturbation_is_linear_in_eps():
    setup = DegreeMassSetup()
    a = cut_norm_exact(setup.perturbed((0,), 0.2) - setup.base())
    b = cut_norm_exact(setup.perturbed((0,), 0.1) - setup.base())
    assert a == pytest.approx(2 * b, rel=1e-12)
