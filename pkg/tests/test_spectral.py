import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphonlab import (
    DegenerateDegreeError,
    FiniteGraph,
    GraphonError,
    MultiplicityError,
    StepFunction,
    StepGraphon,
    cut_norm_exact,
    cutoff,
    eigendecompose,
    eigenprojection,
    enormlap_demo,
    graph_to_graphon,
    laplacian_convergence_experiment,
    normalize_kernel,
    normalized_laplacian_spectrum,
    phyper_diagnostic,
    spectral_embedding,
    unnormalized_laplacian_spectrum,
    weighted_kmeans,
)
from graphonlab import families
from graphonlab.graphon import l2_distance, l2_norm
from graphonlab.spectral import block_diagonal, embedding_details, gram, operator_residual, perturbed_block_diagonal, spectral_sum

from oracles import grid_graphon, numpy_spectrum, random_graphon


# -- eigendecompose -------------------------------------------------------------


def test_constant_graphon_spectrum():
    spec = eigendecompose(StepGraphon.constant(0.3, 4))
    assert spec.eigenvalues == pytest.approx([0.3, 0, 0, 0], abs=1e-15)
    assert spec.function(0) == pytest.approx(np.ones(4), abs=1e-14)


def test_two_equal_blocks_by_hand():
    a, b = 0.9, 0.3
    spec = eigendecompose(StepGraphon.equal_blocks([[a, b], [b, a]]))
    assert spec.eigenvalues == pytest.approx([(a + b) / 2, (a - b) / 2], abs=1e-15)


def test_edge_graph_has_plus_minus_half():
    spec = eigendecompose(graph_to_graphon(FiniteGraph.complete(2)))
    assert spec.eigenvalues == pytest.approx([0.5, -0.5], abs=1e-15)
    # second eigenfunction has zero integral, so the block-indicator rule orients it
    assert spec.sign_fallback == (1,)
    assert spec.function(1)[0] > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2**31))
def test_residuals_orthonormality_and_reconstruction(k, seed):
    W = random_graphon(np.random.default_rng(seed), k)
    spec = eigendecompose(W)
    assert operator_residual(W, spec).max() <= 1e-8
    assert np.abs(gram(spec) - np.eye(k)).max() <= 1e-9
    assert l2_distance(spectral_sum(spec), W) <= 1e-8
    assert np.sort(spec.eigenvalues) == pytest.approx(numpy_spectrum(W), abs=1e-10)


def test_eigenvalue_ordering_and_simple_flags(rng):
    spec = eigendecompose(random_graphon(rng, 6))
    mags = np.abs(spec.eigenvalues)
    assert np.all(np.diff(mags) <= 1e-12)
    assert spec.gaps == pytest.approx(mags[:-1] - mags[1:])
    assert spec.simple.all()


def test_eigenprojection_properties(rng):
    W = random_graphon(rng, 5)
    spec = eigendecompose(W)
    P = eigenprojection(spec, 1)
    # trace with respect to the block masses
    assert float(P.masses @ np.diag(P.values)) == pytest.approx(1.0, abs=1e-9)
    PP = P.values @ np.diag(P.masses) @ P.values
    assert np.abs(PP - P.values).max() <= 1e-9
    const = eigenprojection(eigendecompose(StepGraphon.constant(0.4, 3)), 1)
    assert const.values == pytest.approx(np.ones((3, 3)), abs=1e-14)
    with pytest.raises(GraphonError):
        eigenprojection(spec, 6)


def test_cutoff_examples(rng):
    W = random_graphon(rng, 5)
    top = abs(eigendecompose(W).eigenvalues[0])
    assert np.abs(cutoff(W, top + 1e-9).values).max() == 0.0
    assert l2_distance(cutoff(W, 0.0), W) <= 1e-8
    C = cutoff(StepGraphon.constant(0.6, 3), 0.3)
    assert C.values == pytest.approx(np.full((3, 3), 0.6), abs=1e-14)


def test_cutoff_converges_along_a_convergent_family():
    W0 = StepGraphon([0.2, 0.3, 0.5], [[0.9, 0.1, 0.2], [0.1, 0.8, 0.3], [0.2, 0.3, 0.7]])
    lam = np.sort(np.abs(eigendecompose(W0).eigenvalues))
    alpha = (lam[0] + lam[1]) / 2  # inside the gap below the two largest
    P = StepGraphon([0.2, 0.3, 0.5], [[-1.0, 0.5, 0.2], [0.5, 0.3, -0.4], [0.2, -0.4, 0.1]], graphon=False)
    errs = []
    for t in (0.1, 0.01, 0.001, 0.0001):
        Wt = StepGraphon(W0.masses, W0.values + t * P.values, graphon=False)
        errs.append(l2_norm(cutoff(Wt, alpha) - cutoff(W0, alpha)))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


@pytest.mark.parametrize("masses", [(0.35, 0.65), (0.2, 0.3, 0.5)])
def test_sign_normalized_eigenfunctions_converge_linearly(masses):
    k = len(masses)
    base = np.full((k, k), 0.2) + np.diag(np.linspace(0.5, 0.7, k))
    W0 = StepGraphon(masses, base)
    P = np.ones((k, k)) - np.eye(k) * 2
    f0 = eigendecompose(W0).eigenfunctions.values
    for t in (1e-2, 1e-3, 1e-4):
        ft = eigendecompose(StepGraphon(masses, base + t * P)).eigenfunctions.values
        err = np.sqrt(np.asarray(masses) @ (ft - f0) ** 2)
        # first-order perturbation: error proportional to t
        assert err.max() <= 50 * t


# -- unnormalized Laplacian -------------------------------------------------------


def test_unnormalized_laplacian_of_constant():
    spec = unnormalized_laplacian_spectrum(StepGraphon.constant(0.4, 5))
    assert np.sort(spec.eigenvalues) == pytest.approx([0, 0.4, 0.4, 0.4, 0.4], abs=1e-14)
    assert np.abs(unnormalized_laplacian_spectrum(StepGraphon.constant(0.0, 3)).eigenvalues).max() == 0.0


def test_phyper_constant_g_is_degenerate():
    (row,) = phyper_diagnostic(lambda x: 0.6, k_grid=(16,))
    assert row["min_nonzero"] == pytest.approx(0.36, abs=1e-12)
    assert row["max_nonzero"] == pytest.approx(0.36, abs=1e-12)
    assert abs(row["zero_eigenvalue"]) < 1e-12


def test_phyper_gap_shrinks_with_k():
    rows = phyper_diagnostic(lambda x: 0.5 + x / 2, k_grid=(16, 32, 64))
    gaps = [r["max_gap"] for r in rows]
    assert gaps[0] > gaps[1] > gaps[2]
    for r in rows:
        assert r["constant_deviation"] < 1e-8
        assert r["min_degree"] - 1e-9 <= r["min_nonzero"] and r["max_nonzero"] <= r["max_degree"] + 1e-9


# -- normalized kernel and Laplacian ------------------------------------------------


def test_normalize_constant_and_zero():
    assert normalize_kernel(StepGraphon.constant(0.3, 3)).kernel.values == pytest.approx(np.ones((3, 3)), abs=1e-15)
    nk = normalize_kernel(StepGraphon.constant(0.0, 2))
    assert np.all(nk.kernel.values == 0) and nk.zero_mass == 1.0


def test_normalize_block_diagonal():
    masses = np.array([0.1, 0.3, 0.6])
    nk = normalize_kernel(block_diagonal(masses))
    assert nk.kernel.values == pytest.approx(np.diag(1 / masses), rel=1e-15)


def test_normalize_zero_degree_rows():
    W = StepGraphon([0.3, 0.7], [[0.0, 0.0], [0.0, 0.5]])
    nk = normalize_kernel(W)
    assert nk.zero_mask.tolist() == [True, False]
    assert nk.kernel.values[0].tolist() == [0.0, 0.0]
    assert nk.zero_mass == pytest.approx(0.3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31), st.sampled_from([2, 10, 100]))
def test_scale_invariance_is_exact(k, seed, divisor):
    W = grid_graphon(np.random.default_rng(seed), k)
    cW = StepGraphon(W.masses, W.values / divisor)
    assert np.array_equal(cW.values * divisor, W.values)
    assert normalize_kernel(cW) == normalize_kernel(W)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31), st.sampled_from([0.5, 0.1, 0.01]))
def test_scale_invariance_under_rounded_scaling(k, seed, c):
    W = random_graphon(np.random.default_rng(seed), k)
    a = normalize_kernel(W.scaled(c)).kernel.values
    b = normalize_kernel(W).kernel.values
    assert np.abs(a - b).max() <= 1e-14 * np.abs(b).max()


def test_normalized_laplacian_of_constant():
    spec = normalized_laplacian_spectrum(StepGraphon.constant(0.7, 4))
    assert np.sort(spec.eigenvalues) == pytest.approx([0, 1, 1, 1], abs=1e-12)


def test_normalized_laplacian_of_block_diagonal():
    spec = normalized_laplacian_spectrum(block_diagonal([0.2, 0.3, 0.5]))
    assert np.sort(spec.eigenvalues) == pytest.approx([0, 0, 0], abs=1e-12)


def test_normalized_laplacian_with_zero_degree_block():
    W = StepGraphon([0.3, 0.7], [[0.0, 0.0], [0.0, 0.5]])
    spec = normalized_laplacian_spectrum(W)
    assert np.sort(spec.eigenvalues) == pytest.approx([0.0, 0.0], abs=1e-12)
    assert spec.extra["zero_degree_mass"] == pytest.approx(0.3)


def test_star_graphon_normalized_rectangle_bounds():
    # hub block of mass a joined to everything else: the rectangle hub x rest has
    # W' mass sqrt(a (1 - a)), within the sqrt bound but far above 2 a
    a = 0.01
    W = StepGraphon([a, 1 - a], [[0.0, 1.0], [1.0, 0.0]])
    Wp = normalize_kernel(W).kernel.values
    mass = a * (1 - a) * Wp[0, 1]
    assert mass == pytest.approx(np.sqrt(a * (1 - a)), rel=1e-14)
    assert mass <= np.sqrt(a * (1 - a)) + 1e-15
    assert mass > 2 * min(a, 1 - a)


def test_regularity_example_bounds_normalized_kernel():
    rng = np.random.default_rng(12)
    for _ in range(50):
        k, r = int(rng.integers(2, 10)), int(rng.integers(1, 4))
        masses = rng.dirichlet(np.ones(k))
        masses /= masses.sum()
        g = rng.random((k, r)) * (rng.random((k, r)) < 0.7)
        g /= np.maximum(1.0, np.linalg.norm(g, axis=1))[:, None]
        integrals = masses @ g
        if integrals.min() <= 0:
            continue
        alpha = 1.0 / integrals.min()
        V = np.minimum(g @ g.T, 1.0)  # rounding can push a unit-norm row past 1
        W = StepGraphon(masses, (V + V.T) / 2)
        assert normalize_kernel(W).max_value <= alpha + 1e-9


# -- embeddings -------------------------------------------------------------------------


def test_two_block_embedding_separates_blocks():
    W = families.planted(2, 0.8, 0.2, masses=[0.4, 0.6])
    f = spectral_embedding(W, 1)
    assert np.sign(f.values[0, 0]) != np.sign(f.values[1, 0])


def test_embedding_rejects_multiplicity():
    with pytest.raises(MultiplicityError):
        spectral_embedding(StepGraphon.constant(0.5, 3), 1)
    with pytest.raises(MultiplicityError):
        spectral_embedding(families.planted(3, 0.8, 0.2), 1)


def test_embedding_rejects_degenerate_degree():
    W = StepGraphon([0.3, 0.7], [[0.0, 0.0], [0.0, 0.5]])
    with pytest.raises(DegenerateDegreeError) as exc:
        spectral_embedding(W, 1)
    assert exc.value.reason == "degenerate_degree"


def test_embedding_eigenfunctions_are_l2_normalized():
    W = families.planted(3, 0.8, 0.2, masses=[0.2, 0.3, 0.5])
    emb = embedding_details(W, 2)
    F = emb.function.values
    assert F.T @ (W.masses[:, None] * F) == pytest.approx(np.eye(2), abs=1e-12)
    assert np.all(emb.laplacian_eigenvalues > 0)


def test_weighted_kmeans_cases():
    f = StepFunction([0.5, 0.5], [0.1, 0.9])
    regions, colors = weighted_kmeans(f, 2)
    assert colors.tolist() == [1, 2]
    assert regions.boxes[0].contains([0.1]) and regions.boxes[1].contains([0.9])
    regions, colors = weighted_kmeans(f, 1)
    assert colors.tolist() == [1, 1] and len(regions) == 1


def test_weighted_kmeans_recovers_three_planted_blocks():
    masses = [0.2, 0.3, 0.5]
    W = families.planted(3, 0.8, 0.2, masses=masses).on_partition(np.repeat(masses, 2) / 2, [0, 0, 1, 1, 2, 2])
    regions, colors = weighted_kmeans(spectral_embedding(W, 2), 3)
    assert colors[0] == colors[1] and colors[2] == colors[3] and colors[4] == colors[5]
    assert len({colors[0], colors[2], colors[4]}) == 3


# -- counterexample demos and experiments ------------------------------------------------


def test_perturbed_block_diagonal_splits_eigenvalue_one():
    U = perturbed_block_diagonal(4, 0.1)
    lam = np.sort(eigendecompose(normalize_kernel(U).kernel).eigenvalues)[::-1]
    assert lam[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all((lam[1:4] > 0.9) & (lam[1:4] < 1))
    assert np.all(np.diff(lam[:4]) < -1e-6)


def test_enormlap_demo_report():
    rep = enormlap_demo(3, 0.1, (1, 2, 4))
    assert rep["eigenvalues_in_window"]
    assert rep["limit_guard"] == "degenerate_degree"
    for row in rep["rows"]:
        assert row["normalized_identical"] and row["cut_norm_times_n_equal"]
        assert row["colors"] == rep["partition_colors"]
    assert rep["base_cut_norm"] == cut_norm_exact(perturbed_block_diagonal(3, 0.1))


def test_laplacian_experiment_on_constant_graphon_has_top_eigenvalue_one():
    table = laplacian_convergence_experiment(StepGraphon.constant(0.6), (30, 60), 3, seed=2)
    assert np.all(table.values("zero_degree_vertices", 30) >= 0)
    assert np.all(table.values("eig_gap_1", 60) < 1e-10)
    assert np.all(table.values("cut_norm_lower", 60) <= table.values("cut_norm_upper", 60) + 1e-12)


def test_laplacian_experiment_flags_isolated_vertices():
    table = laplacian_convergence_experiment(StepGraphon.constant(0.05), (20,), 5, seed=0)
    assert table.values("zero_degree_vertices", 20).sum() > 0


def test_laplacian_experiment_rejects_zero_degree_limit():
    with pytest.raises(DegenerateDegreeError):
        laplacian_convergence_experiment(StepGraphon([0.5, 0.5], [[0.0, 0.0], [0.0, 1.0]]), (10,), 1, seed=0)
