import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphonlab import FiniteGraph, GraphonError, StepFunction, StepGraphon, degree_function, evaluate, graph_to_graphon, refine
from graphonlab.graphon import align, block_of, common_refinement, function_l1_distance, l1_distance, l2_distance, refine_function

from oracles import random_graphon


def test_masses_must_sum_to_one():
    with pytest.raises(GraphonError):
        StepGraphon([0.5, 0.4], np.zeros((2, 2)))


def test_nonpositive_mass_rejected():
    with pytest.raises(GraphonError):
        StepGraphon([1.0, 0.0], np.zeros((2, 2)))


def test_asymmetric_values_rejected():
    with pytest.raises(GraphonError):
        StepGraphon([0.5, 0.5], [[0.1, 0.2], [0.3, 0.1]])


def test_graphon_flag_enforces_unit_interval():
    with pytest.raises(GraphonError):
        StepGraphon([1.0], [[1.5]])
    K = StepGraphon([1.0], [[1.5]], graphon=False)
    assert K.values[0, 0] == 1.5


def test_values_are_read_only():
    W = StepGraphon.constant(0.3, 2)
    with pytest.raises(ValueError):
        W.values[0, 0] = 1.0


def test_blocks_are_right_closed():
    W = StepGraphon([0.25, 0.75], [[1.0, 0.0], [0.0, 0.5]])
    assert evaluate(W, 0.25, 0.25) == 1.0
    assert evaluate(W, 0.2500001, 0.25) == 0.0
    assert evaluate(W, 0.0, 0.0) == 1.0
    assert evaluate(W, 1.0, 1.0) == 0.5
    assert block_of(W.masses, [0.0, 0.25, 0.26, 1.0]).tolist() == [0, 0, 1, 1]


def test_degree_function_of_two_block_graphon():
    W = StepGraphon([0.25, 0.75], [[1.0, 0.2], [0.2, 0.6]])
    d = degree_function(W)
    assert d.values[:, 0] == pytest.approx([0.25 + 0.15, 0.05 + 0.45], abs=1e-15)


def test_graph_to_graphon_values():
    G = FiniteGraph.from_edges(3, [(0, 1), (1, 2)])
    W = graph_to_graphon(G)
    assert W.masses.tolist() == [1 / 3] * 3
    assert W.values.tolist() == [[0, 1, 0], [1, 0, 1], [0, 1, 0]]


def test_finite_graph_edges_sorted_and_relabel():
    G = FiniteGraph.from_edges(4, [(3, 0), (2, 1), (0, 1)])
    assert G.edges == [(0, 1), (0, 3), (1, 2)]
    H = G.relabeled([3, 2, 1, 0])
    assert H.edges == [(0, 3), (1, 2), (2, 3)]
    with pytest.raises(GraphonError):
        FiniteGraph.from_edges(2, [(0, 0)])


def test_common_refinement_cells():
    masses, (i, j) = common_refinement(StepGraphon.constant(0.1, 2), StepGraphon([0.25, 0.75], np.zeros((2, 2))))
    assert masses == pytest.approx([0.25, 0.25, 0.5])
    assert i.tolist() == [0, 0, 1]
    assert j.tolist() == [0, 1, 1]


def test_subtraction_uses_common_refinement():
    A = StepGraphon([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
    B = StepGraphon([0.25, 0.75], [[0.5, 0.5], [0.5, 0.5]])
    D = A - B
    assert not D.graphon
    assert D.k == 3
    assert l1_distance(A, B) == pytest.approx(0.5, abs=1e-15)
    assert l2_distance(A, B) == pytest.approx(0.5, abs=1e-15)


def test_refine_exact_when_boundaries_align():
    W = StepGraphon([0.25, 0.75], [[1.0, 0.0], [0.0, 0.5]])
    ref = refine(W, 8)
    assert ref.l1_error == 0.0
    assert ref.graphon.values[0, 0] == 1.0 and ref.graphon.values[2, 2] == 0.5


def test_refine_averages_when_boundaries_do_not_align():
    W = StepGraphon([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
    ref = refine(W, 3)
    # the middle cell straddles both blocks: average of the 2x2 pattern is 1/2
    assert ref.graphon.values[1, 1] == pytest.approx(0.5)
    assert ref.l1_error == pytest.approx(l1_distance(W, ref.graphon), abs=1e-12)


def test_refine_function_average():
    f = StepFunction([0.5, 0.5], [0.0, 1.0])
    g = refine_function(f, 3)
    assert g.values[:, 0] == pytest.approx([0.0, 0.5, 1.0])
    assert function_l1_distance(f, refine_function(f, 4)) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_align_preserves_integrals(k1, k2, seed):
    rng = np.random.default_rng(seed)
    A, B = random_graphon(rng, k1), random_graphon(rng, k2)
    A2, B2 = align(A, B)
    assert np.array_equal(A2.masses, B2.masses)
    for X, X2 in ((A, A2), (B, B2)):
        assert X2.masses @ X2.values @ X2.masses == pytest.approx(X.masses @ X.values @ X.masses, abs=1e-12)
