"""Homomorphism densities of small motifs in graphs and step graphons.

All densities are exact sums over every map V(H) -> V(G) (or -> blocks).
For graphon inputs with at most ``ENUM_LIMIT`` maps the terms are enumerated
explicitly in mixed-radix lexicographic order; larger sums, and all integer
graph counts, are contracted with ``numpy.einsum``, which sums the same terms
(exactly, in the integer case).
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cutnorm import cut_norm_exact
from .errors import BlockLimitError, GraphonError, IncompatibleRefinementError
from .graphon import FiniteGraph, StepFunction, StepGraphon, align

DEFAULT_MOTIF_LIMIT = 6
ENUM_LIMIT = 1 << 21


@dataclass(frozen=True)
class LabelledGraph:
    base: FiniteGraph
    labelled: tuple[int, ...] = ()

    def __post_init__(self):
        labelled = tuple(int(v) for v in self.labelled)
        if len(set(labelled)) != len(labelled):
            raise GraphonError("labelled vertices must be distinct")
        if any(not 0 <= v < self.base.n for v in labelled):
            raise GraphonError("labelled vertex outside the graph")
        object.__setattr__(self, "labelled", labelled)


def _path(n):
    return FiniteGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


MOTIFS: dict[str, FiniteGraph] = {
    "K1": FiniteGraph.empty(1),
    "K2": FiniteGraph.complete(2),
    "K3": FiniteGraph.complete(3),
    "P3": _path(3),
    "P4": _path(4),
    "C4": FiniteGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    "star3": FiniteGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)]),
}


def motif(name: str) -> FiniteGraph:
    try:
        return MOTIFS[name]
    except KeyError:
        raise GraphonError(f"unknown motif {name!r}; choose from {sorted(MOTIFS)}") from None


def _check_size(H: FiniteGraph, limit: int | None) -> None:
    limit = DEFAULT_MOTIF_LIMIT if limit is None else limit
    if H.n > limit:
        raise BlockLimitError(f"motif has {H.n} vertices, limit is {limit}")


def hom_sum(h: int, edges, kernels, weights, free: int | None = None):
    """Σ over maps φ of Π_e kernels[e][φ(u), φ(v)] · Π_v weights[v][φ(v)].

    With ``free`` set, the sum is returned as a vector over φ(free).
    """
    k = len(weights[0])
    integer = all(np.issubdtype(np.asarray(x).dtype, np.integer) for x in list(kernels) + list(weights))
    if not integer and k**h <= ENUM_LIMIT:
        idx = np.indices((k,) * h).reshape(h, -1)
        prod = np.ones(idx.shape[1])
        for (u, v), K in zip(edges, kernels):
            prod *= np.asarray(K)[idx[u], idx[v]]
        for v, w in enumerate(weights):
            prod *= np.asarray(w)[idx[v]]
        if free is None:
            return float(prod.sum())
        axes = tuple(a for a in range(h) if a != free)
        return prod.reshape((k,) * h).sum(axis=axes)
    letters = string.ascii_letters[:h]
    terms = [f"{letters[u]}{letters[v]}" for u, v in edges] + list(letters)
    out = "" if free is None else letters[free]
    res = np.einsum(",".join(terms) + "->" + out, *kernels, *weights, optimize="greedy")
    if free is None:
        return int(res) if integer else float(res)
    return res


def hom_count(H: FiniteGraph, G: FiniteGraph, limit: int | None = None) -> int:
    """|Hom(H, G)|."""
    _check_size(H, limit)
    A = G.adjacency.astype(np.int64)
    ones = np.ones(G.n, dtype=np.int64)
    edges = H.edges
    return hom_sum(H.n, edges, [A] * len(edges), [ones] * H.n)


def hom_density_graph(H: FiniteGraph, G: FiniteGraph, limit: int | None = None) -> float:
    return hom_count(H, G, limit) / G.n**H.n


def kernel_density(H: FiniteGraph, K: StepGraphon, limit: int | None = None) -> float:
    """t(H, K) for any step kernel (no [0,1] requirement)."""
    _check_size(H, limit)
    edges = H.edges
    return hom_sum(H.n, edges, [K.values] * len(edges), [K.masses] * H.n)


def hom_density_graphon(H: FiniteGraph, W: StepGraphon, limit: int | None = None) -> float:
    if not W.graphon:
        raise GraphonError("hom_density_graphon needs a graphon-flagged input; use kernel_density for kernels")
    return kernel_density(H, W, limit)


def labelled_density(H: LabelledGraph, W: StepGraphon, limit: int | None = None) -> StepFunction:
    """y -> t_y(H, W) for a graph with exactly one labelled vertex."""
    if len(H.labelled) != 1:
        raise GraphonError(f"expected exactly one labelled vertex, got {len(H.labelled)}")
    G = H.base
    _check_size(G, limit)
    (lab,) = H.labelled
    weights = [np.ones(W.k) if v == lab else W.masses for v in range(G.n)]
    edges = G.edges
    vals = hom_sum(G.n, edges, [W.values] * len(edges), weights, free=lab)
    return StepFunction(W.masses, vals)


def _vertex_weights(masses, vertex_sets, h):
    if vertex_sets is None:
        vertex_sets = [None] * h
    if len(vertex_sets) != h:
        raise GraphonError("need one vertex set per motif vertex")
    weights = []
    for F in vertex_sets:
        w = masses.copy()
        if F is not None:
            mask = np.zeros(masses.size, dtype=bool)
            mask[list(F)] = True
            w[~mask] = 0.0
        weights.append(w)
    return weights


def _common_masses(kernels):
    masses = kernels[0].masses
    for K in kernels[1:]:
        if K.masses.shape != masses.shape or not np.array_equal(K.masses, masses):
            raise IncompatibleRefinementError("per-edge kernels must share one block partition (use graphon.align)")
    return masses


def generalized_density(H: FiniteGraph, kernels: Sequence[StepGraphon], vertex_sets=None, limit: int | None = None) -> float:
    """t_F(H, W): one kernel per edge (in ``H.edges`` order), integration restricted to Π_v F_v.

    ``vertex_sets[v]`` is a collection of block indices (None means all of [0,1]).
    """
    _check_size(H, limit)
    edges = H.edges
    if len(kernels) != len(edges):
        raise GraphonError(f"need {len(edges)} kernels, got {len(kernels)}")
    if not edges:
        raise GraphonError("edgeless motifs have no kernels to define the partition")
    masses = _common_masses(list(kernels))
    weights = _vertex_weights(masses, vertex_sets, H.n)
    return hom_sum(H.n, edges, [K.values for K in kernels], weights)


def generalized_counting_bound(H: FiniteGraph, kernels, kernels_other, vertex_sets=None, limit: int | None = None) -> tuple[float, float]:
    """Both sides of the generalized counting lemma.

    lhs = |t_F(H, W) - t_F(H, W')|;
    rhs = Σ_e (Π_{v ∉ e} μ(F_v)) · min(μ(F_u) μ(F_v), ||W_e - W'_e||□).
    """
    if not all(K.graphon for K in list(kernels) + list(kernels_other)):
        raise GraphonError("the counting bound needs graphon-flagged ([0, 1]-valued) inputs")
    masses = _common_masses(list(kernels) + list(kernels_other))
    lhs = abs(generalized_density(H, kernels, vertex_sets, limit) - generalized_density(H, kernels_other, vertex_sets, limit))
    set_mass = [float(w.sum()) for w in _vertex_weights(masses, vertex_sets, H.n)]
    rhs = 0.0
    for (u, v), K, K2 in zip(H.edges, kernels, kernels_other):
        rest = float(np.prod([m for x, m in enumerate(set_mass) if x not in (u, v)]))
        rhs += rest * min(set_mass[u] * set_mass[v], cut_norm_exact(K - K2))
    return lhs, rhs


def counting_lemma_gap(H: FiniteGraph, W: StepGraphon, W2: StepGraphon, limit: int | None = None) -> tuple[float, float]:
    """(|t(H,W) - t(H,W')|, |E(H)| · ||W - W'||□)."""
    A, B = align(W, W2)
    lhs = abs(kernel_density(H, A, limit) - kernel_density(H, B, limit))
    return lhs, H.num_edges * cut_norm_exact(A - B)
