"""Vertex-colored graphs and step graphons (colors are integers 1..N)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cutnorm
from .errors import BlockLimitError, GraphonError
from .graphon import FiniteGraph, StepGraphon, _overlaps, common_refinement
from .homomorphism import _check_size, hom_sum
from .sampling import bernoulli_round, sample_weighted


def _colors(c, size: int) -> np.ndarray:
    arr = np.array(c, dtype=np.int64).reshape(-1)
    if arr.size != size:
        raise GraphonError(f"expected {size} colors, got {arr.size}")
    if arr.size and arr.min() < 1:
        raise GraphonError("colors must be integers >= 1")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ColoredGraph:
    base: FiniteGraph
    colors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "colors", _colors(self.colors, self.base.n))

    @property
    def n(self) -> int:
        return self.base.n

    def __eq__(self, other):
        return isinstance(other, ColoredGraph) and self.base == other.base and np.array_equal(self.colors, other.colors)


@dataclass(frozen=True, eq=False)
class ColoredStepGraphon:
    base: StepGraphon
    colors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "colors", _colors(self.colors, self.base.k))

    @classmethod
    def uniform(cls, W: StepGraphon, color: int = 1) -> "ColoredStepGraphon":
        return cls(W, np.full(W.k, color))

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def masses(self) -> np.ndarray:
        return self.base.masses

    def color_mass(self, s: int) -> float:
        return float(self.base.masses[self.colors == s].sum())

    def permuted(self, perm) -> "ColoredStepGraphon":
        perm = np.asarray(perm)
        return ColoredStepGraphon(self.base.permuted(perm), self.colors[perm])

    def on_partition(self, masses, index) -> "ColoredStepGraphon":
        return ColoredStepGraphon(self.base.on_partition(masses, index), self.colors[np.asarray(index)])

    def __eq__(self, other):
        return isinstance(other, ColoredStepGraphon) and self.base == other.base and np.array_equal(self.colors, other.colors)


def embed_colored_graph(G: ColoredGraph) -> ColoredStepGraphon:
    """One block of mass 1/n per vertex, grouped by increasing color, ties by vertex index."""
    if G.n < 1:
        raise GraphonError("graph must have at least one vertex")
    order = np.argsort(G.colors, kind="stable")
    A = G.base.adjacency[np.ix_(order, order)].astype(float)
    W = StepGraphon(np.full(G.n, 1.0 / G.n), A, graphon=True)
    return ColoredStepGraphon(W, G.colors[order])


def colored_hom_count(H: ColoredGraph, G: ColoredGraph, limit: int | None = None) -> int:
    _check_size(H.base, limit)
    A = G.base.adjacency.astype(np.int64)
    weights = [(G.colors == s).astype(np.int64) for s in H.colors]
    edges = H.base.edges
    return hom_sum(H.n, edges, [A] * len(edges), weights)


def colored_hom_density_graph(H: ColoredGraph, G: ColoredGraph, limit: int | None = None) -> float:
    return colored_hom_count(H, G, limit) / G.n**H.n


def colored_hom_density_graphon(H: ColoredGraph, W: ColoredStepGraphon, limit: int | None = None) -> float:
    """t_S(H, W): the block sum restricted to blocks of the color each vertex requires."""
    _check_size(H.base, limit)
    weights = [W.masses * (W.colors == s) for s in H.colors]
    edges = H.base.edges
    return hom_sum(H.n, edges, [W.base.values] * len(edges), weights)


def color_mismatch(c1: np.ndarray, c2: np.ndarray, masses: np.ndarray) -> float:
    """Σ_s μ(c1^{-1}(s) Δ c2^{-1}(s)), i.e. twice the mass where the colorings differ."""
    return 2.0 * float(masses[c1 != c2].sum())


def colored_align(W1: ColoredStepGraphon, W2: ColoredStepGraphon) -> tuple[ColoredStepGraphon, ColoredStepGraphon]:
    masses, (i, j) = common_refinement(W1.base, W2.base)
    return W1.on_partition(masses, i), W2.on_partition(masses, j)


def colored_cut_norm(W1: ColoredStepGraphon, W2: ColoredStepGraphon, limit: int | None = None) -> float:
    A, B = colored_align(W1, W2)
    return cutnorm.cut_norm_exact(A.base - B.base, limit) + color_mismatch(A.colors, B.colors, A.masses)


def colored_counting_gap(H: ColoredGraph, W1: ColoredStepGraphon, W2: ColoredStepGraphon, limit: int | None = None) -> tuple[float, float]:
    """(|t_S(H,W) - t_S(H,W')|, |E(H)| ||W - W'||□ + Σ_s μ(color-s fibres Δ))."""
    A, B = colored_align(W1, W2)
    lhs = abs(colored_hom_density_graphon(H, A, limit) - colored_hom_density_graphon(H, B, limit))
    rhs = H.base.num_edges * cutnorm.cut_norm_exact(A.base - B.base) + color_mismatch(A.colors, B.colors, A.masses)
    return lhs, rhs


def _refined_colored(W: ColoredStepGraphon, n: int):
    ref, src = cutnorm._refined(W.base, n)
    colors = W.colors[src]
    ov = _overlaps(W.masses, n)
    # mass of each refined block whose original color differs from the assigned one
    wrong = (ov * (W.colors[None, :] != colors[:, None])).sum()
    return ref, src, colors, 2.0 * float(wrong)


def colored_align_blocks(W1: ColoredStepGraphon, W2: ColoredStepGraphon, n: int, mode: str = "anneal", seed: int = 0, steps: int | None = None) -> cutnorm.Alignment:
    if mode == "exhaustive" and n > cutnorm.EXHAUSTIVE_MAX_N:
        raise BlockLimitError(f"exhaustive alignment needs n <= {cutnorm.EXHAUSTIVE_MAX_N}, got {n}")
    r1, s1, c1, e1 = _refined_colored(W1, n)
    r2, s2, c2, e2 = _refined_colored(W2, n)
    a = cutnorm.search_alignment(r1.graphon.values, r2.graphon.values, s1, s2, c1, c2, mode=mode, seed=seed, steps=steps)
    return cutnorm.Alignment(a.value + r1.l1_error + r2.l1_error + e1 + e2, a.perm)


def colored_cut_distance_upper(W1: ColoredStepGraphon, W2: ColoredStepGraphon, n: int, mode: str = "anneal", seed: int = 0, steps: int | None = None) -> float:
    """Upper bound on the colored cut distance; colors travel with the permuted blocks."""
    return colored_align_blocks(W1, W2, n, mode, seed, steps).value


def sample_colored(n: int, W: ColoredStepGraphon, seed: int) -> ColoredGraph:
    """𝔾_S(n, W): the uncolored sample plus the color of each vertex's latent block."""
    H = sample_weighted(n, W.base, seed)
    G = bernoulli_round(H, seed)
    return ColoredGraph(G, W.colors[H.blocks])
