"""Step graphons, step functions and finite graphs.

Everything in the package is carried by piecewise-constant objects on a
partition of [0, 1] into consecutive blocks.  Block ``i`` is the half-open
interval ``(b_{i-1}, b_i]`` with the first block also containing 0, which
matches the ceiling convention ``vertex = ceil(n x)`` for graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import GraphonError, IncompatibleRefinementError

MASS_TOL = 1e-12
BOUNDARY_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_masses(masses: np.ndarray) -> None:
    if masses.ndim != 1 or masses.size == 0:
        raise GraphonError("masses must be a non-empty vector")
    if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
        raise GraphonError("every block mass must be positive")
    if abs(masses.sum() - 1.0) > MASS_TOL:
        raise GraphonError(f"block masses sum to {masses.sum()!r}, not 1")


def boundaries(masses) -> np.ndarray:
    """Right endpoints of the blocks; the last one is exactly 1."""
    cum = np.cumsum(masses)
    cum[-1] = 1.0
    return cum


def block_of(masses, x) -> np.ndarray:
    """Block index of each point of ``x`` (right-closed blocks)."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise GraphonError("coordinates must lie in [0, 1]")
    idx = np.searchsorted(boundaries(masses), x, side="left")
    return np.minimum(idx, len(masses) - 1)


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Symmetric block kernel on [0,1]^2.

    ``graphon=True`` additionally promises values in [0, 1]; differences and
    normalized kernels are carried with ``graphon=False``.
    """

    masses: np.ndarray
    values: np.ndarray
    graphon: bool = True

    def __post_init__(self):
        masses = _frozen(self.masses)
        values = _frozen(self.values)
        _check_masses(masses)
        k = masses.size
        if values.shape != (k, k):
            raise GraphonError(f"values must be {k}x{k}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise GraphonError("kernel values must be finite")
        if not np.array_equal(values, values.T):
            raise GraphonError("kernel values must be exactly symmetric")
        if self.graphon and (values.min() < 0 or values.max() > 1):
            raise GraphonError("graphon values must lie in [0, 1]")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "graphon", bool(self.graphon))

    @classmethod
    def constant(cls, p: float, k: int = 1) -> "StepGraphon":
        return cls.equal_blocks(np.full((k, k), float(p)), graphon=0 <= p <= 1)

    @classmethod
    def equal_blocks(cls, values, graphon: bool = True) -> "StepGraphon":
        values = np.asarray(values, dtype=float)
        k = values.shape[0]
        return cls(np.full(k, 1.0 / k), values, graphon)

    @property
    def k(self) -> int:
        return self.masses.size

    def as_kernel(self) -> "StepGraphon":
        return StepGraphon(self.masses, self.values, graphon=False)

    def scaled(self, c: float) -> "StepGraphon":
        values = self.values * c
        flag = self.graphon and values.min() >= 0 and values.max() <= 1
        return StepGraphon(self.masses, values, flag)

    def permuted(self, perm) -> "StepGraphon":
        """Reorder blocks so that new block ``i`` is old block ``perm[i]``."""
        perm = np.asarray(perm, dtype=int)
        if sorted(perm.tolist()) != list(range(self.k)):
            raise GraphonError("perm must be a permutation of the blocks")
        return StepGraphon(self.masses[perm], self.values[np.ix_(perm, perm)], self.graphon)

    def on_partition(self, masses, index) -> "StepGraphon":
        """Express the kernel on a finer partition; ``index[a]`` is the old block of cell ``a``."""
        index = np.asarray(index, dtype=int)
        return StepGraphon(masses, self.values[np.ix_(index, index)], self.graphon)

    def __sub__(self, other: "StepGraphon") -> "StepGraphon":
        masses, (i1, i2) = common_refinement(self, other)
        return StepGraphon(masses, self.values[np.ix_(i1, i1)] - other.values[np.ix_(i2, i2)], graphon=False)

    def __add__(self, other: "StepGraphon") -> "StepGraphon":
        masses, (i1, i2) = common_refinement(self, other)
        return StepGraphon(masses, self.values[np.ix_(i1, i1)] + other.values[np.ix_(i2, i2)], graphon=False)

    def __eq__(self, other):
        if not isinstance(other, StepGraphon):
            return NotImplemented
        return (
            self.graphon == other.graphon
            and np.array_equal(self.masses, other.masses)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        kind = "graphon" if self.graphon else "kernel"
        return f"StepGraphon(k={self.k}, {kind})"


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant map [0,1] -> R^m; ``values`` has shape (k, m)."""

    masses: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        masses = _frozen(self.masses)
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        _check_masses(masses)
        if values.ndim != 2 or values.shape[0] != masses.size or values.shape[1] < 1:
            raise GraphonError("values must have one row of length m >= 1 per block")
        values.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return self.masses.size

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def integral(self) -> np.ndarray:
        return self.masses @ self.values

    def __call__(self, x):
        return self.values[block_of(self.masses, x)]


def _canonical_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class FiniteGraph:
    """Simple undirected graph on vertices ``0..n-1`` stored as a 0/1 adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=np.uint8, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise GraphonError("adjacency must be a non-empty square matrix")
        if np.any(adj > 1) or not np.array_equal(adj, adj.T):
            raise GraphonError("adjacency must be a symmetric 0/1 matrix")
        if np.any(np.diag(adj)):
            raise GraphonError("self-loops are not allowed")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "FiniteGraph":
        if n < 1:
            raise GraphonError("a graph needs at least one vertex")
        adj = np.zeros((n, n), dtype=np.uint8)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphonError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphonError(f"self-loop at vertex {u}")
            adj[u, v] = adj[v, u] = 1
        return cls(adj)

    @classmethod
    def complete(cls, n: int) -> "FiniteGraph":
        return cls(np.ones((n, n), dtype=np.uint8) - np.eye(n, dtype=np.uint8))

    @classmethod
    def empty(cls, n: int) -> "FiniteGraph":
        return cls(np.zeros((n, n), dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(us.tolist(), vs.tolist()))

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1, dtype=np.int64)

    def relabeled(self, perm) -> "FiniteGraph":
        """New vertex ``i`` is old vertex ``perm[i]``."""
        perm = np.asarray(perm, dtype=int)
        return FiniteGraph(self.adjacency[np.ix_(perm, perm)])

    def __eq__(self, other):
        if not isinstance(other, FiniteGraph):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    __hash__ = None

    def __repr__(self):
        return f"FiniteGraph(n={self.n}, m={self.num_edges})"


def graph_to_graphon(G: FiniteGraph) -> StepGraphon:
    """The graphon f^G: n equal blocks, value 1 on edge cells and 0 elsewhere."""
    return StepGraphon.equal_blocks(G.adjacency.astype(float))


def evaluate(W: StepGraphon, x: float, y: float) -> float:
    i, j = block_of(W.masses, [x, y])
    return float(W.values[i, j])


def degree_function(W: StepGraphon) -> StepFunction:
    return StepFunction(W.masses, W.values @ W.masses)


# -- refinement -------------------------------------------------------------


def common_refinement(*objs) -> tuple[np.ndarray, list[np.ndarray]]:
    """Coarsest partition refining every operand's block partition.

    Returns the cell masses and, per operand, the index of the old block
    containing each cell.  Boundaries closer than ``BOUNDARY_TOL`` are merged.
    """
    if not objs:
        raise GraphonError("nothing to refine")
    masses_list = [np.asarray(o.masses if hasattr(o, "masses") else o, dtype=float) for o in objs]
    first = masses_list[0]
    if all(m.shape == first.shape and np.array_equal(m, first) for m in masses_list[1:]):
        idx = np.arange(first.size)
        return first, [idx] * len(objs)
    pts = np.sort(np.concatenate([boundaries(m) for m in masses_list]))
    merged = [0.0]
    for p in pts:
        if p - merged[-1] > BOUNDARY_TOL:
            merged.append(float(p))
    merged[-1] = 1.0
    edges = np.array(merged)
    new_masses = np.diff(edges)
    mids = (edges[:-1] + edges[1:]) / 2
    return new_masses, [block_of(m, mids) for m in masses_list]


def align(*Ws: StepGraphon) -> list[StepGraphon]:
    """Re-express every graphon on the common refinement of all of them."""
    masses, idx = common_refinement(*Ws)
    return [W.on_partition(masses, i) for W, i in zip(Ws, idx)]


def require_same_partition(*objs) -> np.ndarray:
    first = objs[0].masses
    for o in objs[1:]:
        if o.masses.shape != first.shape or not np.array_equal(o.masses, first):
            raise IncompatibleRefinementError("operands are not on the same block partition; align them first")
    return first


class Refinement(NamedTuple):
    graphon: StepGraphon
    l1_error: float


def _overlaps(masses, n: int) -> np.ndarray:
    """(n, k) matrix of lengths of (equal block a) ∩ (block i)."""
    right = boundaries(masses)
    left = np.concatenate([[0.0], right[:-1]])
    grid = np.arange(n + 1) / n
    lo = np.maximum(grid[:-1, None], left[None, :])
    hi = np.minimum(grid[1:, None], right[None, :])
    return np.clip(hi - lo, 0.0, None)


def equal_block_index(masses, n: int) -> np.ndarray | None:
    """Old block of each of ``n`` equal blocks, or None if boundaries do not align."""
    ov = _overlaps(masses, n)
    idx = ov.argmax(axis=1)
    if np.all(np.abs(ov[np.arange(n), idx] - 1.0 / n) <= BOUNDARY_TOL):
        return idx
    return None


def refine(W: StepGraphon, n: int) -> Refinement:
    """Express W on ``n`` equal blocks.

    Exact when every boundary of W is a multiple of 1/n; otherwise each cell
    gets the average of W over it and the L1 distance to W is reported.
    """
    if n < W.k:
        raise GraphonError(f"cannot refine {W.k} blocks into {n} < {W.k} equal blocks")
    idx = equal_block_index(W.masses, n)
    masses = np.full(n, 1.0 / n)
    if idx is not None:
        return Refinement(W.on_partition(masses, idx), 0.0)
    ov = _overlaps(W.masses, n)
    avg = (ov @ W.values @ ov.T) * (n * n)
    avg = (avg + avg.T) / 2
    if W.graphon:
        avg = np.clip(avg, 0.0, 1.0)
    a, i = np.nonzero(ov > 0)
    w = ov[a, i]
    diff = np.abs(W.values[np.ix_(i, i)] - avg[np.ix_(a, a)])
    err = float(w @ diff @ w)
    return Refinement(StepGraphon(masses, avg, W.graphon), err)


def refine_function(f: StepFunction, n: int) -> StepFunction:
    idx = equal_block_index(f.masses, n)
    if idx is not None:
        return StepFunction(np.full(n, 1.0 / n), f.values[idx])
    ov = _overlaps(f.masses, n)
    return StepFunction(np.full(n, 1.0 / n), ov @ f.values * n)


# -- norms ------------------------------------------------------------------


def l1_norm(K: StepGraphon) -> float:
    return float(K.masses @ np.abs(K.values) @ K.masses)


def l2_norm(K: StepGraphon) -> float:
    return float(np.sqrt(K.masses @ (K.values**2) @ K.masses))


def l1_distance(W1: StepGraphon, W2: StepGraphon) -> float:
    return l1_norm(W1 - W2)


def l2_distance(W1: StepGraphon, W2: StepGraphon) -> float:
    return l2_norm(W1 - W2)


def function_l1_distance(f: StepFunction, g: StepFunction) -> float:
    """∫ |f(y) - g(y)| dy with the Euclidean norm on R^m."""
    masses, (i, j) = common_refinement(f, g)
    if f.dim != g.dim:
        raise GraphonError("step functions have different output dimensions")
    return float(masses @ np.linalg.norm(f.values[i] - g.values[j], axis=1))
