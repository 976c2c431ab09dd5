"""Cut norms, the inf->1 operator norm, and cut-distance upper bounds.

For a step kernel the cut-norm objective ``sum_ij K_ij a_i b_j`` with
``a_i in [0, mu_i]``, ``b_j in [0, mu_j]`` is bilinear, so the supremum is
attained at whole-block sets.  :func:`cut_norm_exact` enumerates every row
subset and picks the optimal column subset in closed form (all positive or
all negative column sums).
"""

from __future__ import annotations

import itertools
import math
import os
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BlockLimitError, GraphonError
from .graphon import StepGraphon, l1_norm, refine

DEFAULT_EXACT_K = 22
EXHAUSTIVE_MAX_N = 9
# above this many blocks the annealer scores moves with a compressed surrogate
SEARCH_EXACT_MAX_N = 12
_CHUNK = 1 << 14


def exact_limit() -> int:
    """Block ceiling for exact enumeration (env ``GRAPHONLAB_EXACT_K`` overrides)."""
    raw = os.environ.get("GRAPHONLAB_EXACT_K")
    if raw is None:
        return DEFAULT_EXACT_K
    try:
        value = int(raw)
    except ValueError:
        raise GraphonError(f"GRAPHONLAB_EXACT_K must be an integer, got {raw!r}") from None
    if value < 1:
        raise GraphonError("GRAPHONLAB_EXACT_K must be positive")
    return value


def _weighted(K: StepGraphon) -> np.ndarray:
    return K.masses[:, None] * K.values * K.masses[None, :]


def _subsets(k: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(float)


def _check_limit(k: int, limit: int | None) -> None:
    limit = exact_limit() if limit is None else limit
    if k > limit:
        raise BlockLimitError(f"{k} blocks exceeds the exact enumeration limit {limit}")


def _cut_norm_weighted(Kw: np.ndarray) -> float:
    k = Kw.shape[0]
    best = 0.0
    total = 1 << k
    for start in range(0, total, _CHUNK):
        S = _subsets(k, start, min(total, start + _CHUNK))
        C = S @ Kw
        pos = np.where(C > 0, C, 0.0).sum(axis=1)
        neg = np.where(C < 0, -C, 0.0).sum(axis=1)
        best = max(best, float(pos.max()), float(neg.max()))
    return best


def cut_norm_exact(K: StepGraphon, limit: int | None = None) -> float:
    """sup over measurable A, B of |∫_{A×B} K|, by enumeration of block subsets."""
    _check_limit(K.k, limit)
    return _cut_norm_weighted(_weighted(K))


def cut_norm_lower(K: StepGraphon, restarts: int = 20, seed: int = 0) -> float:
    """Alternating maximization over block indicators with random restarts.

    Every returned value is attained by an explicit pair of block sets, so it
    never exceeds the true cut norm.
    """
    if restarts < 1:
        raise GraphonError("restarts must be >= 1")
    Kw = _weighted(K)
    k = K.k
    rng = np.random.default_rng(seed)
    best = 0.0
    for r in range(restarts):
        start = np.ones(k, dtype=bool) if r == 0 else rng.random(k) < 0.5
        if not start.any():
            start[rng.integers(k)] = True
        for sign in (1.0, -1.0):
            a = start.copy()
            value = -math.inf
            while True:
                b = sign * (a @ Kw) > 0
                a_new = sign * (Kw @ b) > 0
                v = sign * float(a_new.astype(float) @ Kw @ b.astype(float))
                if v <= value:
                    break
                value, a = v, a_new
            best = max(best, value)
    return best


def op_norm_inf_to_1(K: StepGraphon, limit: int | None = None) -> float:
    """sup over |f| <= 1 of ||T_K f||_1; the optimum sits at a ±1 sign per block."""
    _check_limit(K.k, limit)
    k = K.k
    KM = K.values * K.masses[None, :]
    best = 0.0
    total = 1 << (k - 1)  # f and -f give the same norm, so fix f_0 = +1
    for start in range(0, total, _CHUNK):
        S = _subsets(k - 1, start, min(total, start + _CHUNK)) if k > 1 else np.zeros((1, 0))
        F = np.hstack([np.ones((S.shape[0], 1)), 1.0 - 2.0 * S])
        G = F @ KM.T
        best = max(best, float((np.abs(G) @ K.masses).max()))
    return best


def spectral_bound(K: StepGraphon) -> float:
    """||T_K||_{2->2}, which dominates |∫_{A×B} K| <= ||T_K|| sqrt(mu(A) mu(B))."""
    r = np.sqrt(K.masses)
    S = r[:, None] * K.values * r[None, :]
    return float(np.abs(np.linalg.eigvalsh(S)).max())


def compress(K: StepGraphon, labels) -> tuple[StepGraphon, StepGraphon]:
    """Split K into its cell averages over a grouping of blocks and the residual."""
    _, inv = np.unique(np.asarray(labels), return_inverse=True)
    ncell = inv.max() + 1
    G = np.zeros((K.k, ncell))
    G[np.arange(K.k), inv] = 1.0
    cell_mass = K.masses @ G
    sums = G.T @ _weighted(K) @ G
    avg = sums / np.outer(cell_mass, cell_mass)
    avg = (avg + avg.T) / 2
    coarse = StepGraphon(cell_mass / cell_mass.sum(), avg, graphon=False)
    resid = StepGraphon(K.masses, K.values - avg[np.ix_(inv, inv)], graphon=False)
    return coarse, resid


def cut_norm_upper(K: StepGraphon, groupings: Sequence = (), limit: int | None = None) -> float:
    """Certified upper bound on the cut norm.

    Exact when the block count is within the enumeration limit.  Otherwise the
    minimum of the L1 norm, the L2 operator norm, and for every supplied block
    grouping ``exact(cell averages) + bound(residual)`` (subadditivity).
    """
    limit = exact_limit() if limit is None else limit
    if K.k <= limit:
        return cut_norm_exact(K, limit)
    best = min(l1_norm(K), spectral_bound(K))
    for labels in groupings:
        coarse, resid = compress(K, labels)
        if coarse.k > limit:
            continue
        part = cut_norm_exact(coarse, limit) + min(l1_norm(resid), spectral_bound(resid))
        best = min(best, part)
    return best


# -- cut-distance upper bounds ----------------------------------------------


class Alignment(NamedTuple):
    """Best block permutation found: block ``i`` of W1 is matched with block ``perm[i]`` of W2."""

    value: float
    perm: np.ndarray


def _batch_cut_norms(Kw: np.ndarray) -> np.ndarray:
    n = Kw.shape[-1]
    S = _subsets(n, 0, 1 << n)
    C = np.einsum("sn,bnm->bsm", S, Kw, optimize=True)
    pos = np.where(C > 0, C, 0.0).sum(axis=2).max(axis=1)
    neg = np.where(C < 0, -C, 0.0).sum(axis=2).max(axis=1)
    return np.maximum(pos, neg)


def _color_term(c1, c2, perm, n) -> float:
    if c1 is None:
        return 0.0
    return 2.0 * np.count_nonzero(c1 != c2[perm]) / n


class _Problem:
    """Two kernels on the same n equal blocks, optionally colored."""

    def __init__(self, V1, V2, src1, src2, c1=None, c2=None, limit=None):
        self.V1, self.V2 = V1, V2
        self.n = V1.shape[0]
        self.masses = np.full(self.n, 1.0 / self.n)
        self.src1, self.src2 = np.asarray(src1), np.asarray(src2)
        self.c1 = None if c1 is None else np.asarray(c1)
        self.c2 = None if c2 is None else np.asarray(c2)
        self.limit = exact_limit() if limit is None else limit
        self.d1 = V1.mean(axis=1)
        self.d2 = V2.mean(axis=1)
        self._type1 = self._row_types()

    def _row_types(self):
        # W1 blocks labelled by their own source block when W1 is coarse,
        # otherwise by the W2 source block of nearest degree
        if np.unique(self.src1).size <= self.limit:
            return self.src1
        srcs = np.unique(self.src2)
        ref = np.array([self.d2[self.src2 == s].mean() for s in srcs])
        return srcs[np.abs(self.d1[:, None] - ref[None, :]).argmin(axis=1)]

    def kernel(self, perm) -> StepGraphon:
        return StepGraphon(self.masses, self.V1 - self.V2[np.ix_(perm, perm)], graphon=False)

    def groupings(self, perm):
        base = self.src2[perm]
        groups = [base, base * 100003 + self._type1]
        if self.c1 is not None:
            groups.append((base * 100003 + self._type1) * 1009 + self.c1 * 31 + self.c2[perm])
            groups.append(self.c1 * 31 + self.c2[perm])
        return groups

    def color_term(self, perm) -> float:
        return _color_term(self.c1, self.c2, perm, self.n)

    def search_objective(self, perm) -> float:
        if self.n <= SEARCH_EXACT_MAX_N:
            return cut_norm_exact(self.kernel(perm), self.limit) + self.color_term(perm)
        D = self.V1 - self.V2[np.ix_(perm, perm)]
        best = math.inf
        for labels in self.groupings(perm):
            _, inv = np.unique(labels, return_inverse=True)
            ncell = int(inv.max()) + 1
            if ncell > SEARCH_EXACT_MAX_N:
                continue
            G = np.zeros((self.n, ncell))
            G[np.arange(self.n), inv] = 1.0
            cell = G.sum(axis=0) / self.n
            sums = (G.T @ D @ G) / (self.n * self.n)
            avg = sums / np.outer(cell, cell)
            coarse = StepGraphon(cell / cell.sum(), (avg + avg.T) / 2, graphon=False)
            best = min(best, cut_norm_exact(coarse, self.limit))
        if best == math.inf:
            best = float(np.abs(D).mean())
        return best + self.color_term(perm)

    def certified(self, perm) -> float:
        K = self.kernel(perm)
        return cut_norm_upper(K, self.groupings(perm), self.limit) + self.color_term(perm)

    def sorted_match(self):
        k1 = (self.d1,) if self.c1 is None else (self.d1, self.c1)
        k2 = (self.d2,) if self.c2 is None else (self.d2, self.c2)
        o1, o2 = np.lexsort(k1), np.lexsort(k2)
        perm = np.empty(self.n, dtype=int)
        perm[o1] = o2
        return perm

    def signature(self, perm):
        sig = self.src2[perm]
        if self.c2 is not None:
            sig = sig * 1009 + self.c2[perm]
        return sig


def _exhaustive(prob: _Problem) -> Alignment:
    n = prob.n
    if n > EXHAUSTIVE_MAX_N:
        raise BlockLimitError(f"exhaustive alignment needs n <= {EXHAUSTIVE_MAX_N}, got {n}")
    w = 1.0 / (n * n)
    best_val, best_perm = math.inf, None
    perms = itertools.permutations(range(n))
    batch = max(1, 200_000 // (1 << n))
    while True:
        chunk = np.array(list(itertools.islice(perms, batch)), dtype=int)
        if chunk.size == 0:
            break
        V2p = prob.V2[chunk[:, :, None], chunk[:, None, :]]
        vals = _batch_cut_norms((prob.V1[None] - V2p) * w)
        if prob.c1 is not None:
            vals = vals + 2.0 * np.count_nonzero(prob.c1[None, :] != prob.c2[chunk], axis=1) / n
        i = int(vals.argmin())
        if vals[i] < best_val:
            best_val, best_perm = float(vals[i]), chunk[i].copy()
    return Alignment(best_val, best_perm)


def _anneal(prob: _Problem, seed: int, steps: int | None) -> Alignment:
    rng = np.random.default_rng(seed)
    n = prob.n
    if steps is None:
        steps = 400 if n <= SEARCH_EXACT_MAX_N else 60
    starts = [np.arange(n), prob.sorted_match()]
    scores = [prob.search_objective(p) for p in starts]
    cur = starts[int(np.argmin(scores))].copy()
    cur_val = min(scores)
    best, best_val = cur.copy(), cur_val
    t0 = max(cur_val, 1e-3) * 0.05
    for step in range(steps):
        sig = prob.signature(cur)
        if np.unique(sig).size < 2:
            break
        i = int(rng.integers(n))
        others = np.flatnonzero(sig != sig[i])
        if others.size == 0:
            continue
        j = int(others[rng.integers(others.size)])
        cand = cur.copy()
        cand[i], cand[j] = cand[j], cand[i]
        val = prob.search_objective(cand)
        temp = t0 * (1e-3 ** (step / max(1, steps - 1)))
        if val <= cur_val or rng.random() < math.exp(-(val - cur_val) / temp):
            cur, cur_val = cand, val
            if val < best_val:
                best, best_val = cand.copy(), val
    candidates = {tuple(best.tolist()), tuple(starts[int(np.argmin(scores))].tolist())}
    results = [(prob.certified(np.array(p)), np.array(p)) for p in candidates]
    value, perm = min(results, key=lambda t: t[0])
    return Alignment(value, perm)


def _refined(W: StepGraphon, n: int):
    ref = refine(W, n)
    grid = (np.arange(n) + 0.5) / n
    src = np.minimum(np.searchsorted(np.cumsum(W.masses), grid, side="left"), W.k - 1)
    return ref, src


def search_alignment(V1, V2, src1, src2, c1=None, c2=None, mode="anneal", seed=0, steps=None, limit=None) -> Alignment:
    prob = _Problem(V1, V2, src1, src2, c1, c2, limit)
    if mode == "exhaustive":
        return _exhaustive(prob)
    if mode == "anneal":
        return _anneal(prob, seed, steps)
    raise GraphonError(f"unknown alignment mode {mode!r}")


def align_blocks(W1: StepGraphon, W2: StepGraphon, n: int, mode: str = "anneal", seed: int = 0, steps: int | None = None) -> Alignment:
    """Permutation of the n-block refinement of W2 minimizing the cut norm against W1.

    ``value`` upper-bounds δ□(W1, W2) plus any L1 discretization error of the
    refinements (zero when the block boundaries are multiples of 1/n).
    """
    if mode == "exhaustive" and n > EXHAUSTIVE_MAX_N:
        raise BlockLimitError(f"exhaustive alignment needs n <= {EXHAUSTIVE_MAX_N}, got {n}")
    (r1, s1), (r2, s2) = _refined(W1, n), _refined(W2, n)
    a = search_alignment(r1.graphon.values, r2.graphon.values, s1, s2, mode=mode, seed=seed, steps=steps)
    return Alignment(a.value + r1.l1_error + r2.l1_error, a.perm)


def cut_distance_upper(W1: StepGraphon, W2: StepGraphon, n: int, mode: str = "anneal", seed: int = 0, steps: int | None = None) -> float:
    """Upper bound on δ□(W1, W2) by block-permutation search on an n-block refinement."""
    return align_blocks(W1, W2, n, mode, seed, steps).value
