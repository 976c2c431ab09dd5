"""Random graphs from step graphons: ℍ(n, W) and 𝔾(n, W).

Randomness comes from numpy's Philox counter-based generator.  A seed is
split with ``SeedSequence(seed).spawn(2)`` into one stream for the latent
positions X_i and one for the edge coins, so ``sample_weighted`` and
``bernoulli_round`` called with the same seed produce a coupled pair.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cutnorm import cut_distance_upper
from .errors import GraphonError
from .graphon import FiniteGraph, StepGraphon, block_of, graph_to_graphon
from .homomorphism import hom_density_graph, hom_density_graphon, motif

MAX_CURVE_N = 512


def streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """(latent-position stream, edge-coin stream) derived from ``seed``."""
    a, b = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.Generator(np.random.Philox(a)), np.random.Generator(np.random.Philox(b))


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit sub-seed for (seed, keys...)."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """ℍ(n, W): edge weights W(X_i, X_j) together with the latent X_i and their blocks."""

    weights: np.ndarray
    x: np.ndarray
    blocks: np.ndarray

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise GraphonError("weights must be square")
        if not np.array_equal(w, w.T) or np.any(np.diag(w) != 0) or np.any((w < 0) | (w > 1)):
            raise GraphonError("weights must be symmetric in [0, 1] with zero diagonal")

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def sample_weighted(n: int, W: StepGraphon, seed: int) -> WeightedGraph:
    if not W.graphon:
        raise GraphonError("sampling needs a graphon-flagged input")
    if n < 1:
        raise GraphonError("n must be at least 1")
    rng, _ = streams(seed)
    x = rng.random(n)
    blocks = block_of(W.masses, x)
    w = W.values[np.ix_(blocks, blocks)].copy()
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w, x, blocks)


def bernoulli_round(H: WeightedGraph, seed: int) -> FiniteGraph:
    """𝔾(H): each pair i < j becomes an edge with probability H(i, j)."""
    _, rng = streams(seed)
    n = H.n
    iu, ju = np.triu_indices(n, 1)
    coins = rng.random(iu.size)
    keep = coins < H.weights[iu, ju]
    A = np.zeros((n, n), dtype=np.uint8)
    A[iu[keep], ju[keep]] = 1
    A |= A.T
    return FiniteGraph(A)


def sample_with_latent(n: int, W: StepGraphon, seed: int) -> tuple[FiniteGraph, WeightedGraph]:
    H = sample_weighted(n, W, seed)
    return bernoulli_round(H, seed), H


def sample_graph(n: int, W: StepGraphon, seed: int) -> FiniteGraph:
    """𝔾(n, W) = 𝔾(ℍ(n, W))."""
    return sample_with_latent(n, W, seed)[0]


def latent_order(H: WeightedGraph) -> np.ndarray:
    """Vertex order by latent position; relabeling by it aligns a sample with W."""
    return np.argsort(H.x, kind="stable")


# -- experiment tables ------------------------------------------------------


@dataclass
class Table:
    """Long-format experiment output: one (n, trial, statistic, value) row per measurement."""

    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, n: int, trial: int, statistic: str, value: float) -> None:
        self.rows.append((int(n), int(trial), statistic, float(value)))

    def statistics(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r[2] not in seen:
                seen.append(r[2])
        return seen

    def values(self, statistic: str, n: int) -> np.ndarray:
        return np.array([r[3] for r in self.rows if r[2] == statistic and r[0] == n])

    def ns(self) -> list[int]:
        return sorted({r[0] for r in self.rows})

    def medians(self, statistic: str) -> list[float]:
        return [float(np.median(self.values(statistic, n))) for n in self.ns()]

    def summary(self) -> dict:
        return {s: dict(zip(self.ns(), self.medians(s))) for s in self.statistics()}


def nonincreasing_within(seq, allowance: float = 0.10) -> bool:
    """Each entry is at most (1 + allowance) times the previous one."""
    return all(b <= (1.0 + allowance) * a for a, b in zip(seq, seq[1:]))


def run_trials(fn, jobs, workers: int = 1) -> list:
    """Evaluate ``fn`` on each job; results come back in job order."""
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def _check_grid(n_grid, trials):
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or not n_grid or n_grid[0] < 1:
        raise GraphonError("n_grid must be strictly increasing positive integers")
    if trials < 1:
        raise GraphonError("trials must be at least 1")
    return n_grid


def concentration_curve(W: StepGraphon, n_grid, trials: int, seed: int, motifs=("K2", "K3"), steps: int | None = None, workers: int = 1, max_n: int = MAX_CURVE_N) -> Table:
    """Cut-distance upper bounds and hom-density gaps between 𝔾(n, W) and W.

    Samples are relabeled by latent position before the annealed alignment
    search on the n-block refinement (δ□ does not depend on the labelling).
    """
    n_grid = _check_grid(n_grid, trials)
    if n_grid[-1] > max_n:
        raise GraphonError(f"n = {n_grid[-1]} exceeds the refinement ceiling {max_n}")
    exact = {name: hom_density_graphon(motif(name), W) for name in motifs}

    def one(job):
        n, t = job
        s = derive_seed(seed, n, t)
        G, H = sample_with_latent(n, W, s)
        G = G.relabeled(latent_order(H))
        out = [("cut_distance", cut_distance_upper(graph_to_graphon(G), W, n, mode="anneal", seed=s, steps=steps))]
        for name in motifs:
            out.append((f"{name}_gap", abs(hom_density_graph(motif(name), G) - exact[name])))
        return out

    jobs = [(n, t) for n in n_grid for t in range(trials)]
    table = Table()
    for (n, t), res in zip(jobs, run_trials(one, jobs, workers)):
        for stat, val in res:
            table.add(n, t, stat, val)
    return table
