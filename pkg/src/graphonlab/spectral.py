"""Spectra of step kernels: T_W, cutoffs, Laplacians and normalized Laplacians.

On a k-block partition T_W maps step functions to step functions through the
matrix V D (D = diag(masses)); conjugating by D^{1/2} gives the symmetric
matrix S = D^{1/2} V D^{1/2}, whose eigenvectors u map back to eigenfunctions
f = D^{-1/2} u that are orthonormal in the mass-weighted L^2 inner product.
Only the step-function part of each spectrum is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cutnorm import cut_norm_exact, cut_norm_lower, cut_norm_upper
from .errors import DegenerateDegreeError, GraphonError, MultiplicityError
from .graphon import StepFunction, StepGraphon, degree_function, graph_to_graphon, refine
from .jacobi import spectral_order, symmetric_eigh
from .regions import DEFAULT_COVERAGE_TOL, Box, RegionSet
from .sampling import Table, _check_grid, derive_seed, latent_order, run_trials, sample_with_latent

DEFAULT_GAP_TOL = 1e-6
SIGN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Eigenvalues by decreasing |λ| (ties: larger λ first) with step eigenfunctions.

    ``eigenfunctions.values[:, i]`` is f_i.  ``gaps[i] = |λ_i| - |λ_{i+1}|``;
    ``simple[i]`` says every other eigenvalue is more than ``gap_tol`` away.
    ``sign_fallback`` lists eigenfunctions oriented by a block indicator
    because their integral vanished.
    """

    eigenvalues: np.ndarray
    eigenfunctions: StepFunction
    gaps: np.ndarray
    simple: np.ndarray
    gap_tol: float
    sign_fallback: tuple = ()
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return self.eigenvalues.size

    def function(self, i: int) -> np.ndarray:
        return self.eigenfunctions.values[:, i]


def _orient(F: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Flip columns so that ⟨f, 1⟩ > 0, else ⟨f, 1_b⟩ > 0 for the first block b where it is nonzero."""
    F = F.copy()
    fallback = []
    for i in range(F.shape[1]):
        f = F[:, i]
        s = float(masses @ f)
        if abs(s) <= SIGN_TOL:
            fallback.append(i)
            nz = np.flatnonzero(np.abs(f * masses) > SIGN_TOL)
            s = float(f[nz[0]]) if nz.size else 1.0
        if s < 0:
            F[:, i] = -f
    return F, tuple(fallback)


def _result(w, U, masses, r, gap_tol, extra=None) -> SpectrumResult:
    order = spectral_order(w)
    w, U = w[order], U[:, order]
    F = U / r[:, None]
    F, fallback = _orient(F, masses)
    mags = np.abs(w)
    gaps = mags[:-1] - mags[1:] if w.size > 1 else np.zeros(0)
    dist = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(dist, np.inf)
    simple = dist.min(axis=1) > gap_tol if w.size > 1 else np.ones(1, dtype=bool)
    return SpectrumResult(w, StepFunction(masses, F), gaps, simple, gap_tol, fallback, extra or {})


def _conjugated(W: StepGraphon) -> tuple[np.ndarray, np.ndarray]:
    r = np.sqrt(W.masses)
    S = r[:, None] * W.values * r[None, :]
    return (S + S.T) / 2, r


def eigendecompose(W: StepGraphon, gap_tol: float = DEFAULT_GAP_TOL) -> SpectrumResult:
    S, r = _conjugated(W)
    w, U = symmetric_eigh(S)
    return _result(w, U, W.masses, r, gap_tol)


def operator_residual(W: StepGraphon, spec: SpectrumResult) -> np.ndarray:
    """||T_W f_i - λ_i f_i||_2 for every eigenpair."""
    F = spec.eigenfunctions.values
    R = W.values @ (W.masses[:, None] * F) - F * spec.eigenvalues[None, :]
    return np.sqrt(W.masses @ R**2)


def gram(spec: SpectrumResult) -> np.ndarray:
    F = spec.eigenfunctions.values
    return F.T @ (spec.eigenfunctions.masses[:, None] * F)


def spectral_sum(spec: SpectrumResult, keep=None) -> StepGraphon:
    """Σ_i λ_i f_i(x) f_i(y) over the selected indices."""
    F = spec.eigenfunctions.values
    lam = spec.eigenvalues
    if keep is not None:
        F, lam = F[:, keep], lam[keep]
    K = (F * lam[None, :]) @ F.T
    return StepGraphon(spec.eigenfunctions.masses, (K + K.T) / 2, graphon=False)


def eigenprojection(spec: SpectrumResult, k: int) -> StepGraphon:
    """Kernel of the projection onto the eigenspaces of λ_k and -λ_k (k is 1-based)."""
    if not 1 <= k <= len(spec):
        raise GraphonError(f"eigenvalue index {k} outside 1..{len(spec)}")
    target = abs(spec.eigenvalues[k - 1])
    keep = np.flatnonzero(np.abs(np.abs(spec.eigenvalues) - target) <= spec.gap_tol)
    F = spec.eigenfunctions.values[:, keep]
    P = F @ F.T
    return StepGraphon(spec.eigenfunctions.masses, (P + P.T) / 2, graphon=False)


def cutoff(W: StepGraphon, lam: float, gap_tol: float = DEFAULT_GAP_TOL) -> StepGraphon:
    """[W]_λ: the spectral expansion restricted to |λ_i| > λ."""
    if lam < 0:
        raise GraphonError("cutoff level must be nonnegative")
    spec = eigendecompose(W, gap_tol)
    return spectral_sum(spec, np.flatnonzero(np.abs(spec.eigenvalues) > lam))


def unnormalized_laplacian_spectrum(W: StepGraphon, gap_tol: float = DEFAULT_GAP_TOL) -> SpectrumResult:
    """L_W = M_d - T_W on step functions."""
    S, r = _conjugated(W)
    d = degree_function(W).values[:, 0]
    w, U = symmetric_eigh(np.diag(d) - S)
    return _result(w, U, W.masses, r, gap_tol, {"degrees": d})


def smallest_first(spec: SpectrumResult) -> np.ndarray:
    """Indices of a spectrum sorted by increasing signed eigenvalue."""
    return np.argsort(spec.eigenvalues, kind="stable")


# -- hyperbolic rank-one diagnostic -----------------------------------------


def _grid_values(g, k: int) -> np.ndarray:
    x = (np.arange(k) + 0.5) / k
    if isinstance(g, StepFunction):
        return g(x)[:, 0]
    return np.asarray([float(g(t)) for t in x])


def phyper_diagnostic(g: Callable | StepFunction, k_grid=(16, 64, 256)) -> list[dict]:
    """Unnormalized Laplacian of W_g(x, y) = g(x) g(y) on k equal blocks, for each k.

    Reports the eigenvalue closest to 0 with its eigenfunction's deviation from
    a constant and its residual, the range of the remaining eigenvalues against
    the degree range, and their largest consecutive gap.
    """
    rows = []
    for k in k_grid:
        gv = _grid_values(g, int(k))
        if np.any(gv <= 0):
            raise GraphonError("g must be positive")
        V = np.outer(gv, gv)
        W = StepGraphon(np.full(k, 1.0 / k), (V + V.T) / 2, graphon=bool(V.max() <= 1))
        spec = unnormalized_laplacian_spectrum(W)
        lam = spec.eigenvalues
        z = int(np.argmin(np.abs(lam)))
        f0 = spec.function(z)
        Lf = spec.extra["degrees"] * f0 - W.values @ (W.masses * f0)
        rest = np.sort(np.delete(lam, z))
        d = spec.extra["degrees"]
        rows.append({
            "k": int(k),
            "zero_eigenvalue": float(lam[z]),
            "zero_residual": float(np.sqrt(W.masses @ Lf**2)),
            "constant_deviation": float(np.abs(f0 - f0.mean()).max()),
            "min_degree": float(d.min()),
            "max_degree": float(d.max()),
            "min_nonzero": float(rest.min()) if rest.size else float("nan"),
            "max_nonzero": float(rest.max()) if rest.size else float("nan"),
            "max_gap": float(np.diff(rest).max()) if rest.size > 1 else 0.0,
        })
    return rows


# -- normalized kernel and Laplacian ----------------------------------------


@dataclass(frozen=True, eq=False)
class NormalizedKernel:
    kernel: StepGraphon
    degree: StepFunction
    zero_mask: np.ndarray

    @property
    def max_value(self) -> float:
        return float(self.kernel.values.max())

    @property
    def zero_mass(self) -> float:
        return float(self.kernel.masses[self.zero_mask].sum())

    def __eq__(self, other):
        return (
            isinstance(other, NormalizedKernel)
            and self.kernel == other.kernel
            and np.array_equal(self.zero_mask, other.zero_mask)
        )


def normalize_kernel(W: StepGraphon) -> NormalizedKernel:
    """W'(x, y) = W(x, y) / sqrt(d(x) d(y)), zero where a degree vanishes.

    W is first divided by its largest value.  W' does not change under this
    rescaling, and doing it first makes the result independent of any prior
    positive scaling whenever that scaling was exact in floating point.
    """
    if W.values.min() < 0:
        raise GraphonError("normalization needs a nonnegative kernel")
    top = float(W.values.max())
    V = W.values / top if top > 0 else W.values.copy()
    d = V @ W.masses
    zero = d <= 0
    inv = np.where(zero, 0.0, 1.0 / np.sqrt(np.where(zero, 1.0, d)))
    Wp = inv[:, None] * V * inv[None, :]
    Wp = np.where(zero[:, None] | zero[None, :], 0.0, Wp)
    Wp = np.maximum(Wp, Wp.T)
    zero.setflags(write=False)
    return NormalizedKernel(StepGraphon(W.masses, Wp, graphon=False), degree_function(W), zero)


def _normalized_parts(W: StepGraphon, gap_tol: float):
    nk = normalize_kernel(W)
    keep = np.flatnonzero(~nk.zero_mask)
    masses = W.masses
    k = W.k
    lam = np.zeros(0)
    U = np.zeros((k, 0))
    if keep.size:
        r = np.sqrt(masses[keep])
        S = r[:, None] * nk.kernel.values[np.ix_(keep, keep)] * r[None, :]
        w, Uk = symmetric_eigh((S + S.T) / 2)
        lam = w
        U = np.zeros((k, keep.size))
        U[keep] = Uk
    return nk, lam, U


def normalized_laplacian_spectrum(W: StepGraphon, gap_tol: float = DEFAULT_GAP_TOL) -> SpectrumResult:
    """L'_W = M_{1[d>0]} - T_{W'}: eigenvalues 1 - λ(W') on positive-degree blocks, 0 on the rest.

    ``extra["kernel_eigenvalues"]`` holds the matching eigenvalues of T_{W'}
    and ``extra["max_normalized"]`` the largest value of W'.
    """
    nk, lam, U = _normalized_parts(W, gap_tol)
    masses = W.masses
    zero_idx = np.flatnonzero(nk.zero_mask)
    Uz = np.zeros((W.k, zero_idx.size))
    Uz[zero_idx, np.arange(zero_idx.size)] = 1.0
    mu = np.concatenate([1.0 - lam, np.zeros(zero_idx.size)])
    kernel_lam = np.concatenate([lam, np.zeros(zero_idx.size)])
    Ufull = np.hstack([U, Uz])
    order = spectral_order(mu)
    extra = {
        "kernel_eigenvalues": kernel_lam[order],
        "zero_degree_mass": nk.zero_mass,
        "max_normalized": nk.max_value,
    }
    return _result(mu, Ufull, masses, np.sqrt(masses), gap_tol, extra)


def normalized_kernel_spectrum(W: StepGraphon, gap_tol: float = DEFAULT_GAP_TOL) -> SpectrumResult:
    """Eigen-decomposition of T_{W'} itself (zero-degree blocks give eigenvalue 0)."""
    return eigendecompose(normalize_kernel(W).kernel, gap_tol)


@dataclass(frozen=True, eq=False)
class Embedding:
    function: StepFunction
    kernel_eigenvalues: np.ndarray
    laplacian_eigenvalues: np.ndarray
    excluded: int
    sign_fallback: tuple
    max_normalized: float
    zero_degree_mass: float


def embedding_details(W: StepGraphon, m: int, gap_tol: float = DEFAULT_GAP_TOL, coverage_tol: float = DEFAULT_COVERAGE_TOL) -> Embedding:
    """The m eigenfunctions of L'_W with the smallest nonzero eigenvalues.

    Those correspond to the largest eigenvalues of T_{W'} other than 1;
    eigenvalues within ``gap_tol`` of 1 are excluded and counted.  Each chosen
    eigenvalue must be simple and away from 0, where T_{W'} always has
    infinite multiplicity on L^2.
    """
    if m < 1:
        raise GraphonError("embedding dimension must be at least 1")
    nk, lam, U = _normalized_parts(W, gap_tol)
    if nk.zero_mass > coverage_tol:
        raise DegenerateDegreeError(
            f"zero-degree mass {nk.zero_mass:.6g} exceeds the coverage tolerance {coverage_tol}",
            zero_degree_mass=nk.zero_mass,
        )
    near_one = np.abs(lam - 1.0) <= gap_tol
    cand = np.flatnonzero(~near_one)
    cand = cand[np.argsort(-lam[cand], kind="stable")]
    if cand.size < m:
        raise MultiplicityError(f"only {cand.size} eigenvalues below 1 for an embedding of dimension {m}", available=int(cand.size))
    chosen = cand[:m]
    others = lam.copy()
    for i in chosen:
        dist = np.abs(np.delete(others, i) - lam[i])
        if abs(lam[i]) <= gap_tol or (dist.size and dist.min() <= gap_tol):
            raise MultiplicityError(f"eigenvalue {lam[i]:.12g} of the normalized kernel is not simple", eigenvalue=float(lam[i]))
    r = np.sqrt(W.masses)
    F = np.where(r[:, None] > 0, U[:, chosen] / r[:, None], 0.0)
    F, fallback = _orient(F, W.masses)
    return Embedding(
        StepFunction(W.masses, F),
        lam[chosen],
        1.0 - lam[chosen],
        int(near_one.sum()),
        fallback,
        nk.max_value,
        nk.zero_mass,
    )


def spectral_embedding(W: StepGraphon, m: int, gap_tol: float = DEFAULT_GAP_TOL, coverage_tol: float = DEFAULT_COVERAGE_TOL) -> StepFunction:
    return embedding_details(W, m, gap_tol, coverage_tol).function


# -- weighted k-means ----------------------------------------------------------


def _separating_boxes(X: np.ndarray, labels: np.ndarray, N: int) -> list[Box]:
    m = X.shape[1]
    lo = [np.full(m, -np.inf) for _ in range(N)]
    hi = [np.full(m, np.inf) for _ in range(N)]
    mins = np.array([X[labels == j].min(axis=0) for j in range(N)])
    maxs = np.array([X[labels == j].max(axis=0) for j in range(N)])
    for a in range(N):
        for b in range(a + 1, N):
            gap_ab = mins[b] - maxs[a]  # a below b
            gap_ba = mins[a] - maxs[b]
            gap = np.maximum(gap_ab, gap_ba)
            axis = int(np.argmax(gap))
            if gap[axis] <= 0:
                raise GraphonError(f"clusters {a + 1} and {b + 1} cannot be separated by an axis-aligned cut")
            if gap_ab[axis] >= gap_ba[axis]:
                mid = (maxs[a][axis] + mins[b][axis]) / 2
                hi[a][axis] = min(hi[a][axis], mid)
                lo[b][axis] = max(lo[b][axis], mid)
            else:
                mid = (maxs[b][axis] + mins[a][axis]) / 2
                hi[b][axis] = min(hi[b][axis], mid)
                lo[a][axis] = max(lo[a][axis], mid)
    return [Box(lo[j], hi[j]) for j in range(N)]


def weighted_kmeans(values: StepFunction, N: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-9, coverage_tol: float = DEFAULT_COVERAGE_TOL) -> tuple[RegionSet, np.ndarray]:
    """Mass-weighted k-means on the block values.

    Farthest-point initialization from a seeded first center; clusters are
    numbered by their centers in lexicographic order.  Returns disjoint open
    boxes, each cut from the others at the midpoint of the widest per-axis gap,
    and the coloring (1..N) of the blocks.
    """
    X = values.values
    w = values.masses
    if N < 1:
        raise GraphonError("N must be at least 1")
    if np.unique(X, axis=0).shape[0] < N:
        raise GraphonError(f"fewer than {N} distinct statistic values")
    rng = np.random.default_rng(seed)
    centers = [X[int(rng.integers(X.shape[0]))]]
    for _ in range(1, N):
        d = np.min([np.linalg.norm(X - c, axis=1) for c in centers], axis=0)
        centers.append(X[int(np.argmax(d))])
    C = np.array(centers)
    for _ in range(max_iter):
        labels = np.argmin(np.linalg.norm(X[:, None, :] - C[None, :, :], axis=2), axis=1)
        newC = C.copy()
        for j in range(N):
            sel = labels == j
            if sel.any():
                newC[j] = (w[sel] @ X[sel]) / w[sel].sum()
        shift = float(np.abs(newC - C).max())
        C = newC
        if shift <= tol:
            break
    labels = np.argmin(np.linalg.norm(X[:, None, :] - C[None, :, :], axis=2), axis=1)
    present = np.unique(labels)
    if present.size < N:
        raise GraphonError("k-means produced an empty cluster")
    rank = np.lexsort(C.T[::-1])
    relabel = np.empty(N, dtype=int)
    relabel[rank] = np.arange(N)
    labels = relabel[labels]
    boxes = _separating_boxes(X, labels, N)
    return RegionSet(tuple(boxes), coverage_tol=coverage_tol), labels + 1


# -- examples and experiments -------------------------------------------------


def block_diagonal(masses) -> StepGraphon:
    """U = Σ_i 1_{P_i × P_i}."""
    masses = np.asarray(masses, dtype=float)
    return StepGraphon(masses, np.eye(masses.size), graphon=True)


def perturbed_block_diagonal(m: int, delta: float) -> StepGraphon:
    """U^δ: block-diagonal U (masses ∝ 1..m) plus a uniform off-block coupling ε = δ min(μ)/2.

    The coupling leaves the Perron eigenvalue 1 of W' alone and moves the
    other m - 1 copies of eigenvalue 1 to simple eigenvalues just below it.
    """
    if m < 2 or not 0 < delta < 0.5:
        raise GraphonError("need m >= 2 and 0 < delta < 1/2")
    masses = np.arange(1, m + 1, dtype=float)
    masses = masses / masses.sum()
    eps = delta * masses.min() / 2
    V = np.eye(m) + eps * (1.0 - np.eye(m))
    return StepGraphon(masses, V, graphon=True)


def enormlap_demo(m: int = 3, delta: float = 0.1, n_grid=(1, 2, 4, 8, 16, 32), gap_tol: float = DEFAULT_GAP_TOL) -> dict:
    """Scaled copies W_n = U^δ / n: cut norm -> 0 while W'_n and its spectrum never change."""
    U = perturbed_block_diagonal(m, delta)
    base_cut = cut_norm_exact(U)
    base_nk = normalize_kernel(U)
    base_spec = normalized_kernel_spectrum(U, gap_tol)
    emb = embedding_details(U, m - 1, gap_tol)
    _, base_colors = weighted_kmeans(emb.function, m)
    nontrivial = np.sort(base_spec.eigenvalues)[::-1][1:m]
    rows = []
    for n in n_grid:
        Wn = U.scaled(1.0 / n)
        nk = normalize_kernel(Wn)
        spec = normalized_kernel_spectrum(Wn, gap_tol)
        e = embedding_details(Wn, m - 1, gap_tol)
        _, colors = weighted_kmeans(e.function, m)
        rows.append({
            "n": int(n),
            "cut_norm": cut_norm_exact(Wn),
            "cut_norm_times_n_equal": cut_norm_exact(Wn) * n == base_cut,
            "normalized_identical": nk == base_nk,
            "spectrum_max_diff": float(np.abs(spec.eigenvalues - base_spec.eigenvalues).max()),
            "colors": colors.tolist(),
        })
    limit = StepGraphon.constant(0.0, m)
    try:
        spectral_embedding(limit, m - 1, gap_tol)
        guard = None
    except DegenerateDegreeError as exc:
        guard = exc.reason
    return {
        "m": m,
        "delta": delta,
        "masses": U.masses.tolist(),
        "base_cut_norm": base_cut,
        "nontrivial_eigenvalues": nontrivial.tolist(),
        "eigenvalues_in_window": bool(np.all((nontrivial > 1 - delta) & (nontrivial < 1 - gap_tol))),
        "partition_colors": base_colors.tolist(),
        "rows": rows,
        "limit_guard": guard,
    }


def _source_labels(masses, n):
    grid = (np.arange(n) + 0.5) / n
    return np.minimum(np.searchsorted(np.cumsum(masses), grid, side="left"), masses.size - 1)


def laplacian_convergence_experiment(W0: StepGraphon, n_grid, trials: int, seed: int, m: int | None = None, restarts: int = 5, workers: int = 1) -> Table:
    """Normalized kernels of 𝔾(n, W0) against W0'.

    Samples are relabeled by latent position and compared with the n-block
    refinement of W0'.  Rows: lower and certified upper cut-norm bounds of the
    difference, ``eig_gap_i`` = |λ_i(W'_n) - λ_i(W'_0)| for the top m
    eigenvalues, the number of zero-degree vertices, and max W'_n.
    """
    n_grid = _check_grid(n_grid, trials)
    if np.any(degree_function(W0).values <= 0):
        raise DegenerateDegreeError("every block of W0 needs positive degree")
    nk0 = normalize_kernel(W0)
    spec0 = eigendecompose(nk0.kernel)
    if m is None:
        m = int(np.count_nonzero(np.abs(spec0.eigenvalues) > 1e-9))
    lam0 = spec0.eigenvalues[:m]

    def one(job):
        n, t = job
        s = derive_seed(seed, n, t)
        G, H = sample_with_latent(n, W0, s)
        G = G.relabeled(latent_order(H))
        nkn = normalize_kernel(graph_to_graphon(G))
        ref = refine(nk0.kernel, n).graphon
        diff = nkn.kernel - ref
        src = _source_labels(W0.masses, n)
        lam = eigendecompose(nkn.kernel).eigenvalues[:m]
        out = [
            ("cut_norm_lower", cut_norm_lower(diff, restarts=restarts, seed=s)),
            ("cut_norm_upper", cut_norm_upper(diff, [src])),
            ("zero_degree_vertices", float(np.count_nonzero(G.degrees() == 0))),
            ("max_normalized", nkn.max_value),
        ]
        out += [(f"eig_gap_{i + 1}", abs(lam[i] - lam0[i])) for i in range(m)]
        return out

    jobs = [(n, t) for n in n_grid for t in range(trials)]
    table = Table(notes={"reference_eigenvalues": lam0.tolist()})
    for (n, t), res in zip(jobs, run_trials(one, jobs, workers)):
        for stat, val in res:
            table.add(n, t, stat, val)
    return table
