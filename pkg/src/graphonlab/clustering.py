"""Node-level statistics and the region-based clustering map W -> (W, c_W)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colored import ColoredStepGraphon, colored_cut_distance_upper, colored_cut_norm
from .cutnorm import cut_norm_exact
from .errors import CoverageError, GraphonError, PreconditionFailure
from .graphon import StepFunction, StepGraphon, degree_function, function_l1_distance, graph_to_graphon
from .homomorphism import LabelledGraph, labelled_density
from .regions import DEFAULT_COVERAGE_TOL, Box, RegionSet
from .sampling import Table, _check_grid, derive_seed, latent_order, run_trials, sample_with_latent
from .spectral import DEFAULT_GAP_TOL, embedding_details

# -- statistics ----------------------------------------------------------------


class NodeStatistic:
    dim = 1

    def __call__(self, W: StepGraphon) -> StepFunction:
        raise NotImplementedError


@dataclass(frozen=True)
class Degree(NodeStatistic):
    def __call__(self, W):
        return degree_function(W)


@dataclass(frozen=True)
class LabelledHomDensity(NodeStatistic):
    H: LabelledGraph

    def __post_init__(self):
        if len(self.H.labelled) != 1:
            raise GraphonError("labelled density statistic needs exactly one labelled vertex")

    def __call__(self, W):
        return labelled_density(self.H, W)


@dataclass(frozen=True)
class SpectralEmbedding(NodeStatistic):
    m: int
    gap_tol: float = DEFAULT_GAP_TOL
    coverage_tol: float = DEFAULT_COVERAGE_TOL

    @property
    def dim(self):
        return self.m

    def details(self, W):
        return embedding_details(W, self.m, self.gap_tol, self.coverage_tol)

    def __call__(self, W):
        return self.details(W).function


@dataclass(frozen=True)
class Composite(NodeStatistic):
    parts: tuple

    @property
    def dim(self):
        return sum(p.dim for p in self.parts)

    def __call__(self, W):
        vals = [p(W) for p in self.parts]
        return StepFunction(W.masses, np.hstack([v.values for v in vals]))


def compute_statistic(stat: NodeStatistic, W: StepGraphon) -> StepFunction:
    return stat(W)


# -- coloring --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ColoringReport:
    result: ColoredStepGraphon
    uncovered_mass: float
    boundary_blocks: tuple = ()
    uncovered_blocks: tuple = ()
    values: StepFunction | None = None

    @property
    def colors(self) -> np.ndarray:
        return self.result.colors


def partition_by_regions(values: StepFunction, regions: RegionSet, W: StepGraphon | None = None, strict: bool = True) -> ColoringReport:
    """Color block b by the region containing its statistic value.

    Values outside every open region count as uncovered.  Values on the
    closure of some region take the lowest such region index and are listed
    as boundary blocks; values away from every region take the nearest one.
    With ``strict`` an uncovered mass above ``regions.coverage_tol`` raises
    :class:`CoverageError`.
    """
    if values.dim != regions.dim:
        raise GraphonError(f"statistic has dimension {values.dim}, regions have {regions.dim}")
    if W is None:
        W = StepGraphon(values.masses, np.zeros((values.k, values.k)), graphon=True)
    elif W.masses.shape != values.masses.shape or not np.array_equal(W.masses, values.masses):
        raise GraphonError("statistic and graphon must share a block partition")
    colors = np.zeros(values.k, dtype=np.int64)
    boundary, uncovered = [], []
    for b, x in enumerate(values.values):
        inside = [j for j, box in enumerate(regions.boxes) if box.contains(x)]
        if inside:
            colors[b] = inside[0] + 1
            continue
        uncovered.append(b)
        touching = [j for j, box in enumerate(regions.boxes) if box.in_closure(x)]
        if touching:
            boundary.append(b)
            colors[b] = touching[0] + 1
        else:
            dist = [box.point_distance(x) for box in regions.boxes]
            colors[b] = int(np.argmin(dist)) + 1
    mass = float(values.masses[uncovered].sum()) if uncovered else 0.0
    if strict and mass > regions.coverage_tol:
        raise CoverageError(
            f"statistic leaves every region on mass {mass:.6g} > {regions.coverage_tol}",
            uncovered_mass=mass,
        )
    return ColoringReport(ColoredStepGraphon(W, colors), mass, tuple(boundary), tuple(uncovered), values)


def threshold_regions(alpha: float, coverage_tol: float = DEFAULT_COVERAGE_TOL) -> RegionSet:
    return RegionSet.thresholds(alpha, coverage_tol=coverage_tol)


def threshold_partition(values: StepFunction, alpha: float, W: StepGraphon | None = None, strict: bool = True, coverage_tol: float = DEFAULT_COVERAGE_TOL) -> ColoringReport:
    """Two colors: value < α -> 1, value >= α -> 2 (values equal to α still count as uncovered)."""
    rep = partition_by_regions(values, threshold_regions(alpha, coverage_tol), W, strict)
    colors = np.where(values.values[:, 0] >= alpha, 2, 1)
    return ColoringReport(ColoredStepGraphon(rep.result.base, colors), rep.uncovered_mass, rep.boundary_blocks, rep.uncovered_blocks, values)


def threshold_cluster(W: StepGraphon, H: LabelledGraph, alpha: float, strict: bool = True, coverage_tol: float = DEFAULT_COVERAGE_TOL) -> ColoringReport:
    if not 0 < alpha < 1:
        raise GraphonError("alpha must lie in (0, 1)")
    return threshold_partition(labelled_density(H, W), alpha, W, strict, coverage_tol)


def cluster(W: StepGraphon, stat: NodeStatistic, regions, strict: bool = True) -> ColoringReport:
    """F(W) for a statistic and either a RegionSet or a threshold α (1-d statistics)."""
    values = stat(W)
    if isinstance(regions, RegionSet):
        return partition_by_regions(values, regions, W, strict)
    return threshold_partition(values, float(regions), W, strict)


# -- experiments and checks ----------------------------------------------------------


def consistency_experiment(W0: StepGraphon, stat: NodeStatistic, regions, n_grid, trials: int, seed: int, steps: int | None = None, workers: int = 1) -> Table:
    """Colored cut-distance upper bounds between F(𝔾(n, W0)) and F(W0).

    Samples are relabeled by latent position; their statistics are colored
    without the coverage check and the uncovered mass is reported.  For a
    spectral statistic the gaps between the embedding eigenvalues of W'_n and
    W'_0 are reported as ``eig_gap_i``; samples where the embedding is
    undefined get a ``precondition_failure`` row instead of a distance.
    """
    n_grid = _check_grid(n_grid, trials)
    limit = cluster(W0, stat, regions, strict=True)
    if limit.uncovered_mass > 0:
        raise CoverageError("the limit graphon's statistic must lie inside the regions", uncovered_mass=limit.uncovered_mass)
    spectral = isinstance(stat, SpectralEmbedding)
    lam0 = stat.details(W0).kernel_eigenvalues if spectral else None

    def one(job):
        n, t = job
        s = derive_seed(seed, n, t)
        G, H = sample_with_latent(n, W0, s)
        Wn = graph_to_graphon(G.relabeled(latent_order(H)))
        out = []
        try:
            if spectral:
                emb = stat.details(Wn)
                values = emb.function
                out += [(f"eig_gap_{i + 1}", abs(a - b)) for i, (a, b) in enumerate(zip(emb.kernel_eigenvalues, lam0))]
            else:
                values = stat(Wn)
        except PreconditionFailure:
            return [("precondition_failure", 1.0)]
        if isinstance(regions, RegionSet):
            rep = partition_by_regions(values, regions, Wn, strict=False)
        else:
            rep = threshold_partition(values, float(regions), Wn, strict=False)
        d = colored_cut_distance_upper(rep.result, limit.result, n, mode="anneal", seed=s, steps=steps)
        return [("colored_distance", d), ("uncovered_mass", rep.uncovered_mass)] + out

    jobs = [(n, t) for n in n_grid for t in range(trials)]
    table = Table(notes={"limit_colors": limit.colors.tolist()})
    for (n, t), res in zip(jobs, run_trials(one, jobs, workers)):
        for stat_name, val in res:
            table.add(n, t, stat_name, val)
    return table


@dataclass(frozen=True)
class LipschitzResult:
    lhs: float
    rhs: float
    cut_term: float
    statistic_distance: float
    color_term: float


def lipschitz_check(W1: StepGraphon, W2: StepGraphon, stat: NodeStatistic, regions: RegionSet) -> LipschitzResult:
    """lhs = ||F(W1) - F(W2)||□^S, rhs = ||W1 - W2||□ + d_1(f(W1), f(W2)) / d_min.

    Both statistics must lie inside the regions everywhere.
    """
    if regions.d_min is None:
        raise GraphonError("lipschitz_check needs regions with a separation d_min")
    r1 = cluster(W1, stat, regions)
    r2 = cluster(W2, stat, regions)
    for r in (r1, r2):
        if r.uncovered_mass > 0:
            raise CoverageError("statistic leaves the regions", uncovered_mass=r.uncovered_mass)
    cut = cut_norm_exact(W1 - W2)
    lhs = colored_cut_norm(r1.result, r2.result)
    dist = function_l1_distance(r1.values, r2.values)
    return LipschitzResult(lhs, cut + dist / regions.d_min, cut, dist, lhs - cut)


def erdos_renyi_demo(H: LabelledGraph, alpha: float = 0.5, eps_grid=(0.1, 0.01, 0.001)) -> list[dict]:
    """Constants p = α^{1/|E(H)|} ∓ ε straddling the threshold of the labelled density of H.

    The two colorings are constant with different colors, so the colored cut
    norm is ||W1 - W2||□ + 2 while ||W1 - W2||□ = 2ε.
    """
    e = H.base.num_edges
    if e == 0:
        raise GraphonError("H needs at least one edge")
    p0 = alpha ** (1.0 / e)
    rows = []
    for eps in eps_grid:
        p1, p2 = p0 - eps, p0 + eps
        if not (0 <= p1 and p2 <= 1):
            raise GraphonError(f"ε = {eps} leaves [0, 1]")
        W1, W2 = StepGraphon.constant(p1), StepGraphon.constant(p2)
        r1 = threshold_cluster(W1, H, alpha)
        r2 = threshold_cluster(W2, H, alpha)
        cut = cut_norm_exact(W1 - W2)
        colored = colored_cut_norm(r1.result, r2.result)
        rows.append({
            "eps": eps,
            "p1": p1,
            "p2": p2,
            "cut_norm": cut,
            "gap": p2 - p1,
            "colored_cut_norm": colored,
            "ratio": colored / cut,
        })
    return rows


def random_covered_pair(rng: np.random.Generator, d_min: float, k_max: int = 8, max_tries: int = 1000):
    """Random graphon W1 (random masses and values, k <= k_max), a random
    perturbation W2 of it, and threshold regions (-inf, c - d/2), (c + d/2, inf)
    placed in a gap of width > d_min between their block degrees."""
    for _ in range(max_tries):
        k = int(rng.integers(1, k_max + 1))
        masses = rng.dirichlet(np.ones(k))
        if masses.min() <= 1e-6:
            continue
        masses = masses / masses.sum()
        A = rng.random((k, k))
        V1 = np.triu(A) + np.triu(A, 1).T
        scale = rng.uniform(0.0, 0.5)
        B = rng.uniform(-scale, scale, (k, k))
        V2 = np.clip(V1 + np.triu(B) + np.triu(B, 1).T, 0.0, 1.0)
        try:
            W1 = StepGraphon(masses, V1)
            W2 = StepGraphon(masses, V2)
        except GraphonError:
            continue
        pts = np.sort(np.concatenate([[-1.0], V1 @ W1.masses, V2 @ W2.masses, [2.0]]))
        gaps = np.diff(pts)
        ok = np.flatnonzero(gaps > d_min + 1e-9)
        if ok.size == 0:
            continue
        i = int(ok[rng.integers(ok.size)])
        c = (pts[i] + pts[i + 1]) / 2
        regions = RegionSet((Box.interval(None, c - d_min / 2), Box.interval(c + d_min / 2, None)), d_min=d_min)
        return W1, W2, regions
    raise GraphonError("could not draw a covered pair")


def lipschitz_sweep(count: int, seed: int, d_min: float = 0.2, k_max: int = 8) -> list[LipschitzResult]:
    """lipschitz_check on ``count`` random covered pairs under the degree statistic."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        W1, W2, regions = random_covered_pair(rng, d_min, k_max)
        out.append(lipschitz_check(W1, W2, Degree(), regions))
    return out


# -- degree-mass example -------------------------------------------------------------


@dataclass(frozen=True)
class DegreeMassSetup:
    """W0 on blocks (Y_1, ..., Y_r, Z): value α everywhere except ``z_value`` on Z × Z.

    Every point of Y = Y_1 ∪ ... ∪ Y_r then has degree exactly α.  The
    default masses are dyadic so that this holds in floating point too.
    """

    y_masses: tuple = (0.125, 0.375)
    z_mass: float = 0.5
    alpha: float = 0.5
    z_value: float = 0.75

    @property
    def masses(self) -> np.ndarray:
        return np.array(list(self.y_masses) + [self.z_mass])

    def base(self) -> StepGraphon:
        r = len(self.y_masses)
        V = np.full((r + 1, r + 1), self.alpha)
        V[r, r] = self.z_value
        return StepGraphon(self.masses, V, graphon=True)

    def perturbed(self, y_prime, eps: float) -> StepGraphon:
        """W_{Y',ε}: ε + (1-ε)W0 on Y'×Y', (1-ε)W0 on Y''×Y'', W0 elsewhere."""
        r = len(self.y_masses)
        yp = sorted(set(int(i) for i in y_prime))
        ypp = [i for i in range(r) if i not in yp]
        if not yp or not ypp or any(not 0 <= i < r for i in yp):
            raise GraphonError("Y' and Y'' must both be nonempty unions of Y blocks")
        if not 0 <= eps <= 1:
            raise GraphonError("eps must lie in [0, 1]")
        V = self.base().values.copy()
        V[np.ix_(yp, yp)] = eps + (1 - eps) * V[np.ix_(yp, yp)]
        V[np.ix_(ypp, ypp)] = (1 - eps) * V[np.ix_(ypp, ypp)]
        return StepGraphon(self.masses, V, graphon=True)


def inconsistency_demo_degree_mass(eps_grid=(0.2, 0.1, 0.05), setup: DegreeMassSetup | None = None, splits=((0,), (1,))) -> dict:
    """Two choices of Y' whose perturbations converge to W0 but cluster Y differently.

    Degree clustering at α colors Y' with color 2 (degree above α) and Y''
    with color 1; swapping the roles of the parts flips the colors on all of Y.
    At ε = 0 the statistic sits on α over Y and clustering raises
    :class:`CoverageError`.
    """
    setup = setup or DegreeMassSetup()
    W0 = setup.base()
    stat = Degree()
    rows = []
    for eps in eps_grid:
        Wa = setup.perturbed(splits[0], eps)
        Wb = setup.perturbed(splits[1], eps)
        ra = cluster(Wa, stat, setup.alpha)
        rb = cluster(Wb, stat, setup.alpha)
        colored = colored_cut_norm(ra.result, rb.result)
        rows.append({
            "eps": eps,
            "cut_norm_a": cut_norm_exact(Wa - W0),
            "cut_norm_b": cut_norm_exact(Wb - W0),
            "colors_a": ra.colors.tolist(),
            "colors_b": rb.colors.tolist(),
            "differing_mass": float(setup.masses[ra.colors != rb.colors].sum()),
            "color_mismatch": colored - cut_norm_exact(Wa - Wb),
            "colored_cut_norm": colored,
        })
    part = [float(setup.masses[list(s)].sum()) for s in splits]
    return {
        "masses": setup.masses.tolist(),
        "alpha": setup.alpha,
        "y_mass": float(sum(setup.y_masses)),
        "min_part_mass": min(part),
        "rows": rows,
    }
