"""Command-line interface: ``graphonlab <command> ...``.

Exit status 0 on success, 1 on bad input (diagnostic on stderr), 2 when a
numerical precondition fails; the latter prints ``reason=<code>`` on stderr
and a JSON object with the same code on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import families
from .clustering import (
    Degree,
    LabelledHomDensity,
    SpectralEmbedding,
    cluster,
    consistency_experiment,
    inconsistency_demo_degree_mass,
    lipschitz_sweep,
)
from .colored import (
    ColoredGraph,
    ColoredStepGraphon,
    colored_cut_distance_upper,
    colored_cut_norm,
    colored_hom_density_graph,
    colored_hom_density_graphon,
    sample_colored,
)
from .cutnorm import cut_distance_upper, cut_norm_exact, cut_norm_lower, cut_norm_upper, exact_limit, op_norm_inf_to_1
from .errors import GraphonError, PreconditionFailure
from .homomorphism import LabelledGraph, hom_density_graph, hom_density_graphon, motif
from .io import format_edge_list, graphon_to_dict, read_graph, read_graphon, read_regions
from .regions import DEFAULT_COVERAGE_TOL, RegionSet
from .sampling import concentration_curve, sample_graph, sample_weighted
from .spectral import (
    DEFAULT_GAP_TOL,
    cutoff,
    eigendecompose,
    embedding_details,
    enormlap_demo,
    laplacian_convergence_experiment,
    normalized_laplacian_spectrum,
    phyper_diagnostic,
    unnormalized_laplacian_spectrum,
    weighted_kmeans,
)

EXPERIMENTS = (
    "consistency",
    "concentration",
    "laplacian-convergence",
    "enormlap-demo",
    "phyper-diagnostic",
    "degree-mass-demo",
    "lipschitz-sweep",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise GraphonError(f"{self.prog}: {message}")


def load_graphon(source: str):
    """``file:path.json`` or a built-in family such as ``const:0.5``."""
    if source.startswith("file:"):
        return read_graphon(source[5:])
    if source.endswith(".json") and ":" not in source:
        return read_graphon(source)
    return families.from_spec(source)


def _split(W):
    return (W.base, W) if isinstance(W, ColoredStepGraphon) else (W, None)


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise GraphonError(f"expected comma-separated integers, got {text!r}") from None


@dataclass
class ExperimentConfig:
    name: str
    graphon: str | None = None
    statistic: str = "degree"
    motif: str = "K2"
    m: int = 2
    alpha: float | None = None
    regions: str | None = None
    n_grid: list = field(default_factory=list)
    trials: int = 1
    seed: int | None = None
    gap_tol: float = DEFAULT_GAP_TOL
    coverage_tol: float = DEFAULT_COVERAGE_TOL
    extra: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.name not in EXPERIMENTS:
            raise GraphonError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.n_grid and any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise GraphonError("--n-grid must be strictly increasing")
        if self.trials < 1:
            raise GraphonError("--trials must be at least 1")
        for src in (self.graphon, self.regions):
            if src and src.startswith("file:") and not Path(src[5:]).exists():
                raise GraphonError(f"file not found: {src[5:]}")
        if self.regions and not self.regions.startswith("file:") and not Path(self.regions).exists():
            raise GraphonError(f"file not found: {self.regions}")
        return self

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise GraphonError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise GraphonError(f"invalid JSON in {path}: {exc}") from None
        known = set(cls.__dataclass_fields__) - {"extra"}
        cfg = cls(**{k: v for k, v in data.items() if k in known})
        cfg.extra = {k: v for k, v in data.items() if k not in known}
        return cfg.validate()


# -- output -------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _cell(v):
    if isinstance(v, np.generic):
        v = v.item()
    return repr(v) if isinstance(v, float) else v


def emit(args, payload: dict, header=None, rows=None) -> None:
    if args.format == "csv" and header is not None:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        text = buf.getvalue()
    else:
        text = json.dumps(_plain(payload), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _need_seed(args):
    if args.seed is None:
        raise GraphonError("this command is randomized; pass --seed")
    return args.seed


# -- commands ------------------------------------------------------------------


def cmd_density(args):
    H = motif(args.motif)
    colored_motif = args.motif_colors is not None
    if colored_motif:
        H = ColoredGraph(H, _ints(args.motif_colors))
    if args.graph:
        G = read_graph(args.graph)
        if colored_motif:
            if not isinstance(G, ColoredGraph):
                raise GraphonError("a colored motif needs a colored graph")
            value = colored_hom_density_graph(H, G)
        else:
            value = hom_density_graph(H, G.base if isinstance(G, ColoredGraph) else G)
    elif args.graphon:
        base, col = _split(load_graphon(args.graphon))
        if colored_motif:
            col = col or ColoredStepGraphon.uniform(base)
            value = colored_hom_density_graphon(H, col)
        else:
            value = hom_density_graphon(H, base)
    else:
        raise GraphonError("pass --graphon or --graph")
    emit(args, {"motif": args.motif, "density": value}, ["motif", "density"], [[args.motif, value]])


def cmd_cutnorm(args):
    W1, c1 = _split(load_graphon(args.graphon))
    K = W1
    if args.graphon2:
        W2, c2 = _split(load_graphon(args.graphon2))
        K = W1 - W2
    payload = {"method": args.method}
    if args.method == "exact":
        payload["cut_norm"] = cut_norm_exact(K)
        if args.graphon2 and c1 is not None and c2 is not None:
            payload["colored_cut_norm"] = colored_cut_norm(c1, c2)
    elif args.method == "lower":
        payload["cut_norm_lower"] = cut_norm_lower(K, args.restarts, _need_seed(args))
    elif args.method == "upper":
        payload["cut_norm_upper"] = cut_norm_upper(K)
    else:
        payload["op_norm_inf_to_1"] = op_norm_inf_to_1(K)
    payload["exact_limit"] = exact_limit()
    key = [k for k in payload if k not in ("method", "exact_limit")]
    emit(args, payload, key, [[payload[k] for k in key]])


def cmd_cutdist(args):
    A, B = load_graphon(args.graphon), load_graphon(args.graphon2)
    # exhaustive search is deterministic and needs no seed
    seed = _need_seed(args) if args.mode == "anneal" else (args.seed or 0)
    colored = isinstance(A, ColoredStepGraphon) and isinstance(B, ColoredStepGraphon)
    if colored:
        value = colored_cut_distance_upper(A, B, args.n, args.mode, seed)
    else:
        value = cut_distance_upper(_split(A)[0], _split(B)[0], args.n, args.mode, seed)
    key = "colored_cut_distance_upper" if colored else "cut_distance_upper"
    emit(args, {key: value, "n": args.n, "mode": args.mode}, [key], [[value]])


def cmd_sample(args):
    seed = _need_seed(args)
    W = load_graphon(args.graphon)
    if args.weighted:
        H = sample_weighted(args.n, _split(W)[0], seed)
        rows = [[i + 1, j + 1, H.weights[i, j]] for i in range(H.n) for j in range(i + 1, H.n)]
        emit(args, {"n": H.n, "x": H.x, "weights": H.weights}, ["u", "v", "weight"], rows)
        return
    G = sample_colored(args.n, W, seed) if isinstance(W, ColoredStepGraphon) else sample_graph(args.n, W, seed)
    if args.format == "json":
        base = G.base if isinstance(G, ColoredGraph) else G
        payload = {"n": base.n, "edges": [[u + 1, v + 1] for u, v in base.edges]}
        if isinstance(G, ColoredGraph):
            payload["colors"] = G.colors
        emit(args, payload)
    else:
        text = format_edge_list(G)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)


def _statistic(args):
    if args.statistic == "degree":
        return Degree()
    if args.statistic == "hom":
        return LabelledHomDensity(LabelledGraph(motif(args.motif), (0,)))
    if args.statistic == "spectral":
        return SpectralEmbedding(args.m, args.tol_gap, args.tol_cover)
    raise GraphonError(f"unknown statistic {args.statistic!r}")


def _regions(args):
    if args.regions:
        R = read_regions(args.regions[5:] if args.regions.startswith("file:") else args.regions)
        return RegionSet(R.boxes, R.d_min, args.tol_cover)
    if args.alpha is not None:
        return float(args.alpha)
    raise GraphonError("pass --alpha or --regions")


def cmd_cluster(args):
    W = _split(load_graphon(args.graphon))[0]
    rep = cluster(W, _statistic(args), _regions(args), strict=not args.no_strict)
    payload = {
        "colors": rep.colors,
        "masses": W.masses,
        "statistic": rep.values.values,
        "uncovered_mass": rep.uncovered_mass,
        "boundary_blocks": [b + 1 for b in rep.boundary_blocks],
    }
    rows = [[b + 1, W.masses[b], int(rep.colors[b])] for b in range(W.k)]
    emit(args, payload, ["block", "mass", "color"], rows)


def cmd_spectral(args):
    W = _split(load_graphon(args.graphon))[0]
    if args.embedding:
        emb = embedding_details(W, args.embedding, args.tol_gap, args.tol_cover)
        F = emb.function.values
        payload = {
            "masses": W.masses,
            "embedding": F,
            "kernel_eigenvalues": emb.kernel_eigenvalues,
            "laplacian_eigenvalues": emb.laplacian_eigenvalues,
            "excluded_near_one": emb.excluded,
            "sign_fallback": list(emb.sign_fallback),
            "max_normalized": emb.max_normalized,
        }
        header = ["block", "mass"] + [f"f{i + 1}" for i in range(F.shape[1])]
        rows = [[b + 1, W.masses[b], *F[b].tolist()] for b in range(W.k)]
        emit(args, payload, header, rows)
        return
    if args.cutoff is not None:
        K = cutoff(W, args.cutoff, args.tol_gap)
        emit(args, graphon_to_dict(K))
        return
    if args.normalized:
        spec = normalized_laplacian_spectrum(W, args.tol_gap)
    elif args.laplacian:
        spec = unnormalized_laplacian_spectrum(W, args.tol_gap)
    else:
        spec = eigendecompose(W, args.tol_gap)
    gaps = list(spec.gaps) + [float("nan")]
    rows = [[i + 1, float(lam), float(g), bool(s)] for i, (lam, g, s) in enumerate(zip(spec.eigenvalues, gaps, spec.simple))]
    payload = {
        "eigenvalues": spec.eigenvalues,
        "gaps": spec.gaps,
        "simple": spec.simple,
        "sign_fallback": list(spec.sign_fallback),
    }
    emit(args, payload, ["index", "eigenvalue", "gap", "simple_flag"], rows)


def _table_output(args, table, extra=None):
    payload = {"summary": table.summary(), "notes": table.notes}
    if extra:
        payload.update(extra)
    payload["rows"] = [list(r) for r in table.rows]
    emit(args, payload, ["n", "trial", "statistic", "value"], table.rows)


def cmd_experiment(args):
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig(
            name=args.name,
            graphon=args.graphon,
            statistic=args.statistic,
            motif=args.motif,
            m=args.m,
            alpha=args.alpha,
            regions=args.regions,
            n_grid=_ints(args.n_grid) if args.n_grid else [],
            trials=args.trials,
            seed=args.seed,
            gap_tol=args.tol_gap,
            coverage_tol=args.tol_cover,
        ).validate()
    name = cfg.name
    if name in ("consistency", "concentration", "laplacian-convergence", "lipschitz-sweep") and cfg.seed is None:
        raise GraphonError("this experiment is randomized; pass --seed")
    if name in ("consistency", "concentration", "laplacian-convergence") and not cfg.n_grid:
        raise GraphonError("pass --n-grid")
    if name == "consistency":
        W0 = _split(load_graphon(cfg.graphon or "planted-masses:0.8,0.2,0.25,0.75"))[0]
        stat = SpectralEmbedding(cfg.m, cfg.gap_tol, cfg.coverage_tol) if cfg.statistic == "spectral" else (
            LabelledHomDensity(LabelledGraph(motif(cfg.motif), (0,))) if cfg.statistic == "hom" else Degree()
        )
        if cfg.regions:
            regions = read_regions(cfg.regions[5:] if cfg.regions.startswith("file:") else cfg.regions)
        elif cfg.statistic == "spectral":
            regions, _ = weighted_kmeans(stat(W0), cfg.extra.get("clusters", W0.k), seed=cfg.seed)
        elif cfg.alpha is not None:
            regions = cfg.alpha
        else:
            raise GraphonError("pass --alpha or --regions")
        table = consistency_experiment(W0, stat, regions, cfg.n_grid, cfg.trials, cfg.seed)
        _table_output(args, table)
    elif name == "concentration":
        W0 = _split(load_graphon(cfg.graphon or "planted:2,0.8,0.2"))[0]
        _table_output(args, concentration_curve(W0, cfg.n_grid, cfg.trials, cfg.seed))
    elif name == "laplacian-convergence":
        W0 = _split(load_graphon(cfg.graphon or "planted:2,0.8,0.2"))[0]
        _table_output(args, laplacian_convergence_experiment(W0, cfg.n_grid, cfg.trials, cfg.seed))
    elif name == "enormlap-demo":
        rep = enormlap_demo(cfg.extra.get("blocks", 3), cfg.extra.get("delta", 0.1), tuple(cfg.n_grid) or (1, 2, 4, 8, 16, 32), cfg.gap_tol)
        rows = [[r["n"], r["cut_norm"], r["normalized_identical"], r["spectrum_max_diff"]] for r in rep["rows"]]
        emit(args, rep, ["n", "cut_norm", "normalized_identical", "spectrum_max_diff"], rows)
    elif name == "phyper-diagnostic":
        g = lambda x: 0.5 + x / 2
        ks = tuple(cfg.n_grid) or (16, 64, 256)
        res = phyper_diagnostic(g, ks)
        keys = list(res[0])
        emit(args, {"rows": res}, keys, [[r[k] for k in keys] for r in res])
    elif name == "degree-mass-demo":
        rep = inconsistency_demo_degree_mass()
        keys = ["eps", "cut_norm_a", "cut_norm_b", "differing_mass", "colored_cut_norm"]
        emit(args, rep, keys, [[r[k] for k in keys] for r in rep["rows"]])
    elif name == "lipschitz-sweep":
        count = cfg.trials
        res = lipschitz_sweep(count, cfg.seed, cfg.extra.get("d_min", 0.2))
        rows = [[i, r.lhs, r.rhs, r.cut_term, r.statistic_distance] for i, r in enumerate(res)]
        viol = sum(1 for r in res if r.lhs > r.rhs + 1e-9)
        emit(args, {"pairs": count, "violations": viol, "rows": rows}, ["pair", "lhs", "rhs", "cut_norm", "statistic_l1"], rows)


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--seed", type=int, help="seed for randomized commands")
    common.add_argument("--tol-gap", type=float, default=DEFAULT_GAP_TOL, help="eigenvalue simplicity gap")
    common.add_argument("--tol-cover", type=float, default=DEFAULT_COVERAGE_TOL, help="allowed uncovered mass")

    p = _Parser(prog="graphonlab", description="Step-graphon numerics toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("density", parents=[common], help="homomorphism densities")
    d.add_argument("--motif", required=True)
    d.add_argument("--motif-colors", help="comma-separated colors of the motif vertices")
    d.add_argument("--graphon")
    d.add_argument("--graph", help="edge-list file")
    d.set_defaults(func=cmd_density)

    c = sub.add_parser("cutnorm", parents=[common], help="cut norm of a kernel or of a difference")
    c.add_argument("--graphon", required=True)
    c.add_argument("--graphon2")
    c.add_argument("--method", choices=("exact", "lower", "upper", "inf1"), default="exact")
    c.add_argument("--restarts", type=int, default=20)
    c.set_defaults(func=cmd_cutnorm)

    cd = sub.add_parser("cutdist", parents=[common], help="cut-distance upper bound")
    cd.add_argument("--graphon", required=True)
    cd.add_argument("--graphon2", required=True)
    cd.add_argument("--n", type=int, required=True)
    cd.add_argument("--mode", choices=("exhaustive", "anneal"), default="anneal")
    cd.set_defaults(func=cmd_cutdist)

    s = sub.add_parser("sample", parents=[common], help="sample G(n, W) or H(n, W)")
    s.add_argument("--graphon", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--weighted", action="store_true", help="emit H(n, W) instead of G(n, W)")
    s.set_defaults(func=cmd_sample)

    cl = sub.add_parser("cluster", parents=[common], help="clustering map F(W)")
    cl.add_argument("--graphon", required=True)
    cl.add_argument("--statistic", choices=("degree", "hom", "spectral"), default="degree")
    cl.add_argument("--motif", default="K2", help="motif for the hom statistic, labelled at its first vertex")
    cl.add_argument("--m", type=int, default=1)
    cl.add_argument("--alpha", type=float)
    cl.add_argument("--regions")
    cl.add_argument("--no-strict", action="store_true", help="report instead of failing on uncovered mass")
    cl.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("spectral", parents=[common], help="spectra and embeddings")
    sp.add_argument("--graphon", required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--normalized", action="store_true", help="normalized Laplacian spectrum")
    g.add_argument("--laplacian", action="store_true", help="unnormalized Laplacian spectrum")
    g.add_argument("--embedding", type=int, metavar="M", help="M-dimensional spectral embedding")
    g.add_argument("--cutoff", type=float, metavar="LAMBDA", help="cutoff graphon [W]_lambda")
    sp.set_defaults(func=cmd_spectral)

    e = sub.add_parser("experiment", parents=[common], help="run an experiment")
    e.add_argument("name", nargs="?", choices=EXPERIMENTS)
    e.add_argument("--config", help="JSON experiment configuration")
    e.add_argument("--graphon")
    e.add_argument("--statistic", choices=("degree", "hom", "spectral"), default="degree")
    e.add_argument("--motif", default="K2")
    e.add_argument("--m", type=int, default=2)
    e.add_argument("--alpha", type=float)
    e.add_argument("--regions")
    e.add_argument("--n-grid")
    e.add_argument("--trials", type=int, default=1)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "experiment" and not args.name and not args.config:
            raise GraphonError("name an experiment or pass --config")
        args.func(args)
    except PreconditionFailure as exc:
        sys.stderr.write(f"graphonlab: reason={exc.reason} {exc}\n")
        sys.stdout.write(json.dumps({"status": "precondition_failure", "reason": exc.reason, **_plain(exc.details)}) + "\n")
        return 2
    except (GraphonError, OSError) as exc:
        sys.stderr.write(f"graphonlab: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
