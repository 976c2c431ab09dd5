"""File formats.

Graphon JSON::

    {"masses": [m_1, ..., m_k], "values": [[...], ...], "graphon": true}

with an optional ``"colors": [c_1, ..., c_k]`` for colored graphons.  Floats
are written with ``repr`` precision so a round trip is bit-identical.

Edge list: the first non-comment line is ``n``; each further line ``u v`` is
an edge between 1-indexed vertices.  Colored graphs add one ``c v color``
line per vertex.  Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .colored import ColoredGraph, ColoredStepGraphon
from .errors import GraphonError
from .graphon import FiniteGraph, StepGraphon
from .regions import RegionSet


def graphon_to_dict(W: StepGraphon | ColoredStepGraphon) -> dict:
    colors = None
    if isinstance(W, ColoredStepGraphon):
        colors = W.colors.tolist()
        W = W.base
    d = {"masses": W.masses.tolist(), "values": W.values.tolist(), "graphon": W.graphon}
    if colors is not None:
        d["colors"] = colors
    return d


def graphon_from_dict(d: dict) -> StepGraphon | ColoredStepGraphon:
    try:
        masses, values = d["masses"], d["values"]
    except (KeyError, TypeError):
        raise GraphonError("graphon JSON needs 'masses' and 'values'") from None
    flag = d.get("graphon", True)
    if not isinstance(flag, bool):
        raise GraphonError("'graphon' must be true or false")
    try:
        W = StepGraphon(np.asarray(masses, dtype=float), np.asarray(values, dtype=float), flag)
    except (ValueError, TypeError) as exc:
        raise GraphonError(f"malformed graphon: {exc}") from None
    if "colors" in d:
        return ColoredStepGraphon(W, d["colors"])
    return W


def dumps_graphon(W) -> str:
    return json.dumps(graphon_to_dict(W))


def loads_graphon(text: str):
    try:
        return graphon_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise GraphonError(f"invalid JSON: {exc}") from None


def read_graphon(path) -> StepGraphon | ColoredStepGraphon:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphonError(f"cannot read {path}: {exc.strerror}") from None
    return loads_graphon(text)


def write_graphon(W, path) -> None:
    Path(path).write_text(dumps_graphon(W) + "\n")


def format_edge_list(G: FiniteGraph | ColoredGraph) -> str:
    colors = None
    if isinstance(G, ColoredGraph):
        colors = G.colors
        G = G.base
    lines = [str(G.n)]
    lines += [f"{u + 1} {v + 1}" for u, v in G.edges]
    if colors is not None:
        lines += [f"c {v + 1} {int(c)}" for v, c in enumerate(colors)]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> FiniteGraph | ColoredGraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphonError("empty edge list")
    try:
        n = int(lines[0])
    except ValueError:
        raise GraphonError(f"first line must be the vertex count, got {lines[0]!r}") from None
    edges, colors = [], {}
    for ln in lines[1:]:
        parts = ln.split()
        try:
            if parts[0] == "c":
                if len(parts) != 3:
                    raise ValueError
                v, c = int(parts[1]), int(parts[2])
                if not 1 <= v <= n:
                    raise GraphonError(f"color line for vertex {v} outside 1..{n}")
                colors[v - 1] = c
            else:
                if len(parts) != 2:
                    raise ValueError
                u, v = int(parts[0]), int(parts[1])
                if not (1 <= u <= n and 1 <= v <= n):
                    raise GraphonError(f"edge ({u}, {v}) has an endpoint outside 1..{n}")
                edges.append((u - 1, v - 1))
        except GraphonError:
            raise
        except (ValueError, IndexError):
            raise GraphonError(f"malformed edge-list line {ln!r}") from None
    G = FiniteGraph.from_edges(n, edges)
    if colors:
        if len(colors) != n:
            raise GraphonError("colored edge lists need a color line for every vertex")
        return ColoredGraph(G, [colors[v] for v in range(n)])
    return G


def read_graph(path) -> FiniteGraph | ColoredGraph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise GraphonError(f"cannot read {path}: {exc.strerror}") from None
    return parse_edge_list(text)


def read_regions(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise GraphonError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise GraphonError(f"invalid JSON in {path}: {exc}") from None
    return RegionSet.from_json(data)
