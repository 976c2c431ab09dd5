"""Named built-in graphon families addressable as ``name:params`` strings.

``const:p[,k]``
    W ≡ p on k equal blocks (default k = 1).
``planted:k,pin,pout``
    k equal blocks, value pin on diagonal blocks and pout elsewhere.
``rank1:a,b[,k]``
    W(x, y) = g(x) g(y) with g linear from a at x = 0 to b at x = 1,
    sampled at the midpoints of k equal blocks (default k = 64).
``blockdiag:m``
    U = Σ_i 1_{P_i × P_i} with masses μ_i = i / (1 + ... + m).
``planted-masses:pin,pout,m1,m2,...``
    planted partition with the given block masses.
"""

from __future__ import annotations

import numpy as np

from .errors import GraphonError
from .graphon import StepGraphon

DEFAULT_RANK1_K = 64


def constant(p: float, k: int = 1) -> StepGraphon:
    if not 0 <= p <= 1:
        raise GraphonError("p must lie in [0, 1]")
    return StepGraphon.constant(p, k)


def planted(k: int, p_in: float, p_out: float, masses=None) -> StepGraphon:
    if k < 1:
        raise GraphonError("k must be at least 1")
    V = np.full((k, k), float(p_out))
    np.fill_diagonal(V, p_in)
    masses = np.full(k, 1.0 / k) if masses is None else np.asarray(masses, dtype=float)
    return StepGraphon(masses, V, graphon=True)


def rank1(a: float, b: float, k: int = DEFAULT_RANK1_K) -> StepGraphon:
    x = (np.arange(k) + 0.5) / k
    g = a + (b - a) * x
    V = np.outer(g, g)
    return StepGraphon(np.full(k, 1.0 / k), (V + V.T) / 2, graphon=bool(V.min() >= 0 and V.max() <= 1))


def blockdiag(m: int) -> StepGraphon:
    if m < 1:
        raise GraphonError("m must be at least 1")
    masses = np.arange(1, m + 1, dtype=float)
    return StepGraphon(masses / masses.sum(), np.eye(m), graphon=True)


def _numbers(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise GraphonError(f"bad parameter list {text!r}") from None


def _count(x: float, what: str) -> int:
    if x != int(x):
        raise GraphonError(f"{what} must be an integer")
    return int(x)


def from_spec(spec: str) -> StepGraphon:
    """Parse ``name:params`` for a built-in family."""
    name, _, params = spec.partition(":")
    vals = _numbers(params)
    try:
        if name == "const" and len(vals) in (1, 2):
            return constant(vals[0], _count(vals[1], "k") if len(vals) == 2 else 1)
        if name == "planted" and len(vals) == 3:
            return planted(_count(vals[0], "k"), vals[1], vals[2])
        if name == "planted-masses" and len(vals) >= 3:
            return planted(len(vals) - 2, vals[0], vals[1], vals[2:])
        if name == "rank1" and len(vals) in (2, 3):
            return rank1(vals[0], vals[1], _count(vals[2], "k") if len(vals) == 3 else DEFAULT_RANK1_K)
        if name == "blockdiag" and len(vals) == 1:
            return blockdiag(_count(vals[0], "m"))
    except IndexError:
        pass
    raise GraphonError(f"unknown graphon family or wrong parameters: {spec!r}")
