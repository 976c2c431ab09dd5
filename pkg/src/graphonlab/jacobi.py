"""Cyclic Jacobi eigensolver for real symmetric matrices.

Each sweep visits every pair (p, q) once using the round-robin ordering, in
which the n/2 pairs of a round are disjoint; their rotations commute and are
applied together.
"""

from __future__ import annotations

import numpy as np

from .errors import GraphonError

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 60
# above this size the LAPACK solver is used instead (same ordering applied)
JACOBI_MAX_N = 256


def _rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    players = list(range(n)) + ([n] if n % 2 else [])
    m = len(players)
    out = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        out.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return out


def off_norm(A: np.ndarray) -> float:
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(A, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix.

    Iterates until the off-diagonal Frobenius norm is at most
    ``tol * max(1, ||A||_F)``.
    """
    A = np.array(A, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphonError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-14 * max(1.0, np.abs(A).max(initial=0.0))):
        raise GraphonError("matrix must be symmetric")
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    target = tol * max(1.0, float(np.linalg.norm(A)))
    rounds = _rounds(n)
    for _ in range(max_sweeps):
        if off_norm(A) <= target:
            break
        for p, q in rounds:
            apq = A[p, q]
            app, aqq = A[p, p], A[q, q]
            active = apq != 0.0
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            c = np.where(active, c, 1.0)
            s = np.where(active, s, 0.0)
            # A <- J^T A J, rows then columns
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            vp, vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = vp * c - vq * s
            V[:, q] = vp * s + vq * c
    else:
        if off_norm(A) > target:
            raise ArithmeticError("Jacobi iteration did not converge")
    return A.diagonal().copy(), V


def symmetric_eigh(A, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    if A.shape[0] <= JACOBI_MAX_N:
        return jacobi_eigh(A, tol)
    w, V = np.linalg.eigh((A + A.T) / 2)
    return w, V


def spectral_order(w: np.ndarray, decimals: int = 12) -> np.ndarray:
    """Indices sorting by decreasing |λ|, ties broken by decreasing λ."""
    mag = np.round(np.abs(w), decimals)
    return np.lexsort((-w, -mag))
