"""Floating-point symmetric eigensolver used by the splitting iterations.

Cyclic Jacobi rotations applied to a whole stack of small symmetric blocks at
once.  Rotations are scheduled in round-robin (tournament) order so that each
round touches disjoint index pairs and can be applied as a single orthogonal
matrix per block.  A previous eigenvector basis can be passed in as a warm
start; consecutive splitting iterates change little, so one or two sweeps
usually suffice.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["jacobi_eigh", "psd_project", "round_robin"]

OFF_TOL = 1e-14


@lru_cache(maxsize=None)
def round_robin(k: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Rounds of disjoint ``(p, q)`` pairs, p < q, covering every pair once."""
    m = k + (k % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for t in range(m // 2):
            a, b = players[t], players[m - 1 - t]
            if a < k and b < k:
                ps.append(min(a, b))
                qs.append(max(a, b))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def jacobi_eigh(A, V0=None, tol: float = OFF_TOL, max_sweeps: int = 50):
    """Eigen-decompose a stack of symmetric matrices.

    ``A`` has shape ``(B, k, k)``.  Returns ``(w, V)`` with ``A = V diag(w) V^T``
    per block (eigenvalues unsorted).  Sweeps stop once every block's
    off-diagonal Frobenius norm is below ``tol`` times its overall norm.
    """
    A = np.array(A, dtype=float)
    if A.ndim == 2:
        w, V = jacobi_eigh(A[None], None if V0 is None else np.asarray(V0)[None], tol, max_sweeps)
        return w[0], V[0]
    nb, k, _ = A.shape
    if V0 is None:
        V = np.broadcast_to(np.eye(k), A.shape).copy()
    else:
        V = np.array(V0, dtype=float)
        A = V.transpose(0, 2, 1) @ A @ V
    if k == 1 or nb == 0:
        return A[:, np.arange(k), np.arange(k)].copy(), V
    scale = np.sqrt((A * A).sum(axis=(1, 2)))
    diag_mask = np.eye(k, dtype=bool)
    rounds = round_robin(k)
    eye = np.eye(k)
    for _ in range(max_sweeps):
        off = np.sqrt((A * A)[:, ~diag_mask].sum(axis=1))
        if np.all(off <= tol * scale):
            break
        for P, Q in rounds:
            apq = A[:, P, Q]
            app = A[:, P, P]
            aqq = A[:, Q, Q]
            nz = apq != 0.0
            safe = np.where(nz, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            J = np.broadcast_to(eye, A.shape).copy()
            J[:, P, P] = c
            J[:, Q, Q] = c
            J[:, P, Q] = s
            J[:, Q, P] = -s
            A = J.transpose(0, 2, 1) @ A @ J
            V = V @ J
    return A[:, np.arange(k), np.arange(k)].copy(), V


def psd_project(Z, V0=None, margin: float = 0.0, method: str = "jacobi"):
    """Frobenius projection of each block onto ``{X : X >= margin * I}``.

    Returns ``(X, V)`` where ``V`` is the eigenbasis (reusable as a warm start).
    """
    Z = 0.5 * (Z + Z.transpose(0, 2, 1))
    if method == "jacobi":
        w, V = jacobi_eigh(Z, V0)
    elif method == "lapack":
        w, V = np.linalg.eigh(Z)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    w = np.maximum(w, margin)
    return (V * w[:, None, :]) @ V.transpose(0, 2, 1), V
