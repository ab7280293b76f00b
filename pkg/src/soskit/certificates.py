"""Certificates of membership and refutation, and their exact checks.

The verifiers here never look at solver internals: a certificate is accepted
only if its squares re-expand to the target exactly, and a witness only if it
passes the exact dual test and pairs strictly negatively with the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .forms import Form, MultiIndex, fischer_inner, in_Fk, multiply, zero
from .moment import DEFAULT_SUBSET_CAP, dual_membership

__all__ = ["SosCertificate", "DualWitness", "verify_certificate", "verify_witness", "expand"]


@dataclass(frozen=True)
class SosCertificate:
    """A list of squares summing to the target.

    When ``exact`` is true the summands are :class:`Form` objects and
    ``sum(h*h) == p`` holds exactly.  Numeric certificates carry summands as
    ``{exponent: raw float coefficient}`` dicts plus the Gram blocks they came
    from, as ``(support, matrix)`` pairs.  Summands are only determined up to
    the usual orthogonal freedom; any rescaling with squared weights summing
    to one describes the same decomposition.
    """

    k: int
    summands: tuple
    exact: bool
    blocks: tuple = field(default=(), compare=False, repr=False)

    def __len__(self):
        return len(self.summands)

    def max_terms(self) -> int:
        return max((len(h.coeffs) if self.exact else len(h) for h in self.summands), default=0)


@dataclass(frozen=True)
class DualWitness:
    """A form ``q`` in the dual cone at level ``k`` with ``[p, q] < 0``."""

    q: Form
    pairing: Fraction
    k: int


def expand(summands, n: Optional[int] = None, d2: Optional[int] = None) -> Form:
    """Exact sum of squares of the given forms."""
    summands = list(summands)
    if not summands:
        if n is None or d2 is None:
            raise ValueError("shape needed to expand an empty certificate")
        return zero(n, d2)
    total = zero(summands[0].n, 2 * summands[0].d)
    for h in summands:
        total = total + multiply(h, h)
    return total


def verify_certificate(cert: SosCertificate, p: Form, k: Optional[int] = None) -> bool:
    """True iff the certificate is exact, k-sparse and re-expands to ``p``."""
    k = cert.k if k is None else k
    if not cert.exact:
        return False
    for h in cert.summands:
        if not isinstance(h, Form) or h.n != p.n or 2 * h.d != p.d or not in_Fk(h, k):
            return False
    return expand(cert.summands, p.n, p.d) == p


def verify_witness(w: DualWitness, p: Form, k: Optional[int] = None, cap: int = DEFAULT_SUBSET_CAP) -> bool:
    """True iff ``w.q`` lies in the level-k dual cone and ``[p, q] < 0``."""
    k = w.k if k is None else k
    if w.q.n != p.n or w.q.d != p.d:
        return False
    pairing = fischer_inner(p, w.q)
    if pairing >= 0 or pairing != w.pairing:
        return False
    return dual_membership(w.q, k, cap=cap, force=True).member


def numeric_summands(support: tuple[MultiIndex, ...], Q: np.ndarray, tol: float = 1e-12) -> list[dict]:
    """Pivoted Cholesky rows of a PSD block as raw-coefficient dicts."""
    A = np.array(Q, dtype=float)
    s = len(support)
    out = []
    scale = max(1.0, float(np.abs(A).max()) if A.size else 1.0)
    for _ in range(s):
        diag = np.diag(A)
        j = int(np.argmax(diag))
        if diag[j] <= tol * scale:
            break
        col = A[:, j] / np.sqrt(diag[j])
        A = A - np.outer(col, col)
        first = next((c for c in col if abs(c) > tol), 1.0)
        if first < 0:
            col = -col
        out.append({support[r]: float(col[r]) for r in range(s) if abs(col[r]) > tol})
    return out
