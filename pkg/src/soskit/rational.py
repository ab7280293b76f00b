"""Exact linear algebra over ``Fraction``.

Matrices are lists of lists of Fractions; sizes here are small (a few dozen
rows at most) so plain Python elimination is adequate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import NotSymmetric

Matrix = list[list[Fraction]]
Vector = list[Fraction]

__all__ = [
    "PsdVerdict",
    "as_matrix",
    "is_psd_exact",
    "ldl_factors",
    "quad_form",
    "solve_consistent",
    "matmul",
    "transpose",
    "det",
    "independent_rows",
    "inverse",
]


def as_matrix(M) -> Matrix:
    return [[Fraction(x) for x in row] for row in M]


def transpose(M: Matrix) -> Matrix:
    return [list(col) for col in zip(*M)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def quad_form(M: Matrix, v: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for i, vi in enumerate(v):
        if vi:
            row = M[i]
            total += vi * sum((row[j] * vj for j, vj in enumerate(v) if vj), Fraction(0))
    return total


@dataclass
class PsdVerdict:
    """Outcome of exact symmetric elimination.

    When ``is_psd`` is false, ``witness_vector`` satisfies ``v^T M v < 0``.
    ``pivot_trace`` lists ``(index, pivot)`` pairs in elimination order, and
    ``factors`` holds ``(weight, vector)`` pairs with ``M = sum w v v^T`` when
    the matrix is PSD.
    """

    is_psd: bool
    witness_vector: Optional[Vector] = None
    pivot_trace: list[tuple[int, Fraction]] = field(default_factory=list)
    factors: list[tuple[Fraction, Vector]] = field(default_factory=list)


def _check_symmetric(M: Matrix):
    n = len(M)
    for row in M:
        if len(row) != n:
            raise NotSymmetric("matrix is not square")
    for i in range(n):
        for j in range(i + 1, n):
            if M[i][j] != M[j][i]:
                raise NotSymmetric(f"entries ({i},{j}) and ({j},{i}) differ")


def is_psd_exact(M) -> PsdVerdict:
    """Decide ``x^T M x >= 0`` for all x by symmetric rational elimination.

    Pivots on strictly positive diagonal entries of the running Schur
    complement.  A negative diagonal entry, or a zero diagonal entry with a
    nonzero off-diagonal partner, yields an explicit witness vector mapped back
    to the original coordinates.
    """
    M = as_matrix(M)
    _check_symmetric(M)
    n = len(M)
    S = [row[:] for row in M]
    # cols[j]^T M cols[l] == S[j][l] for remaining j, l
    cols = [[Fraction(int(r == j)) for r in range(n)] for j in range(n)]
    remaining = list(range(n))
    verdict = PsdVerdict(is_psd=True)

    def lift(y: dict[int, Fraction]) -> Vector:
        x = [Fraction(0)] * n
        for j, yj in y.items():
            for r in range(n):
                if cols[j][r]:
                    x[r] += yj * cols[j][r]
        return x

    while remaining:
        neg = next((j for j in remaining if S[j][j] < 0), None)
        if neg is not None:
            verdict.is_psd = False
            verdict.witness_vector = lift({neg: Fraction(1)})
            return verdict
        piv = next((j for j in remaining if S[j][j] > 0), None)
        if piv is None:
            for i in remaining:
                for j in remaining:
                    if i != j and S[i][j] != 0:
                        # on span(e_i, e_j) the form is 2*b*x*y + c*y^2 with c >= 0
                        b, c = S[i][j], S[j][j]
                        verdict.is_psd = False
                        verdict.witness_vector = lift({i: -(c + 1) / (2 * b), j: Fraction(1)})
                        return verdict
            return verdict
        d = S[piv][piv]
        v = [S[r][piv] for r in range(n)]
        verdict.pivot_trace.append((piv, d))
        verdict.factors.append((1 / d, v))
        remaining.remove(piv)
        for j in remaining:
            f = S[piv][j] / d
            if f:
                cj, cp = cols[j], cols[piv]
                for r in range(n):
                    if cp[r]:
                        cj[r] -= f * cp[r]
        for i in remaining:
            if v[i]:
                vi = v[i] / d
                Si = S[i]
                for j in remaining:
                    if v[j]:
                        Si[j] -= vi * v[j]
        for r in range(n):
            S[piv][r] = S[r][piv] = Fraction(0)
    return verdict


def ldl_factors(M) -> list[tuple[Fraction, Vector]]:
    """``(weight, vector)`` pairs with ``M = sum weight * v v^T``, weights > 0.

    Raises ``ValueError`` if M is not PSD.
    """
    verdict = is_psd_exact(M)
    if not verdict.is_psd:
        raise ValueError("matrix is not positive semidefinite")
    return verdict.factors


def solve_consistent(A: Matrix, b: Vector) -> Optional[Vector]:
    """Some exact solution of ``A x = b`` (free variables set to 0), or None."""
    m = len(A)
    ncols = len(A[0]) if m else 0
    R = [list(map(Fraction, A[i])) + [Fraction(b[i])] for i in range(m)]
    pivots = []
    row = 0
    for col in range(ncols):
        pr = next((r for r in range(row, m) if R[r][col] != 0), None)
        if pr is None:
            continue
        R[row], R[pr] = R[pr], R[row]
        inv = 1 / R[row][col]
        R[row] = [x * inv for x in R[row]]
        for r in range(m):
            if r != row and R[r][col] != 0:
                f = R[r][col]
                R[r] = [x - f * y for x, y in zip(R[r], R[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    for r in range(row, m):
        if R[r][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        x[col] = R[r][ncols]
    return x


def det(M) -> Fraction:
    """Exact determinant by fraction elimination."""
    A = as_matrix(M)
    n = len(A)
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pr = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != col:
            A[col], A[pr] = A[pr], A[col]
            sign = -sign
        piv = A[col][col]
        result *= piv
        for r in range(col + 1, n):
            f = A[r][col] / piv
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return sign * result


def independent_rows(A: Matrix) -> list[int]:
    """Indices of a maximal set of linearly independent rows (greedy, in order)."""
    basis: list[tuple[int, Vector]] = []  # (pivot column, reduced row)
    keep = []
    for idx, row in enumerate(A):
        r = list(map(Fraction, row))
        for col, b in basis:
            if r[col]:
                f = r[col] / b[col]
                r = [x - f * y for x, y in zip(r, b)]
        col = next((c for c, x in enumerate(r) if x), None)
        if col is not None:
            basis.append((col, r))
            keep.append(idx)
    return keep


def inverse(M) -> Matrix:
    """Exact inverse of a nonsingular square matrix (Gauss-Jordan)."""
    A = as_matrix(M)
    n = len(A)
    R = [A[i] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pr = next((r for r in range(col, n) if R[r][col] != 0), None)
        if pr is None:
            raise ZeroDivisionError("singular matrix")
        R[col], R[pr] = R[pr], R[col]
        inv = 1 / R[col][col]
        R[col] = [x * inv for x in R[col]]
        for r in range(n):
            if r != col and R[r][col] != 0:
                f = R[r][col]
                R[r] = [x - f * y for x, y in zip(R[r], R[col])]
    return [row[n:] for row in R]
