"""Moment (generalized Hankel) matrices and exact dual-cone membership.

For a form ``p`` of degree 2d the matrix ``M_p[i, j] = a(p; i+j)`` over the
degree-d index set satisfies ``[p, h^2] = t^T M_p t`` where ``t`` holds the raw
coefficients of ``h``.  ``p`` pairs non-negatively with every square of a
k-term form exactly when all k x k principal submatrices of ``M_p`` are PSD.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, islice
from typing import Iterable, Optional, Sequence

from .errors import (
    ArityMismatch,
    DegreeMismatch,
    IndexOutOfBasis,
    KOutOfRange,
    OddDegree,
    SubsetExplosion,
    WrongShape,
)
from .forms import Form, MultiIndex, index_set, monomial, num_terms
from .rational import Matrix, PsdVerdict, det, is_psd_exact

__all__ = [
    "MomentMatrix",
    "DualVerdict",
    "QuarticCriteria",
    "PsdVerdict",
    "moment_matrix",
    "pair_with_square",
    "is_psd_exact",
    "principal_submatrix",
    "dual_membership",
    "dual_quartic_criteria",
    "pointedness_decomposition",
    "recover_coefficient",
    "DEFAULT_SUBSET_CAP",
]

DEFAULT_SUBSET_CAP = 10**6


def _add(i: Sequence[int], j: Sequence[int]) -> MultiIndex:
    return tuple(a + b for a, b in zip(i, j))


@dataclass(frozen=True)
class MomentMatrix:
    basis: tuple[MultiIndex, ...]
    entries: tuple[tuple[Fraction, ...], ...]
    source_degree: int

    @property
    def size(self) -> int:
        return len(self.basis)

    def rows(self) -> Matrix:
        return [list(r) for r in self.entries]

    def position(self, i: Sequence[int]) -> int:
        try:
            return self._positions[tuple(i)]
        except KeyError:
            raise IndexOutOfBasis(f"{tuple(i)} is not in the basis") from None

    @property
    def _positions(self) -> dict[MultiIndex, int]:
        return {b: t for t, b in enumerate(self.basis)}

    def determinant(self) -> Fraction:
        return det(self.rows())


def _half_degree(p: Form) -> int:
    if p.d % 2:
        raise OddDegree(f"form has odd degree {p.d}")
    return p.d // 2


def moment_matrix(p: Form) -> MomentMatrix:
    d = _half_degree(p)
    basis = index_set(p.n, d)
    entries = tuple(tuple(p.a(_add(i, j)) for j in basis) for i in basis)
    return MomentMatrix(basis, entries, p.d)


def pair_with_square(p: Form, h: Form) -> Fraction:
    """``[p, h^2]`` evaluated as the quadratic form ``t^T M_p t``."""
    if p.n != h.n:
        raise ArityMismatch(f"forms in {p.n} and {h.n} variables")
    if p.d != 2 * h.d:
        raise DegreeMismatch(f"cannot pair degree {p.d} with the square of degree {h.d}")
    terms = h.raw_terms()
    total = Fraction(0)
    for ci, i in terms:
        for cj, j in terms:
            total += ci * cj * p.a(_add(i, j))
    return total


def principal_submatrix(M: MomentMatrix, S: Iterable[Sequence[int]]) -> Matrix:
    """Rows and columns of ``M`` indexed by ``S``, kept in basis order."""
    pos = sorted({M.position(i) for i in S})
    return [[M.entries[r][c] for c in pos] for r in pos]


@dataclass(frozen=True)
class DualVerdict:
    member: bool
    k: int
    violating_support: Optional[tuple[MultiIndex, ...]] = None
    violating_vector: Optional[tuple[Fraction, ...]] = None
    subsets_checked: int = 0


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SOSKIT_THREADS", "1")))
    except ValueError:
        return 1


def _check_subset(args):
    M, S = args
    return is_psd_exact([[M[r][c] for c in S] for r in S])


def dual_membership(
    p: Form,
    k: int,
    cap: int = DEFAULT_SUBSET_CAP,
    force: bool = False,
    threads: Optional[int] = None,
) -> DualVerdict:
    """Decide ``p`` in the dual of the k-sparse sos cone, exactly.

    Every principal submatrix of size ``min(k, N)`` is tested in lexicographic
    subset order.  The first failure is reported with the support of its
    witness vector (which may be smaller than k).  ``k`` larger than N is
    treated as N, since the cones stop growing there.
    """
    d = _half_degree(p)
    N = num_terms(p.n, d)
    if k < 1:
        raise KOutOfRange(f"k must be at least 1, got {k}")
    s = min(k, N)
    total = math.comb(N, s)
    if total > cap and not force:
        raise SubsetExplosion(f"C({N},{s}) = {total} principal submatrices exceeds the cap {cap}")
    M = moment_matrix(p)
    rows = M.rows()
    subsets = combinations(range(N), s)
    workers = threads if threads is not None else _threads()

    def report(S, verdict: PsdVerdict, count: int) -> DualVerdict:
        v = verdict.witness_vector
        keep = [t for t, x in enumerate(v) if x != 0]
        return DualVerdict(
            member=False,
            k=k,
            violating_support=tuple(M.basis[S[t]] for t in keep),
            violating_vector=tuple(v[t] for t in keep),
            subsets_checked=count,
        )

    count = 0
    if workers <= 1:
        for S in subsets:
            count += 1
            verdict = _check_subset((rows, S))
            if not verdict.is_psd:
                return report(S, verdict, count)
        return DualVerdict(member=True, k=k, subsets_checked=count)

    # chunks keep results in canonical order regardless of completion order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            chunk = list(islice(subsets, 64 * workers))
            if not chunk:
                break
            for S, verdict in zip(chunk, pool.map(_check_subset, [(rows, S) for S in chunk])):
                count += 1
                if not verdict.is_psd:
                    return report(S, verdict, count)
    return DualVerdict(member=True, k=k, subsets_checked=count)


@dataclass(frozen=True)
class QuarticCriteria:
    """The quantities deciding membership of a binary quartic in the duals.

    ``b[i]`` is the normalized coefficient of ``x^(4-i) y^i``.
    """

    b: tuple[Fraction, ...]
    minors: tuple[Fraction, Fraction, Fraction]
    det: Fraction

    @property
    def diagonal(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.b[0], self.b[2], self.b[4])

    @property
    def member_k1(self) -> bool:
        return all(x >= 0 for x in self.diagonal)

    @property
    def member_k2(self) -> bool:
        return self.member_k1 and all(m >= 0 for m in self.minors)

    @property
    def member_k3(self) -> bool:
        return self.member_k2 and self.det >= 0


def dual_quartic_criteria(p: Form) -> QuarticCriteria:
    if (p.n, p.d) != (2, 4):
        raise WrongShape(f"expected a binary quartic, got n={p.n}, degree {p.d}")
    b = tuple(p.a((4 - i, i)) for i in range(5))
    minors = (b[0] * b[2] - b[1] ** 2, b[0] * b[4] - b[2] ** 2, b[2] * b[4] - b[3] ** 2)
    return QuarticCriteria(b, minors, moment_matrix(p).determinant())


def pointedness_decomposition(i: Sequence[int]) -> tuple[MultiIndex, MultiIndex]:
    """Split ``i`` (degree 2d) as ``j + j'`` with both halves of degree d.

    The first d exponent units, read left to right, go to ``j``.
    """
    i = tuple(i)
    total = sum(i)
    if total % 2:
        raise OddDegree(f"index {i} has odd degree")
    left = total // 2
    j = []
    for e in i:
        take = min(e, left)
        j.append(take)
        left -= take
    j = tuple(j)
    return j, tuple(a - b for a, b in zip(i, j))


def recover_coefficient(q: Form, i: Sequence[int]) -> Fraction:
    """``a(q;i)`` recovered from two pairings with squares of binomials."""
    j, jp = pointedness_decomposition(i)
    plus = monomial(j) + monomial(jp)
    minus = monomial(j) - monomial(jp)
    return (pair_with_square(q, plus) - pair_with_square(q, minus)) / 4
