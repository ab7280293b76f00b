"""Algebraic side checks: square-freeness, indefiniteness, Bombieri products."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Iterator, Optional

import sympy

from .errors import ArityMismatch, NotBinary, ZeroForm
from .forms import Form, evaluate, fischer_norm_sq, multiply

__all__ = [
    "SignWitnessPair",
    "BbemResult",
    "is_square_free_binary",
    "indefiniteness_witness",
    "bbem_check",
    "coeff_bound_check",
]

RANDOM_POINTS = 10_000
RANDOM_DENOMINATOR = 1000


def is_square_free_binary(f: Form) -> bool:
    """True iff the binary form ``f`` has no repeated factor over the complex numbers.

    Dehomogenize to ``F(t) = f(t, 1)``.  Repeated factors other than ``y`` show
    up in ``gcd(F, F')``; the power of ``y`` dividing ``f`` is ``d - deg F``.
    """
    if f.n != 2:
        raise NotBinary(f"expected a binary form, got {f.n} variables")
    if f.is_zero():
        raise ZeroForm("the zero form has no factorization")
    t = sympy.Symbol("t")
    F = sympy.Poly(
        sum((sympy.Rational(c.numerator, c.denominator) * t ** i[0] for c, i in f.raw_terms()), sympy.Integer(0)),
        t,
        domain="QQ",
    )
    if f.d - F.degree() > 1:
        return False
    return F.degree() <= 0 or sympy.gcd(F, F.diff(t)).degree() == 0


@dataclass(frozen=True)
class SignWitnessPair:
    x_plus: tuple[Fraction, ...]
    x_minus: tuple[Fraction, ...]
    value_plus: Fraction
    value_minus: Fraction


def _unit(n: int, j: int, sign: int = 1) -> tuple[Fraction, ...]:
    return tuple(Fraction(sign if t == j else 0) for t in range(n))


def _plus(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _candidate_pairs(n: int) -> Iterator[tuple]:
    for i, j in combinations(range(n), 2):
        yield _unit(n, i), _unit(n, j)
    for i, j in combinations(range(n), 2):
        yield _plus(_unit(n, i), _unit(n, j)), _plus(_unit(n, i, -1), _unit(n, j))
    for i in range(n):
        yield _unit(n, i), _unit(n, i, -1)


def indefiniteness_witness(p: Form, seed: int = 0) -> Optional[SignWitnessPair]:
    """Two rational points where ``p`` takes opposite signs, or None.

    Structured candidates come first (pairs of unit vectors, then
    ``e_i + e_j`` against ``e_j - e_i``, then ``e_i`` against ``-e_i``),
    followed by seeded random points of the box ``[-1, 1]^n``.  None only
    means that no witness was found.
    """
    seen_pos: Optional[tuple] = None
    seen_neg: Optional[tuple] = None

    def note(x, v):
        nonlocal seen_pos, seen_neg
        if v > 0 and seen_pos is None:
            seen_pos = (x, v)
        if v < 0 and seen_neg is None:
            seen_neg = (x, v)

    for a, b in _candidate_pairs(p.n):
        va, vb = evaluate(p, a), evaluate(p, b)
        note(a, va)
        note(b, vb)
        if va * vb < 0:
            return SignWitnessPair(a, b, va, vb) if va > 0 else SignWitnessPair(b, a, vb, va)
    rng = random.Random(seed)
    for _ in range(RANDOM_POINTS):
        if seen_pos and seen_neg:
            return SignWitnessPair(seen_pos[0], seen_neg[0], seen_pos[1], seen_neg[1])
        x = tuple(Fraction(rng.randint(-RANDOM_DENOMINATOR, RANDOM_DENOMINATOR), RANDOM_DENOMINATOR) for _ in range(p.n))
        note(x, evaluate(p, x))
    if seen_pos and seen_neg:
        return SignWitnessPair(seen_pos[0], seen_neg[0], seen_pos[1], seen_neg[1])
    return None


@dataclass(frozen=True)
class BbemResult:
    lhs: Fraction
    rhs: Fraction
    constant: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs

    @property
    def equality(self) -> bool:
        return self.lhs == self.rhs


def bbem_check(f: Form, g: Form) -> BbemResult:
    """Compare ``||fg||^2`` with ``e1! e2! / (e1+e2)! * ||f||^2 ||g||^2``."""
    if f.n != g.n:
        raise ArityMismatch(f"forms in {f.n} and {g.n} variables")
    const = Fraction(factorial(f.d) * factorial(g.d), factorial(f.d + g.d))
    return BbemResult(
        lhs=fischer_norm_sq(multiply(f, g)),
        rhs=const * fischer_norm_sq(f) * fischer_norm_sq(g),
        constant=const,
    )


def coeff_bound_check(p: Form) -> bool:
    """``a(p;i)^2 <= ||p||^2`` for every i; a guard on the norm itself."""
    norm = fischer_norm_sq(p)
    return all(a * a <= norm for a in p.coeffs.values())
