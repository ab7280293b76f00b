"""Exact homogeneous forms over the rationals.

A form of degree ``d`` in ``n`` variables is stored by its *normalized*
coefficients ``a(p;i)``: the coefficient of the monomial ``x**i`` in ``p`` is
``c(i) * a(p;i)`` where ``c(i) = d!/(i_1!...i_n!)``.  In this convention the
Fischer (Bombieri) inner product is ``[p, q] = sum_i c(i) a(p;i) a(q;i)``.
Everything a user reads or writes uses raw monomial coefficients instead.

Multi-indices are plain tuples of non-negative ints.  The canonical order is
lexicographic *descending* on the tuple, so ``x1**d`` comes first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from .errors import ArityMismatch, DegreeMismatch

MultiIndex = tuple[int, ...]
Rational = Union[int, Fraction, str]

__all__ = [
    "MultiIndex",
    "Form",
    "index_set",
    "num_terms",
    "multinomial",
    "from_raw_terms",
    "monomial",
    "zero",
    "add",
    "scale",
    "multiply",
    "power",
    "evaluate",
    "support",
    "term_count",
    "in_Fk",
    "fischer_inner",
    "fischer_norm_sq",
    "variable",
]


def to_fraction(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact coefficients")
    return Fraction(x)


@lru_cache(maxsize=None)
def index_set(n: int, d: int) -> tuple[MultiIndex, ...]:
    """All exponent tuples of length ``n`` summing to ``d``, canonical order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if d < 0:
        raise ValueError("d must be non-negative")
    if n == 1:
        return ((d,),)
    out = []
    for first in range(d, -1, -1):
        for rest in index_set(n - 1, d - first):
            out.append((first,) + rest)
    return tuple(out)


def num_terms(n: int, d: int) -> int:
    """N(n,d) = binom(n+d-1, n-1)."""
    return math.comb(n + d - 1, n - 1)


@lru_cache(maxsize=None)
def multinomial(i: MultiIndex) -> int:
    c = math.factorial(sum(i))
    for e in i:
        c //= math.factorial(e)
    return c


def _check_index(i: Sequence[int], n: int, d: int) -> MultiIndex:
    i = tuple(int(e) for e in i)
    if len(i) != n:
        raise ArityMismatch(f"exponent {i} has {len(i)} entries, expected {n}")
    if any(e < 0 for e in i):
        raise ValueError(f"negative exponent in {i}")
    if sum(i) != d:
        raise DegreeMismatch(f"exponent {i} has degree {sum(i)}, expected {d}")
    return i


@dataclass(frozen=True)
class Form:
    """Homogeneous polynomial with exact rational coefficients.

    ``coeffs`` maps multi-indices to normalized coefficients ``a(p;i)``; zero
    values are never stored.  Use :func:`from_raw_terms` to build a form from
    ordinary monomial coefficients.
    """

    n: int
    d: int
    coeffs: Mapping[MultiIndex, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a form needs at least one variable")
        if self.d < 0:
            raise ValueError("degree must be non-negative")
        clean = {}
        for i, a in self.coeffs.items():
            i = _check_index(i, self.n, self.d)
            a = to_fraction(a)
            if a:
                clean[i] = a
        object.__setattr__(self, "coeffs", clean)

    def __hash__(self):
        return hash((self.n, self.d, frozenset(self.coeffs.items())))

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self.n, self.d, self.coeffs) == (other.n, other.d, other.coeffs)

    def a(self, i: Sequence[int]) -> Fraction:
        """Normalized coefficient a(p;i) (zero off the support)."""
        return self.coeffs.get(tuple(i), Fraction(0))

    def raw(self, i: Sequence[int]) -> Fraction:
        """Ordinary coefficient of ``x**i``."""
        i = tuple(i)
        return multinomial(i) * self.coeffs[i] if i in self.coeffs else Fraction(0)

    def raw_terms(self) -> list[tuple[Fraction, MultiIndex]]:
        """``(raw coefficient, exponent)`` pairs in canonical order."""
        return [(multinomial(i) * self.coeffs[i], i) for i in sorted(self.coeffs, reverse=True)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, Form):
            return multiply(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __pow__(self, r: int):
        return power(self, r)

    def __call__(self, *x):
        if len(x) == 1 and isinstance(x[0], (tuple, list)):
            x = x[0]
        return evaluate(self, x)

    def __repr__(self):
        return f"Form(n={self.n}, d={self.d}, {self.pretty()})"

    def pretty(self) -> str:
        if not self.coeffs:
            return "0"
        names = _var_names(self.n)
        parts = []
        for c, i in self.raw_terms():
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(names, i) if e
            )
            if not mono:
                parts.append(f"{c}")
            elif abs(c) == 1:
                parts.append(mono if c > 0 else f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _var_names(n: int) -> list[str]:
    if n <= 3:
        return ["x", "y", "z"][:n]
    return [f"x{j + 1}" for j in range(n)]


def zero(n: int, d: int) -> Form:
    return Form(n, d, {})


def from_raw_terms(n: int, d: int, terms: Iterable[tuple[Rational, Sequence[int]]]) -> Form:
    """Build a form from ``(raw coefficient, exponent)`` pairs; duplicates add up."""
    acc: dict[MultiIndex, Fraction] = {}
    for c, i in terms:
        i = _check_index(i, n, d)
        acc[i] = acc.get(i, Fraction(0)) + to_fraction(c)
    return Form(n, d, {i: b / multinomial(i) for i, b in acc.items()})


def monomial(i: Sequence[int], coeff: Rational = 1) -> Form:
    """The form ``coeff * x**i`` (raw coefficient)."""
    i = tuple(i)
    return from_raw_terms(len(i), sum(i), [(coeff, i)])


def variable(n: int, j: int) -> Form:
    """The linear form x_{j+1} (0-based ``j``)."""
    e = [0] * n
    e[j] = 1
    return monomial(e)


def _same_shape(p: Form, q: Form):
    if p.n != q.n:
        raise ArityMismatch(f"forms in {p.n} and {q.n} variables")
    if p.d != q.d:
        raise DegreeMismatch(f"forms of degree {p.d} and {q.d}")


def add(p: Form, q: Form) -> Form:
    _same_shape(p, q)
    out = dict(p.coeffs)
    for i, a in q.coeffs.items():
        out[i] = out.get(i, Fraction(0)) + a
    return Form(p.n, p.d, out)


def scale(p: Form, lam: Rational) -> Form:
    lam = to_fraction(lam)
    return Form(p.n, p.d, {i: lam * a for i, a in p.coeffs.items()})


def multiply(p: Form, q: Form) -> Form:
    if p.n != q.n:
        raise ArityMismatch(f"forms in {p.n} and {q.n} variables")
    raw: dict[MultiIndex, Fraction] = {}
    for (ci, i), (cj, j) in product(p.raw_terms(), q.raw_terms()):
        u = tuple(a + b for a, b in zip(i, j))
        raw[u] = raw.get(u, Fraction(0)) + ci * cj
    return from_raw_terms(p.n, p.d + q.d, ((c, u) for u, c in raw.items()))


def power(p: Form, r: int) -> Form:
    if r < 0:
        raise ValueError("negative power")
    out = monomial((0,) * p.n)
    base = p
    while r:
        if r & 1:
            out = multiply(out, base)
        r >>= 1
        if r:
            base = multiply(base, base)
    return out


def evaluate(p: Form, x: Sequence[Rational]) -> Fraction:
    if len(x) != p.n:
        raise ArityMismatch(f"point has {len(x)} coordinates, form has {p.n} variables")
    x = [to_fraction(v) for v in x]
    total = Fraction(0)
    for c, i in p.raw_terms():
        term = c
        for v, e in zip(x, i):
            if e:
                term *= v**e
        total += term
    return total


def support(p: Form) -> frozenset[MultiIndex]:
    return frozenset(p.coeffs)


def term_count(p: Form) -> int:
    return len(p.coeffs)


def in_Fk(p: Form, k: int) -> bool:
    return len(p.coeffs) <= k


def fischer_inner(p: Form, q: Form) -> Fraction:
    _same_shape(p, q)
    if len(q.coeffs) < len(p.coeffs):
        p, q = q, p
    return sum(
        (multinomial(i) * a * q.coeffs[i] for i, a in p.coeffs.items() if i in q.coeffs),
        Fraction(0),
    )


def fischer_norm_sq(p: Form) -> Fraction:
    return sum((multinomial(i) * a * a for i, a in p.coeffs.items()), Fraction(0))
