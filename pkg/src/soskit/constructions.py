"""Named forms and the families that separate consecutive sparse sos cones.

All constructors return exact :class:`~soskit.forms.Form` objects and take
raw (human) coefficients where coefficients are involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .errors import (
    ConstraintViolation,
    ConstructionError,
    DegenerateG,
    KOutOfRange,
    LambdaSumNotOne,
    MonomialCollision,
    NonIntegralBarycenter,
    OddAlpha,
    OddSum,
    ShapeError,
    TooManyTerms,
)
from .forms import Form, MultiIndex, from_raw_terms, monomial, num_terms, power, to_fraction, variable

__all__ = [
    "AgiformSpec",
    "PerturbationSpec",
    "hurwitz",
    "agiform",
    "motzkin",
    "binary_separator",
    "trinomial",
    "perturbed_fermat",
    "dual_example",
    "extremal_generator",
    "thicken",
    "polya_lift",
]


def _unit(n: int, j: int, d: int) -> MultiIndex:
    return tuple(d if t == j else 0 for t in range(n))


def hurwitz(a: Sequence[int]) -> Form:
    """``a_1 x_1^(2d) + ... + a_n x_n^(2d) - 2d x^a`` with ``2d = sum(a)``."""
    a = tuple(int(e) for e in a)
    if not a or any(e < 0 for e in a):
        raise ConstructionError("exponents must be non-negative")
    total = sum(a)
    if total == 0 or total % 2:
        raise OddSum(f"exponent sum {total} must be even and positive")
    n = len(a)
    terms = [(e, _unit(n, j, total)) for j, e in enumerate(a) if e]
    terms.append((-total, a))
    return from_raw_terms(n, total, terms)


@dataclass(frozen=True)
class AgiformSpec:
    """Weights and even exponent vectors of an arithmetic-geometric form."""

    lambdas: tuple
    alphas: tuple

    def __post_init__(self):
        lambdas = tuple(to_fraction(x) for x in self.lambdas)
        alphas = tuple(tuple(int(e) for e in a) for a in self.alphas)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "alphas", alphas)
        if not alphas or len(lambdas) != len(alphas):
            raise ConstructionError("need one weight per exponent vector")
        if len({len(a) for a in alphas}) != 1 or len({sum(a) for a in alphas}) != 1:
            raise ConstructionError("exponent vectors must share length and degree")
        if any(x <= 0 for x in lambdas):
            raise ConstructionError("weights must be positive")
        if sum(lambdas) != 1:
            raise LambdaSumNotOne(f"weights sum to {sum(lambdas)}")
        if any(e % 2 or e < 0 for a in alphas for e in a):
            raise OddAlpha("every exponent vector must have non-negative even entries")
        if any(c.denominator != 1 for c in self.barycenter_fractions):
            raise NonIntegralBarycenter(f"weighted barycenter {self.barycenter_fractions} is not integral")

    @property
    def barycenter_fractions(self) -> tuple[Fraction, ...]:
        n = len(self.alphas[0])
        return tuple(sum((lam * a[t] for lam, a in zip(self.lambdas, self.alphas)), Fraction(0)) for t in range(n))

    @property
    def barycenter(self) -> MultiIndex:
        return tuple(int(c) for c in self.barycenter_fractions)


def agiform(spec: AgiformSpec) -> Form:
    n, deg = len(spec.alphas[0]), sum(spec.alphas[0])
    terms = list(zip(spec.lambdas, spec.alphas))
    terms.append((-1, spec.barycenter))
    return from_raw_terms(n, deg, terms)


MOTZKIN_SPEC = AgiformSpec(
    lambdas=(Fraction(1, 3),) * 3,
    alphas=((4, 2, 0), (2, 4, 0), (0, 0, 6)),
)


def motzkin(classical: bool = True) -> Form:
    """``x^4 y^2 + x^2 y^4 + z^6 - 3 x^2 y^2 z^2``, or one third of it."""
    p = agiform(MOTZKIN_SPEC)
    return 3 * p if classical else p


def binary_separator(d: int, k: int) -> Form:
    """``x^(d-k+1) (x+y)^(k-1)``: a binary d-ic with exactly k terms."""
    if not 1 <= k <= d + 1:
        raise KOutOfRange(f"k must lie in 1..{d + 1}, got {k}")
    x, y = variable(2, 0), variable(2, 1)
    return power(x, d - k + 1) * power(x + y, k - 1)


def trinomial(n: int, d: int) -> Form:
    """``x_1 x_2^(d-1) + x_3^d`` in n variables."""
    if n < 3 or d < 2:
        raise ShapeError(f"need n >= 3 and d >= 2, got n={n}, d={d}")
    lead = (1, d - 1) + (0,) * (n - 2)
    return from_raw_terms(n, d, [(1, lead), (1, _unit(n, 2, d))])


@dataclass(frozen=True)
class PerturbationSpec:
    s: Fraction = Fraction(1, 100)
    extra_monomials: tuple = ()
    epsilons: tuple = ()

    def __post_init__(self):
        s = to_fraction(self.s)
        eps = tuple(to_fraction(e) for e in self.epsilons)
        mons = tuple(tuple(int(e) for e in m) for m in self.extra_monomials)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "extra_monomials", mons)
        if s <= 0:
            raise ConstructionError("box radius must be positive")
        if len(eps) != len(mons):
            raise ConstructionError("need one epsilon per extra monomial")
        if any(abs(e) > s for e in eps):
            raise ConstraintViolation(f"perturbation coefficients must satisfy |eps| <= {s}")


def perturbed_fermat(n: int, d: int, spec: PerturbationSpec = PerturbationSpec()) -> Form:
    """``x_1^d - x_2^d + x_3^d`` plus small multiples of other degree-d monomials."""
    if n < 3 or d < 1:
        raise ShapeError(f"need n >= 3 and d >= 1, got n={n}, d={d}")
    base = [_unit(n, j, d) for j in range(3)]
    mons = spec.extra_monomials
    if len(mons) > num_terms(n, d) - 3:
        raise TooManyTerms(f"at most {num_terms(n, d) - 3} extra monomials fit in degree {d}")
    if len(set(mons)) != len(mons) or set(mons) & set(base):
        raise MonomialCollision("extra monomials must be distinct and avoid the three pure powers")
    terms = [(1, base[0]), (-1, base[1]), (1, base[2])]
    terms.extend(zip(spec.epsilons, mons))
    return from_raw_terms(n, d, terms)


def dual_example(which: int) -> Form:
    if which == 1:
        return from_raw_terms(2, 4, [(1, (4, 0)), (-4, (3, 1))])
    if which == 2:
        return from_raw_terms(2, 4, [(4, (4, 0)), (-8, (3, 1)), (6, (2, 2)), (-8, (1, 3)), (4, (0, 4))])
    raise ConstructionError(f"no dual example {which!r}; choose 1 or 2")


def extremal_generator(r, s, t, eps1: int, eps2: int) -> Form:
    """Binary quartic with normalized coefficients ``(r^2, e1 r t, t^2, e2 s t, s^2)``.

    These span the extreme rays of the level-2 dual cone in this shape.
    """
    r, s, t = (to_fraction(v) for v in (r, s, t))
    if min(r, s, t) <= 0:
        raise ConstraintViolation("r, s, t must be positive")
    if eps1 not in (1, -1) or eps2 not in (1, -1):
        raise ConstraintViolation("signs must be +1 or -1")
    if r * s < t * t:
        raise ConstraintViolation(f"need r*s >= t^2, got r*s={r * s}, t^2={t * t}")
    b = (r * r, eps1 * r * t, t * t, eps2 * s * t, s * s)
    return from_raw_terms(2, 4, [(comb(4, i) * b[i], (4 - i, i)) for i in range(5)])


def thicken(g: Form, lam) -> Form:
    """``g^2 + lam x_1^(2d)``; never a perfect square when g is not a multiple of x_1^d."""
    lam = to_fraction(lam)
    if lam <= 0:
        raise ConstructionError("lambda must be positive")
    lead = _unit(g.n, 0, g.d)
    if set(g.coeffs) <= {lead}:
        raise DegenerateG("g must not be a multiple of x_1^d")
    return g * g + monomial(_unit(g.n, 0, 2 * g.d), lam)


def polya_lift(p: Form, r: int) -> Form:
    """``(x_1^2 + ... + x_n^2)^r * p``."""
    if r < 0:
        raise ConstructionError("r must be non-negative")
    sq = from_raw_terms(p.n, 2, [(1, _unit(p.n, j, 2)) for j in range(p.n)])
    return power(sq, r) * p
