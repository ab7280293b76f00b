from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from soskit.errors import ArityMismatch, DegreeMismatch
from soskit.forms import (
    Form,
    add,
    evaluate,
    fischer_inner,
    fischer_norm_sq,
    from_raw_terms,
    in_Fk,
    index_set,
    monomial,
    multinomial,
    multiply,
    scale,
    support,
    term_count,
    variable,
    zero,
)

x, y = variable(2, 0), variable(2, 1)
X, Y, Z = (variable(3, j) for j in range(3))


def test_index_set_small_cases():
    assert index_set(2, 2) == ((2, 0), (1, 1), (0, 2))
    assert index_set(3, 1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert len(index_set(3, 3)) == 10


def test_index_set_sizes_exhaustive():
    for n in range(1, 6):
        for d in range(9):
            idx = index_set(n, d)
            assert len(idx) == comb(n + d - 1, n - 1)
            assert all(sum(i) == d and len(i) == n for i in idx)
            assert list(idx) == sorted(idx, reverse=True)
            assert len(set(idx)) == len(idx)


def test_index_set_rejects_bad_shape():
    with pytest.raises(ValueError):
        index_set(0, 2)


def test_multinomial():
    assert multinomial((2, 0)) == 1
    assert multinomial((1, 1)) == 2
    assert multinomial((1, 1, 1)) == 6


def test_from_raw_terms_normalizes():
    p1 = from_raw_terms(2, 4, [(1, (4, 0)), (-4, (3, 1))])
    assert p1.a((4, 0)) == 1
    assert p1.a((3, 1)) == -1
    assert from_raw_terms(2, 2, [(1, (1, 1))]).a((1, 1)) == Fraction(1, 2)
    cancelled = from_raw_terms(2, 2, [(1, (2, 0)), (-1, (2, 0))])
    assert cancelled.is_zero() and support(cancelled) == frozenset()


def test_from_raw_terms_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        from_raw_terms(2, 4, [(1, (3, 0))])


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        from_raw_terms(2, 2, [(0.5, (2, 0))])


def test_add_and_scale():
    assert (add(x**4, -(x**4))).is_zero()
    p1 = x**4 - 4 * x**3 * y
    assert scale(p1, 2) == 2 * x**4 - 8 * x**3 * y
    assert term_count(add(X**2 * Y**2, Z**4)) == 2


def test_add_shape_errors():
    with pytest.raises(DegreeMismatch):
        add(x**2, x**3)
    with pytest.raises(ArityMismatch):
        add(x**2, X**2)


def test_multiply_examples():
    assert multiply(x * x + x * y, x * x + x * y) == x**4 + 2 * x**3 * y + x**2 * y**2
    g3 = x**2 * (x + y) ** 2
    assert g3 == x**4 + 2 * x**3 * y + x**2 * y**2 and term_count(g3) == 3
    one = monomial((0, 0))
    assert multiply(g3, one) == g3
    with pytest.raises(ArityMismatch):
        multiply(x, X)


def test_evaluate():
    p = X * Y**2 + Z**3
    assert evaluate(p, (1, 1, 0)) == 1
    assert evaluate(p, (-1, 1, 0)) == -1
    assert evaluate(p, (0, 0, 0)) == 0
    with pytest.raises(ArityMismatch):
        evaluate(p, (1, 1))


def test_support_and_in_Fk():
    p1 = x**4 - 4 * x**3 * y
    assert term_count(p1) == 2 and in_Fk(p1, 2) and not in_Fk(p1, 1)
    assert term_count(zero(2, 4)) == 0 and in_Fk(zero(2, 4), 0)
    assert term_count(X**3 - Y**3 + Z**3 + Fraction(1, 100) * X * Y * Z) == 4


def test_fischer_inner_examples():
    p1 = x**4 - 4 * x**3 * y
    p2 = from_raw_terms(2, 4, [(4, (4, 0)), (-8, (3, 1)), (6, (2, 2)), (-8, (1, 3)), (4, (0, 4))])
    assert fischer_inner(p1, (x * x + x * y) ** 2) == -1
    assert fischer_inner(x**4, x**4) == 1
    assert fischer_inner(p2, (x * x + 2 * x * y + y * y) ** 2) == -2
    with pytest.raises(DegreeMismatch):
        fischer_inner(x**2, x**4)


def test_fischer_norm_examples():
    assert fischer_norm_sq(x**5) == 1
    assert fischer_norm_sq(x * y) == Fraction(1, 2)
    assert fischer_norm_sq(zero(2, 3)) == 0


def test_pretty_and_repr():
    assert (x**4 - 4 * x**3 * y).pretty() == "x^4 - 4*x^3*y"
    assert zero(2, 2).pretty() == "0"
    assert "n=2" in repr(x)


def test_multiply_matches_sympy():
    sx, sy = sympy.symbols("x y")
    f = x**3 - 2 * x * y**2 + Fraction(1, 3) * y**3
    g = 5 * x * x - x * y
    expected = sympy.Poly(sympy.expand((sx**3 - 2 * sx * sy**2 + sympy.Rational(1, 3) * sy**3) * (5 * sx**2 - sx * sy)), sx, sy)
    got = {i: c for c, i in (f * g).raw_terms()}
    assert got == {m: Fraction(int(c.p), int(c.q)) for m, c in expected.terms()}


# -- properties ---------------------------------------------------------------

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def forms(draw, n=None, d=None):
    n = draw(st.integers(1, 3)) if n is None else n
    d = draw(st.integers(0, 4)) if d is None else d
    idx = index_set(n, d)
    chosen = draw(st.lists(st.sampled_from(idx), max_size=len(idx), unique=True))
    return from_raw_terms(n, d, [(draw(coefficients), i) for i in chosen])


@st.composite
def form_triples(draw):
    n, d = draw(st.integers(1, 3)), draw(st.integers(0, 4))
    return draw(forms(n, d)), draw(forms(n, d)), draw(forms(n, d))


@given(form_triples(), coefficients)
@settings(max_examples=60, deadline=None)
def test_fischer_symmetric_bilinear(triple, lam):
    p, q, r = triple
    assert fischer_inner(p, q) == fischer_inner(q, p)
    assert fischer_inner(p + lam * q, r) == fischer_inner(p, r) + lam * fischer_inner(q, r)


@given(forms())
@settings(max_examples=60, deadline=None)
def test_coefficient_extraction(p):
    for i in index_set(p.n, p.d):
        assert fischer_inner(p, monomial(i)) == p.a(i)


@given(forms())
@settings(max_examples=60, deadline=None)
def test_coefficient_bound(p):
    norm = fischer_norm_sq(p)
    assert norm >= 0 and (norm == 0) == p.is_zero()
    for i in index_set(p.n, p.d):
        assert p.a(i) ** 2 <= multinomial(i) * p.a(i) ** 2 <= norm


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_multiply_degree_and_support(data):
    n = data.draw(st.integers(1, 3))
    p, q = data.draw(forms(n)), data.draw(forms(n))
    pq = p * q
    assert pq.d == p.d + q.d
    minkowski = {tuple(a + b for a, b in zip(i, j)) for i in support(p) for j in support(q)}
    assert support(pq) <= minkowski


@given(forms())
@settings(max_examples=60, deadline=None)
def test_raw_round_trip(p):
    assert from_raw_terms(p.n, p.d, p.raw_terms()) == p
    assert Form(p.n, p.d, dict(p.coeffs)) == p
