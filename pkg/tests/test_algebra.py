import random
from fractions import Fraction
from math import factorial

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import to_sympy
from soskit.algebra import bbem_check, coeff_bound_check, indefiniteness_witness, is_square_free_binary
from soskit.constructions import trinomial
from soskit.errors import ArityMismatch, NotBinary, ZeroForm
from soskit.forms import evaluate, from_raw_terms, index_set, variable, zero

x, y = variable(2, 0), variable(2, 1)
X, Y, Z = (variable(3, j) for j in range(3))


def test_square_free_examples():
    assert is_square_free_binary(x * y * (x + y))
    assert not is_square_free_binary(x * x * (x + y))
    assert not is_square_free_binary(y * y * (x + y))
    assert is_square_free_binary(x * x + y * y)
    assert is_square_free_binary(x)
    assert not is_square_free_binary((x * x + y * y) ** 2)
    with pytest.raises(NotBinary):
        is_square_free_binary(X)
    with pytest.raises(ZeroForm):
        is_square_free_binary(zero(2, 3))


def _random_binary(rng, d):
    return from_raw_terms(2, d, [(rng.randint(-4, 4), i) for i in index_set(2, d)])


def test_square_free_matches_sympy_factorization():
    rng = random.Random(0)
    sx, sy = sympy.symbols("x0 x1")
    for _ in range(150):
        f = _random_binary(rng, rng.randint(1, 5))
        if f.is_zero():
            continue
        _, factors = sympy.factor_list(to_sympy(f), sx, sy)
        assert is_square_free_binary(f) == all(m == 1 for _, m in factors)
        assert not is_square_free_binary(f * f)


def test_indefiniteness_examples():
    w = indefiniteness_witness(X**3 - Y**3 + Z**3)
    assert (w.x_plus, w.x_minus) == ((1, 0, 0), (0, 1, 0))
    assert (w.value_plus, w.value_minus) == (1, -1)
    w = indefiniteness_witness(trinomial(3, 3))
    assert (w.x_plus, w.x_minus) == ((1, 1, 0), (-1, 1, 0))
    assert indefiniteness_witness(x**4 + y**4) is None
    assert indefiniteness_witness(zero(2, 2)) is None


def test_indefiniteness_witness_values_are_exact():
    rng = random.Random(1)
    for _ in range(60):
        p = _random_binary(rng, 3)
        w = indefiniteness_witness(p, seed=rng.randint(0, 99))
        if w is None:
            continue
        assert evaluate(p, w.x_plus) == w.value_plus > 0
        assert evaluate(p, w.x_minus) == w.value_minus < 0


def test_indefiniteness_falls_back_to_random_points():
    # positive at every structured candidate, negative only near (1, 1.1)
    p = (10 * x - 11 * y) ** 2 - Fraction(1, 1000) * (x * x + y * y)
    w = indefiniteness_witness(p, seed=3)
    assert w is not None and evaluate(p, w.x_minus) < 0 < evaluate(p, w.x_plus)


def test_bbem_examples():
    r = bbem_check(x, y)
    assert r.constant == Fraction(1, 2)
    assert r.lhs == Fraction(1, 2) and r.rhs == Fraction(1, 2) and r.equality
    r = bbem_check(x * x + y * y, x * x - y * y)
    assert r.holds
    with pytest.raises(ArityMismatch):
        bbem_check(x, X)


def test_bbem_constant_is_classical():
    for e1 in range(5):
        for e2 in range(5):
            f, g = x**e1 if e1 else from_raw_terms(2, 0, [(1, (0, 0))]), y**e2 if e2 else from_raw_terms(2, 0, [(1, (0, 0))])
            assert bbem_check(f, g).constant == Fraction(factorial(e1) * factorial(e2), factorial(e1 + e2))


def test_bbem_random_pairs():
    rng = random.Random(2)
    for _ in range(500):
        n = rng.randint(2, 3)
        d1, d2 = rng.randint(1, 3), rng.randint(1, 3)
        f = from_raw_terms(n, d1, [(rng.randint(-3, 3), i) for i in index_set(n, d1)])
        g = from_raw_terms(n, d2, [(rng.randint(-3, 3), i) for i in index_set(n, d2)])
        assert bbem_check(f, g).holds


@given(st.integers(1, 4), st.data())
@settings(max_examples=50, deadline=None)
def test_coeff_bound(d, data):
    idx = index_set(3, d)
    coeffs = data.draw(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=9), min_size=len(idx), max_size=len(idx)))
    assert coeff_bound_check(from_raw_terms(3, d, list(zip(coeffs, idx))))
