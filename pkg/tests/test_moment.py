import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from soskit.constructions import dual_example
from soskit.errors import (
    DegreeMismatch,
    IndexOutOfBasis,
    KOutOfRange,
    NotSymmetric,
    OddDegree,
    SubsetExplosion,
    WrongShape,
)
from soskit.forms import fischer_inner, from_raw_terms, index_set, monomial, variable, zero
from soskit.moment import (
    dual_membership,
    dual_quartic_criteria,
    is_psd_exact,
    moment_matrix,
    pair_with_square,
    pointedness_decomposition,
    principal_submatrix,
    recover_coefficient,
)
from soskit.rational import quad_form

x, y = variable(2, 0), variable(2, 1)
p1, p2 = dual_example(1), dual_example(2)


def test_moment_matrix_examples():
    assert moment_matrix(p1).rows() == [[1, -1, 0], [-1, 0, 0], [0, 0, 0]]
    M2 = moment_matrix(p2)
    assert M2.rows() == [[4, -2, 1], [-2, 1, -2], [1, -2, 4]]
    assert M2.determinant() == -9
    assert sympy.Matrix(M2.rows()).det() == -9
    assert moment_matrix(zero(3, 4)).rows() == [[0] * 6 for _ in range(6)]


def test_moment_matrix_is_hankel():
    p = from_raw_terms(3, 4, [(random.Random(1).randint(-5, 5), i) for i in index_set(3, 4)])
    M = moment_matrix(p)
    seen = {}
    for r, i in enumerate(M.basis):
        for c, j in enumerate(M.basis):
            u = tuple(a + b for a, b in zip(i, j))
            assert seen.setdefault(u, M.entries[r][c]) == M.entries[r][c]
            assert M.entries[r][c] == M.entries[c][r]


def test_moment_matrix_odd_degree():
    with pytest.raises(OddDegree):
        moment_matrix(x**3)


def test_pair_with_square_examples():
    assert pair_with_square(p1, x * x + x * y) == -1
    assert pair_with_square(p2, x * x + 2 * x * y + y * y) == -2
    assert pair_with_square(p2, x * x) == p2.a((4, 0))
    with pytest.raises(DegreeMismatch):
        pair_with_square(p1, x)


def test_is_psd_exact_examples():
    v = is_psd_exact([[1, -1], [-1, 0]])
    assert not v.is_psd
    assert v.witness_vector == [1, 1]
    assert quad_form([[1, -1], [-1, 0]], v.witness_vector) == -1
    assert is_psd_exact([[2, 1], [1, 2]]).is_psd
    assert is_psd_exact([[0, 0], [0, 0]]).is_psd
    with pytest.raises(NotSymmetric):
        is_psd_exact([[1, 2], [3, 4]])


def test_is_psd_exact_agrees_with_eigenvalues():
    rng = random.Random(7)
    for trial in range(200):
        n = rng.randint(1, 12)
        if trial % 2:
            # low-rank PSD plus a small perturbation, to hit boundary cases
            B = [[Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(1, n))] for _ in range(n)]
            M = [[sum((a * b for a, b in zip(B[i], B[j])), Fraction(0)) for j in range(n)] for i in range(n)]
            if trial % 4 == 1:
                i = rng.randrange(n)
                M[i][i] -= Fraction(1, rng.randint(1, 50))
        else:
            M = [[Fraction(0)] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    M[i][j] = M[j][i] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        verdict = is_psd_exact(M)
        lowest = np.linalg.eigvalsh(np.array(M, dtype=float)).min()
        scale = 1 + max(abs(float(v)) for row in M for v in row)
        if verdict.is_psd:
            assert lowest >= -1e-8 * scale
        else:
            assert quad_form(M, verdict.witness_vector) < 0
            assert lowest < 1e-8 * scale


def test_principal_submatrix():
    M = moment_matrix(p1)
    assert principal_submatrix(M, [(2, 0), (1, 1)]) == [[1, -1], [-1, 0]]
    assert principal_submatrix(M, M.basis) == M.rows()
    assert principal_submatrix(M, [(0, 2)]) == [[p1.a((0, 4))]]
    with pytest.raises(IndexOutOfBasis):
        principal_submatrix(M, [(3, 0)])


def test_dual_membership_examples():
    assert dual_membership(p1, 1).member
    v = dual_membership(p1, 2)
    assert not v.member and v.violating_support == ((2, 0), (1, 1))
    assert dual_membership(p2, 2).member
    v3 = dual_membership(p2, 3)
    assert not v3.member
    assert pair_with_square(p2, from_raw_terms(2, 2, list(zip(v3.violating_vector, v3.violating_support)))) < 0


def test_dual_membership_witness_is_exact():
    rng = random.Random(3)
    for _ in range(100):
        q = from_raw_terms(3, 4, [(rng.randint(-2, 6), i) for i in index_set(3, 4)])
        for k in (1, 2, 3):
            v = dual_membership(q, k)
            if not v.member:
                h = from_raw_terms(3, 2, list(zip(v.violating_vector, v.violating_support)))
                assert len(v.violating_support) <= k
                assert pair_with_square(q, h) < 0


def test_dual_membership_errors():
    with pytest.raises(KOutOfRange):
        dual_membership(p1, 0)
    q = from_raw_terms(3, 6, [(1, (6, 0, 0))])
    with pytest.raises(SubsetExplosion):
        dual_membership(q, 5, cap=10)
    assert dual_membership(q, 5, cap=10, force=True).member


def test_dual_membership_threads_match_serial(monkeypatch):
    rng = random.Random(11)
    for _ in range(20):
        q = from_raw_terms(3, 4, [(rng.randint(-1, 8), i) for i in index_set(3, 4)])
        serial = dual_membership(q, 3, threads=1)
        threaded = dual_membership(q, 3, threads=4)
        assert serial == threaded
    monkeypatch.setenv("SOSKIT_THREADS", "3")
    assert dual_membership(p2, 3) == dual_membership(p2, 3, threads=1)


def test_k_above_basis_size_is_clamped():
    assert dual_membership(p2, 7).member == dual_membership(p2, 3).member


def test_quartic_criteria():
    c2 = dual_quartic_criteria(p2)
    assert c2.b == (4, -2, 1, -2, 4)
    assert c2.minors == (0, 15, 0)
    assert c2.member_k2 and not c2.member_k3
    c = dual_quartic_criteria(x**4 + y**4)
    assert c.b == (1, 0, 0, 0, 1) and all(m >= 0 for m in c.minors) and c.member_k2
    assert dual_quartic_criteria(p1).minors[0] == -1
    with pytest.raises(WrongShape):
        dual_quartic_criteria(x**6)


def test_quartic_criteria_match_dual_membership():
    rng = random.Random(5)
    for _ in range(200):
        q = from_raw_terms(2, 4, [(rng.randint(-3, 6), i) for i in index_set(2, 4)])
        c = dual_quartic_criteria(q)
        assert c.member_k1 == dual_membership(q, 1).member
        assert c.member_k2 == dual_membership(q, 2).member


def test_pointedness_examples():
    assert pointedness_decomposition((3, 1)) == ((2, 0), (1, 1))
    assert pointedness_decomposition((4, 0)) == ((2, 0), (2, 0))
    assert pointedness_decomposition((2, 2, 2)) == ((2, 1, 0), (0, 1, 2))
    j, jp = (2, 0), (1, 1)
    plus, minus = monomial(j) + monomial(jp), monomial(j) - monomial(jp)
    assert plus * plus - minus * minus == 4 * monomial((3, 1))
    with pytest.raises(OddDegree):
        pointedness_decomposition((2, 1))


@st.composite
def quartics(draw, n):
    idx = index_set(n, 4)
    coeffs = draw(st.lists(st.integers(-6, 6), min_size=len(idx), max_size=len(idx)))
    return from_raw_terms(n, 4, list(zip(coeffs, idx)))


@given(st.integers(2, 3).flatmap(quartics))
@settings(max_examples=40, deadline=None)
def test_pointedness_recovery(q):
    for i in index_set(q.n, 4):
        j, jp = pointedness_decomposition(i)
        assert tuple(a + b for a, b in zip(j, jp)) == i
        assert recover_coefficient(q, i) == q.a(i)


@given(st.integers(2, 3).flatmap(quartics), st.data())
@settings(max_examples=40, deadline=None)
def test_hankel_consistency(q, data):
    idx = index_set(q.n, 2)
    coeffs = data.draw(st.lists(st.integers(-4, 4), min_size=len(idx), max_size=len(idx)))
    h = from_raw_terms(q.n, 2, list(zip(coeffs, idx)))
    assert pair_with_square(q, h) == fischer_inner(q, h * h)


@given(st.integers(2, 3).flatmap(quartics))
@settings(max_examples=40, deadline=None)
def test_dual_nestedness(q):
    levels = [dual_membership(q, k).member for k in range(1, len(index_set(q.n, 2)) + 1)]
    for k, member in enumerate(levels):
        if member:
            assert all(levels[:k])


@given(st.integers(2, 3).flatmap(quartics))
@settings(max_examples=40, deadline=None)
def test_level_one_is_the_even_diagonal(q):
    diagonal_ok = all(q.a(tuple(2 * e for e in i)) >= 0 for i in index_set(q.n, 2))
    assert dual_membership(q, 1).member == diagonal_ok
