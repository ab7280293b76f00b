"""Turning floating-point Gram blocks and dual iterates into exact objects.

Primal side: each numeric block is first restricted to the face it appears
to lie on (its numerically-nonzero range, snapped to a rational projector),
the free entries are rounded by continued fractions with a growing
denominator bound, and the remaining affine defect is removed by an exact
minimum-norm correction.  The result is accepted only after exact PSD checks
and an exact re-expansion of the squares.

Dual side: a rounded iterate is nudged toward the interior of the dual cone
by a multiple of ``(x_1^2 + ... + x_n^2)^d`` and then checked exactly.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

import numpy as np
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.solvers.diophantine.diophantine import sum_of_four_squares

from .certificates import DualWitness, SosCertificate, verify_certificate
from .errors import RoundingFailed
from .forms import Form, fischer_inner, from_raw_terms, index_set, power, variable
from .moment import DEFAULT_SUBSET_CAP, dual_membership
from .rational import Matrix, independent_rows, inverse, is_psd_exact, matmul, transpose

log = logging.getLogger(__name__)

__all__ = [
    "DENOMINATORS",
    "rational_squares",
    "rationalize_and_verify",
    "round_dual",
    "interior_dual_form",
    "polish_blocks",
]

DENOMINATORS = tuple(2**e for e in range(10, 41))
DUAL_DENOMINATORS = (2**10, 2**16, 2**24, 2**32, 2**40)
RANK_TOLS = (1e-6, 1e-4, 1e-8)
PROJECTOR_DENOMINATORS = (2**4, 2**8, 2**12, 2**16)
KERNEL_DENOMINATORS = (2**4, 2**8)


FOUR_SQUARES_BITS = 512


def rational_squares(w: Fraction) -> list[Fraction]:
    """Rationals whose squares sum to ``w >= 0``.

    At most four for moderate sizes.  Larger numerators first shed greedy
    integer squares (each step halves the digit count), since the
    four-square search slows down badly on very long integers.
    """
    w = Fraction(w)
    if w < 0:
        raise ValueError("negative weight")
    if w == 0:
        return []
    num, den = w.numerator, w.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return [Fraction(rn, rd)]
    m = num * den
    roots = []
    while m.bit_length() > FOUR_SQUARES_BITS:
        r = isqrt(m)
        roots.append(r)
        m -= r * r
    if m:
        roots.extend(int(a) for a in sum_of_four_squares(m))
    return [Fraction(a, den) for a in roots if a]


def _snap(x: float, D: int) -> Fraction:
    return Fraction(float(x)).limit_denominator(D)


def _face_basis(Q: np.ndarray, tau: float) -> Optional[Matrix]:
    """Rational basis (columns) of the numerical range of ``Q``.

    Returns ``[]`` when the block is numerically zero, and the identity when
    the block has full rank or its range projector does not snap to an exact
    rational projector.
    """
    s = Q.shape[0]
    identity = [[Fraction(int(i == j)) for j in range(s)] for i in range(s)]
    w, V = np.linalg.eigh(0.5 * (Q + Q.T))
    keep = w > tau
    r = int(keep.sum())
    if r == 0:
        return []
    if r == s:
        return identity
    P = V[:, keep] @ V[:, keep].T
    for D in PROJECTOR_DENOMINATORS:
        R = [[Fraction(0)] * s for _ in range(s)]
        for i in range(s):
            for j in range(i, s):
                R[i][j] = R[j][i] = _snap(P[i, j], D)
        RR = [[sum((R[i][t] * R[t][j] for t in range(s)), Fraction(0)) for j in range(s)] for i in range(s)]
        if RR == R and sum(R[i][i] for i in range(s)) == r:
            cols = independent_rows(transpose(R))
            return [[R[i][c] for c in cols] for i in range(s)]
    K = V[:, ~keep]
    return _range_from_kernel(Q, K, tau) or _range_from_relations(K) or identity


def _range_from_kernel(Q: np.ndarray, K: np.ndarray, tau: float) -> Optional[Matrix]:
    """Face basis as the exact null space of a snapped echelon kernel basis.

    The echelon form of a rational kernel has small denominators even when
    the range projector does not.
    """
    A = K.T.copy()
    m, s = A.shape
    pivots = []
    for col in range(s):
        row = len(pivots)
        if row == m:
            break
        best = row + int(np.argmax(np.abs(A[row:, col])))
        if abs(A[best, col]) < 1e-8:
            continue
        A[[row, best]] = A[[best, row]]
        A[row] /= A[row, col]
        for other in range(m):
            if other != row:
                A[other] -= A[other, col] * A[row]
        pivots.append(col)
    if len(pivots) < m:
        return None
    free = [c for c in range(s) if c not in pivots]
    # any float snaps at large denominators, so only small ones count as evidence
    for D in KERNEL_DENOMINATORS:
        R = [[_snap(A[i, c], D) for c in range(s)] for i in range(m)]
        kernel = np.array(R, dtype=float)
        if np.abs(Q @ kernel.T).max() > tau * np.abs(kernel).sum(axis=1).max():
            continue
        # columns e_f - sum_i R[i][f] e_{pivot_i}
        basis = [[Fraction(0)] * len(free) for _ in range(s)]
        for t, f in enumerate(free):
            basis[f][t] = Fraction(1)
            for i, c in enumerate(pivots):
                basis[c][t] = -R[i][f]
        return basis
    return None


RELATION_SCALE = 10**6
RELATION_MAX_COEFF = 1000
RELATION_TOL = 1e-8


def _range_from_relations(K: np.ndarray) -> Optional[Matrix]:
    """Integer vectors orthogonal to the numeric kernel, found by LLL.

    When the kernel is spanned by monomial vectors of irrational real zeros,
    rational Gram matrices must also annihilate their conjugates; the
    rational face is then spanned by the integer relations among the
    kernel's coordinates.
    """
    s, m = K.shape
    rows = [
        [int(i == j) for j in range(s)] + [int(round(RELATION_SCALE * K[i, c])) for c in range(m)]
        for i in range(s)
    ]
    reduced = DomainMatrix([[ZZ(v) for v in row] for row in rows], (s, s + m), ZZ).lll().to_Matrix().tolist()
    found = []
    for row in reduced:
        c = np.array([int(v) for v in row[:s]], dtype=float)
        norm = np.linalg.norm(c)
        # short non-relations reach about 1/RELATION_SCALE; true ones sit at the kernel's accuracy
        if 0 < norm <= RELATION_MAX_COEFF and np.abs(c @ K).max() <= RELATION_TOL * np.abs(c).sum():
            found.append([Fraction(int(v)) for v in row[:s]])
    if not found or len(found) >= s:
        return None
    keep = independent_rows(found)
    return [[found[t][i] for t in keep] for i in range(s)]


def polish_blocks(blocks, p: Form, tau: float, iters: int = 60, tol: float = 1e-13):
    """Low-rank Gauss-Newton refinement of numeric Gram blocks.

    Each block is replaced by ``L L^T`` where ``L`` keeps the eigenpairs above
    ``tau`` times the largest eigenvalue overall.  Minimum-norm Gauss-Newton
    steps then drive the coefficient defect to zero.  On a face of the right
    rank this converges quadratically, whereas the splitting iteration is
    sublinear there.  Returns None if the defect does not vanish.
    """
    blocks = [(tuple(S), np.asarray(Q, dtype=float)) for S, Q in blocks]
    U = index_set(p.n, p.d)
    upos = {u: t for t, u in enumerate(U)}
    b = np.array([float(p.raw(u)) for u in U])
    scale = float(np.abs(b).max()) or 1.0
    b = b / scale
    eig = [np.linalg.eigh(0.5 * (Q + Q.T) / scale) for _, Q in blocks]
    top = max((float(w.max()) for w, _ in eig if w.size), default=0.0)
    if top <= 0:
        return None
    layout = []  # (support, uidx, rank, offset)
    factors = []
    offset = 0
    for (S, _), (w, V) in zip(blocks, eig):
        keep = w > tau * top
        r = int(keep.sum())
        if r == 0:
            continue
        uidx = np.array([[upos[tuple(x + y for x, y in zip(i, j))] for j in S] for i in S])
        layout.append((S, uidx, r, offset))
        factors.append((V[:, keep] * np.sqrt(w[keep])).ravel())
        offset += len(S) * r
    if not layout:
        return None
    z = np.concatenate(factors)

    def residual(z):
        total = -b.copy()
        for S, uidx, r, off in layout:
            L = z[off:off + len(S) * r].reshape(len(S), r)
            total += np.bincount(uidx.ravel(), weights=(L @ L.T).ravel(), minlength=len(U))
        return total

    def jacobian(z):
        J = np.zeros((len(U), len(z)))
        for S, uidx, r, off in layout:
            s = len(S)
            L = z[off:off + s * r].reshape(s, r)
            for a in range(s):
                for j in range(r):
                    # d(L L^T)[a, c] = L[c, j] and its mirror
                    np.add.at(J[:, off + a * r + j], uidx[a, :], L[:, j])
                    np.add.at(J[:, off + a * r + j], uidx[:, a], L[:, j])
        return J

    res = residual(z)
    for _ in range(iters):
        if np.abs(res).max() < tol:
            break
        step = np.linalg.lstsq(jacobian(z), -res, rcond=None)[0]
        z = z + step
        res = residual(z)
    if not np.abs(res).max() < tol:
        return None
    out = []
    for S, uidx, r, off in layout:
        L = z[off:off + len(S) * r].reshape(len(S), r)
        out.append((S, scale * (L @ L.T)))
    return tuple(out)


def rationalize_and_verify(cert: SosCertificate, p: Form, k: int) -> SosCertificate:
    """Exact certificate from a numeric one, or :class:`RoundingFailed`."""
    if p.is_zero():
        return SosCertificate(k=k, summands=(), exact=True)
    blocks = [(tuple(S), np.asarray(Q, dtype=float)) for S, Q in cert.blocks]
    if not blocks:
        raise RoundingFailed("numeric certificate carries no Gram blocks")
    n, d = p.n, p.d // 2
    U = index_set(n, p.d)
    upos = {u: t for t, u in enumerate(U)}
    target = [p.raw(u) for u in U]
    scale = max(abs(float(t)) for t in target)

    for tau in RANK_TOLS:
        faces = [_face_basis(Q / scale, tau) for _, Q in blocks]
        kept = [(S, Q, B) for (S, Q), B in zip(blocks, faces) if B]
        layout = []  # (support, B, r, offset)
        offset = 0
        for S, Q, B in kept:
            r = len(B[0])
            layout.append((S, B, r, offset))
            offset += r * (r + 1) // 2
        nv = offset
        if nv == 0:
            continue
        G = [[Fraction(0)] * nv for _ in U]
        y0 = np.zeros(nv)
        for (S, B, r, off), (_, Q, _) in zip(layout, kept):
            var = {}
            t = off
            for a in range(r):
                for b in range(a, r):
                    var[a, b] = var[b, a] = t
                    t += 1
            s = len(S)
            for row in range(s):
                for col in range(s):
                    u = upos[tuple(x + y for x, y in zip(S[row], S[col]))]
                    for a in range(r):
                        if not B[row][a]:
                            continue
                        for b in range(r):
                            if B[col][b]:
                                G[u][var[a, b]] += B[row][a] * B[col][b]
            Bf = np.array([[float(x) for x in rowB] for rowB in B])
            pinv = np.linalg.pinv(Bf)
            Y = pinv @ Q @ pinv.T
            for a in range(r):
                for b in range(a, r):
                    y0[var[a, b]] = 0.5 * (Y[a, b] + Y[b, a])
        rows = independent_rows(G)
        Gr = [G[i] for i in rows]
        tr = [target[i] for i in rows]
        if rows:
            GGt = [[sum((x * y for x, y in zip(gi, gj) if x and y), Fraction(0)) for gj in Gr] for gi in Gr]
            Kmat = matmul(transpose(Gr), inverse(GGt))
        else:
            Kmat = [[] for _ in range(nv)]
        prev = None
        consistent = None
        for D in DENOMINATORS:
            yr = [_snap(v, D) for v in y0]
            if yr == prev:
                continue
            prev = yr
            res = [t - sum((g * y for g, y in zip(row, yr) if g), Fraction(0)) for row, t in zip(Gr, tr)]
            y = [yv + sum((kv * rv for kv, rv in zip(krow, res) if rv), Fraction(0)) for yv, krow in zip(yr, Kmat)]
            if consistent is None:
                # dependent rows must agree with the independent ones
                consistent = all(
                    sum((g * v for g, v in zip(G[i], y) if g), Fraction(0)) == target[i] for i in range(len(U))
                )
                if not consistent:
                    log.debug("face at tau=%g cannot reproduce the target", tau)
                    break
            cert_exact = _assemble(layout, y, n, d, k)
            if cert_exact is not None and verify_certificate(cert_exact, p, k):
                return cert_exact
    raise RoundingFailed("no denominator bound produced an exactly verified certificate")


def _assemble(layout, y: Sequence[Fraction], n: int, d: int, k: int) -> Optional[SosCertificate]:
    # proportional factors are merged so each direction is split into squares once
    weights: dict[tuple, Fraction] = {}
    for S, B, r, off in layout:
        Y = [[Fraction(0)] * r for _ in range(r)]
        t = off
        for a in range(r):
            for b in range(a, r):
                Y[a][b] = Y[b][a] = y[t]
                t += 1
        verdict = is_psd_exact(Y)
        if not verdict.is_psd:
            return None
        for weight, l in verdict.factors:
            terms = [(sum((B[i][a] * l[a] for a in range(r)), Fraction(0)), S[i]) for i in range(len(S))]
            terms = [(c, u) for c, u in terms if c]
            if not terms:
                continue
            lead = terms[0][0]
            key = tuple(sorted((u, c / lead) for c, u in terms))
            weights[key] = weights.get(key, Fraction(0)) + weight * lead * lead
    summands = []
    for key, weight in weights.items():
        for c in rational_squares(weight):
            summands.append(from_raw_terms(n, d, [(c * ci, u) for u, ci in key]))
    return SosCertificate(k=k, summands=tuple(summands), exact=True)


def interior_dual_form(n: int, d: int) -> Form:
    """``(x_1^2 + ... + x_n^2)^d``: its moment matrix is positive definite."""
    s = variable(n, 0) * variable(n, 0)
    for j in range(1, n):
        s = s + variable(n, j) * variable(n, j)
    return power(s, d)


def round_dual(
    q_values: Sequence[float],
    p: Form,
    k: int,
    cap: int = DEFAULT_SUBSET_CAP,
    denominators: Sequence[int] = DUAL_DENOMINATORS,
) -> Optional[DualWitness]:
    """Exact dual witness near a numeric dual point, or None.

    ``q_values`` are normalized coefficients ``a(q;u)`` over the canonical
    degree-2d index set.
    """
    n, d = p.n, p.d // 2
    U = index_set(n, p.d)
    E = interior_dual_form(n, d)
    pE = fischer_inner(p, E)
    emax = max(abs(a) for a in E.coeffs.values())
    tried = set()
    for D in denominators:
        q = Form(n, p.d, {u: _snap(v, D) for u, v in zip(U, q_values)})
        if q in tried or q.is_zero():
            continue
        tried.add(q)
        pair = fischer_inner(p, q)
        if pair >= 0:
            continue
        qmax = max(abs(a) for a in q.coeffs.values())
        delta = -pair / (2 * pE) if pE > 0 else qmax / emax
        for shift in (Fraction(0), delta):
            cand = q + E * shift if shift else q
            cand_pair = fischer_inner(p, cand)
            if cand_pair < 0 and dual_membership(cand, k, cap=cap, force=True).member:
                return DualWitness(q=cand, pairing=cand_pair, k=k)
    return None
