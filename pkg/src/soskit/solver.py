"""Membership in the k-sparse sos cones by factor-width-k Gram feasibility.

A form ``p`` of degree 2d is a sum of squares of k-term forms exactly when it
has a Gram matrix that splits as a sum of PSD blocks, each supported on a
k-subset of the degree-d monomial basis.  The primal search looks for such
blocks with a Douglas-Rachford splitting between the PSD cone and the affine
coefficient constraints.  The dual search looks for a moment-side ``q`` whose
k x k principal submatrices are PSD and which pairs negatively with ``p``.
Neither numeric answer is trusted: verdicts are issued only after exact
rounding and exact verification.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .certificates import DualWitness, SosCertificate, numeric_summands, verify_certificate, verify_witness
from .errors import (
    BlockNotPsd,
    DualityViolation,
    KOutOfRange,
    NoWitnessFound,
    OddDegree,
    RoundingFailed,
    SupportExplosion,
)
from .forms import Form, MultiIndex, fischer_inner, from_raw_terms, index_set, num_terms
from .linalg import psd_project
from .rounding import polish_blocks, rational_squares, rationalize_and_verify, round_dual

log = logging.getLogger(__name__)

__all__ = [
    "Status",
    "SolverOptions",
    "GramSystem",
    "FeasibilityResult",
    "MembershipVerdict",
    "gram_basis",
    "gram_system",
    "fwk_feasibility",
    "extract_certificate",
    "dual_witness_search",
    "membership",
]


class Status(enum.Enum):
    MEMBER = "member"
    NOT_MEMBER = "not_member"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class SolverOptions:
    rho: float = 1.0
    tol_primal: float = 1e-9
    tol_dual: float = 1e-9
    max_iters: int = 50000
    support_cap: int = 10**6
    seed: int = 0
    prune: bool = True
    eig: str = "jacobi"

    def __post_init__(self):
        for name in ("rho", "tol_primal", "tol_dual"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1 or self.support_cap < 1:
            raise ValueError("max_iters and support_cap must be positive")
        if self.eig not in ("jacobi", "lapack"):
            raise ValueError(f"unknown eigensolver {self.eig!r}")


def _half_degree(p: Form) -> int:
    if p.d % 2:
        raise OddDegree(f"form has odd degree {p.d}")
    return p.d // 2


def _level(p: Form, k: int) -> int:
    """Validate ``k`` and clamp it to N(n,d), where the cones stop growing."""
    d = _half_degree(p)
    if k < 1:
        raise KOutOfRange(f"k must be at least 1, got {k}")
    return min(k, num_terms(p.n, d))


def _double(i: MultiIndex) -> MultiIndex:
    return tuple(2 * e for e in i)


def gram_basis(p: Form, prune: bool = True) -> tuple[MultiIndex, ...]:
    """Degree-d monomials that may appear in a Gram matrix of ``p``.

    With ``prune``, a monomial ``i`` is dropped when ``p`` has no ``x^(2i)``
    term and ``2i`` has no representation ``j + j'`` in the remaining basis
    other than ``i + i``: its diagonal Gram entry is then forced to zero, so
    PSD-ness kills the whole row.  Repeated to a fixpoint.
    """
    d = _half_degree(p)
    basis = list(index_set(p.n, d))
    if not prune:
        return tuple(basis)
    while True:
        current = set(basis)
        for i in basis:
            u = _double(i)
            if p.a(u) != 0:
                continue
            other = any(
                j != i and tuple(a - b for a, b in zip(u, j)) in current
                for j in current
                if all(b <= a for a, b in zip(u, j))
            )
            if not other:
                basis.remove(i)
                break
        else:
            return tuple(basis)


@dataclass(frozen=True)
class GramSystem:
    """Block layout and linear constraints of the factor-width Gram problem.

    ``uidx[b, r, c]`` is the position in ``monomials`` of the exponent sum of
    the r-th and c-th members of ``subsets[b]``; ``targets`` are the raw
    coefficients of ``p`` in the same order.
    """

    p: Form
    k: int
    basis: tuple[MultiIndex, ...]
    subsets: tuple[tuple[MultiIndex, ...], ...]
    monomials: tuple[MultiIndex, ...]
    targets: np.ndarray = field(repr=False)
    uidx: np.ndarray = field(repr=False)
    constraint_map: dict = field(repr=False)
    unreachable: tuple[MultiIndex, ...] = ()

    @property
    def feasible_support(self) -> bool:
        return not self.unreachable


def gram_system(p: Form, k: int, opts: Optional["SolverOptions"] = None) -> GramSystem:
    opts = opts or SolverOptions()
    k = _level(p, k)
    basis = gram_basis(p, opts.prune)
    U = index_set(p.n, p.d)
    upos = {u: t for t, u in enumerate(U)}
    m = len(basis)
    s = min(k, m)
    count = math.comb(m, s) if m else 0
    if count > opts.support_cap:
        raise SupportExplosion(f"C({m},{s}) = {count} Gram blocks exceeds the cap {opts.support_cap}")
    subsets = tuple(tuple(basis[t] for t in S) for S in combinations(range(m), s)) if m else ()
    uidx = np.array(
        [[[upos[tuple(a + b for a, b in zip(i, j))] for j in S] for i in S] for S in subsets],
        dtype=np.intp,
    ).reshape(len(subsets), s, s)
    pairs: dict[MultiIndex, list] = {u: [] for u in U}
    for r, i in enumerate(basis):
        for j in basis[r:]:
            pairs[tuple(a + b for a, b in zip(i, j))].append((i, j))
    targets = np.array([float(p.raw(u)) for u in U])
    # 1x1 blocks only see the diagonal pairs
    covered = {u: [(i, j) for i, j in v if s > 1 or i == j] for u, v in pairs.items()}
    unreachable = tuple(u for u in U if p.a(u) != 0 and not covered[u])
    return GramSystem(
        p=p,
        k=k,
        basis=basis,
        subsets=subsets,
        monomials=U,
        targets=targets,
        uidx=uidx,
        constraint_map={u: tuple(v) for u, v in pairs.items()},
        unreachable=unreachable,
    )


def _symmetric_noise(rng: np.random.Generator, shape, size: float) -> np.ndarray:
    z = rng.standard_normal(shape) * size
    return 0.5 * (z + np.swapaxes(z, -1, -2))


class _Primal:
    """Resumable splitting iteration for the Gram blocks.

    The problem is pure feasibility, so the penalty parameter cancels and
    ``rho`` plays no role here.  ``margin`` asks for blocks ``>= margin * I``,
    which pushes the iterate off the PSD boundary when there is room.
    """

    def __init__(self, system: GramSystem, opts: SolverOptions, margin: float = 0.0):
        self.system = system
        self.opts = opts
        self.margin = margin
        self.scale = float(np.abs(system.targets).max()) or 1.0
        self.b = system.targets / self.scale
        self.flat = system.uidx.ravel()
        self.nu = len(system.monomials)
        self.count = np.bincount(self.flat, minlength=self.nu).astype(float)
        rng = np.random.default_rng(opts.seed)
        self.z = _symmetric_noise(rng, system.uidx.shape, 1e-3)
        self.x = np.zeros_like(self.z)
        self.V = None
        self.iterations = 0
        self.residual = math.inf
        self.change = math.inf

    def _defect(self, X: np.ndarray) -> np.ndarray:
        return np.bincount(self.flat, weights=X.ravel(), minlength=self.nu) - self.b

    def _project_affine(self, X: np.ndarray) -> np.ndarray:
        # A A^T is diagonal (each entry feeds one monomial), so this is exact
        corr = self._defect(X) / np.maximum(self.count, 1.0)
        return X - corr[self.system.uidx]

    @property
    def converged(self) -> bool:
        return self.residual < self.opts.tol_primal and self.change < self.opts.tol_dual

    def run(self, iters: int) -> bool:
        for _ in range(iters):
            x, self.V = psd_project(self.z, self.V, self.margin, self.opts.eig)
            y = self._project_affine(2 * x - self.z)
            self.z += y - x
            self.change = float(np.abs(x - self.x).max())
            self.x = x
            self.iterations += 1
            if self.change < self.opts.tol_dual or self.iterations % 25 == 0:
                self.residual = float(np.abs(self._defect(x)).max())
                if self.converged:
                    return True
        self.residual = float(np.abs(self._defect(self.x)).max())
        return self.converged

    def blocks(self) -> tuple:
        return tuple(zip(self.system.subsets, self.x * self.scale))


class _Dual:
    """Resumable splitting iteration for the moment side.

    Minimizes ``[p, q]`` over normalized coefficient vectors ``q`` with
    ``trace(M_q) = 1`` and every k x k principal submatrix of ``M_q`` PSD.
    A negative optimum is a refutation; normalizing the trace instead of the
    pairing keeps the problem bounded and well posed even when the margin
    of non-membership is tiny.
    """

    BALANCE_EVERY = 50

    def __init__(self, p: Form, k: int, opts: SolverOptions):
        self.p = p
        self.opts = opts
        self.rho = opts.rho
        d = p.d // 2
        basis = index_set(p.n, d)
        U = index_set(p.n, p.d)
        upos = {u: t for t, u in enumerate(U)}
        s = min(k, len(basis))
        self.uidx = np.array(
            [[[upos[tuple(a + b for a, b in zip(basis[r], basis[c]))] for c in S] for r in S]
             for S in combinations(range(len(basis)), s)],
            dtype=np.intp,
        )
        raw = np.array([float(p.raw(u)) for u in U])
        self.w = raw / (np.linalg.norm(raw) or 1.0)
        evens = {upos[_double(i)] for i in basis}
        self.e = np.array([1.0 if t in evens else 0.0 for t in range(len(U))])
        self.flat = self.uidx.ravel()
        self.nu = len(U)
        self.D = 1.0 + np.bincount(self.flat, minlength=self.nu)
        self.eD = self.e / self.D
        self.eeD = float(self.e @ self.eD)
        rng = np.random.default_rng(opts.seed + 1)
        self.zq = np.zeros(self.nu)
        self.zY = _symmetric_noise(rng, self.uidx.shape, 1e-3)
        self.xq = np.zeros(self.nu)
        self.yY = np.zeros_like(self.zY)
        self.V = None
        self.iterations = 0
        self.residual = math.inf
        self.change = math.inf

    def _project_affine(self, q0: np.ndarray, Y0: np.ndarray):
        qh = (q0 + np.bincount(self.flat, weights=Y0.ravel(), minlength=self.nu)) / self.D
        mu = (self.e @ qh - 1.0) / self.eeD
        q = qh - mu * self.eD
        return q, q[self.uidx]

    @property
    def objective(self) -> float:
        return float(self.w @ self.xq)

    @property
    def converged(self) -> bool:
        return self.residual < self.opts.tol_primal and self.change < self.opts.tol_dual

    def run(self, iters: int) -> bool:
        for _ in range(iters):
            xq, xY = self._project_affine(self.zq - self.w / self.rho, self.zY)
            yY, self.V = psd_project(2 * xY - self.zY, self.V, 0.0, self.opts.eig)
            self.zq = xq
            self.zY = self.zY + yY - xY
            self.residual = float(np.abs(xY - yY).max())
            self.change = float(np.abs(yY - self.yY).max())
            self.xq, self.yY = xq, yY
            self.iterations += 1
            if self.converged:
                return True
            if self.iterations % self.BALANCE_EVERY == 0:
                self._balance(xq, xY)
        return self.converged

    def _balance(self, xq, xY):
        r, s = self.residual, self.rho * self.change
        factor = 2.0 if r > 10 * s else 0.5 if s > 10 * r else 1.0
        if factor != 1.0:
            # keep the scaled multiplier consistent with the new penalty
            self.zq = xq + (self.zq - xq) / factor
            self.zY = xY + (self.zY - xY) / factor
            self.rho *= factor

    def values(self) -> np.ndarray:
        return self.xq


@dataclass(frozen=True)
class FeasibilityResult:
    blocks: tuple
    converged: bool
    iterations: int
    residual: float
    change: float
    unreachable: tuple = ()


def fwk_feasibility(p: Form, k: int, opts: Optional[SolverOptions] = None, margin: float = 0.0) -> FeasibilityResult:
    """Numeric factor-width-k Gram blocks for ``p``.

    Check ``converged`` on the result: when the iteration limit is reached the
    last iterate is returned with ``converged=False``.
    """
    opts = opts or SolverOptions()
    system = gram_system(p, k, opts)
    if system.unreachable or not system.subsets:
        return FeasibilityResult((), p.is_zero(), 0, 0.0 if p.is_zero() else math.inf, 0.0, system.unreachable)
    solver = _Primal(system, opts, margin)
    solver.run(opts.max_iters)
    return FeasibilityResult(
        solver.blocks(), solver.converged, solver.iterations, solver.residual, solver.change
    )


def extract_certificate(blocks, k: int, tol: float = 1e-8) -> SosCertificate:
    """Numeric squares read off PSD Gram blocks; each stays on its block's support."""
    blocks = tuple((tuple(S), np.asarray(Q, dtype=float)) for S, Q in blocks)
    summands = []
    for S, Q in blocks:
        if len(S) > k:
            raise ValueError(f"block of size {len(S)} exceeds k={k}")
        Q = 0.5 * (Q + Q.T)
        scale = max(1.0, float(np.abs(Q).max()))
        lowest = float(np.linalg.eigvalsh(Q).min()) if Q.size else 0.0
        if lowest < -tol * scale:
            raise BlockNotPsd(f"block on {S} has eigenvalue {lowest:.3g}")
        summands.extend(numeric_summands(S, Q))
    return SosCertificate(k=k, summands=tuple(summands), exact=False, blocks=blocks)


@dataclass(frozen=True)
class MembershipVerdict:
    status: Status
    k: int
    certificate: Optional[SosCertificate] = None
    witness: Optional[DualWitness] = None
    iterations: int = 0
    residuals: dict = field(default_factory=dict)


def _level_one(p: Form) -> MembershipVerdict:
    """Exact decision at k = 1: even monomials with non-negative coefficients."""
    for c, u in p.raw_terms():
        if any(e % 2 for e in u):
            # q = -sign(c) x^u has a zero diagonal in its moment matrix
            q = from_raw_terms(p.n, p.d, [(-1 if c > 0 else 1, u)])
            return MembershipVerdict(Status.NOT_MEMBER, 1, witness=DualWitness(q, fischer_inner(p, q), 1))
        if c < 0:
            q = from_raw_terms(p.n, p.d, [(1, u)])
            return MembershipVerdict(Status.NOT_MEMBER, 1, witness=DualWitness(q, fischer_inner(p, q), 1))
    d = p.d // 2
    summands = []
    for c, u in p.raw_terms():
        half = tuple(e // 2 for e in u)
        summands.extend(from_raw_terms(p.n, d, [(r, half)]) for r in rational_squares(c))
    return MembershipVerdict(Status.MEMBER, 1, certificate=SosCertificate(1, tuple(summands), exact=True))


def dual_witness_search(p: Form, k: int, opts: Optional[SolverOptions] = None) -> DualWitness:
    """An exactly verified refutation of ``p`` at level ``k``, or :class:`NoWitnessFound`."""
    opts = opts or SolverOptions()
    k = _level(p, k)
    if k == 1:
        verdict = _level_one(p)
        if verdict.witness is None:
            raise NoWitnessFound("p has only non-negative even terms")
        return verdict.witness
    n_sub = math.comb(num_terms(p.n, p.d // 2), k)
    if n_sub > opts.support_cap:
        raise SupportExplosion(f"{n_sub} principal submatrices exceeds the cap {opts.support_cap}")
    dual = _Dual(p, k, opts)
    chunk = 500
    while dual.iterations < opts.max_iters:
        done = dual.run(min(chunk, opts.max_iters - dual.iterations))
        witness = _try_dual(dual, p, k, opts)
        if witness is not None:
            return witness
        if done and dual.objective > -10 * dual.residual:
            break
        chunk *= 2
    raise NoWitnessFound(f"dual objective {dual.objective:.3g} after {dual.iterations} iterations")


def _try_dual(dual: _Dual, p: Form, k: int, opts: SolverOptions) -> Optional[DualWitness]:
    if not dual.objective < -10 * max(dual.residual, 1e-12):
        return None
    return round_dual(dual.values(), p, k, cap=max(opts.support_cap, 1))


def membership(p: Form, k: int, opts: Optional[SolverOptions] = None) -> MembershipVerdict:
    """Decide ``p`` in the k-sparse sos cone with exact evidence either way.

    Primal and dual iterations are interleaved in doubling chunks.  Rounding
    of the primal blocks is attempted whenever the coefficient residual has
    dropped by another factor of ten below 1e-3, and again with an interior
    margin if the unconstrained fixpoint rounds badly.  Without verified
    evidence the verdict is UNDECIDED, carrying the final residuals.
    """
    opts = opts or SolverOptions()
    requested = k
    k = _level(p, k)
    if p.is_zero():
        return MembershipVerdict(Status.MEMBER, requested, certificate=SosCertificate(k, (), exact=True))
    if k == 1:
        verdict = _level_one(p)
        return MembershipVerdict(verdict.status, requested, verdict.certificate, verdict.witness)

    system = gram_system(p, k, opts)
    primal = _Primal(system, opts) if system.feasible_support and system.subsets else None
    dual = _Dual(p, k, opts) if math.comb(num_terms(p.n, p.d // 2), k) <= opts.support_cap else None
    primal_on, dual_on = primal is not None, dual is not None

    certificate = witness = numeric = None
    next_try = 1e-3
    margins = [1e-3, 1e-5]
    chunk = 500
    spent = 0
    while spent < opts.max_iters and (primal_on or dual_on) and certificate is None and witness is None:
        step = min(chunk, opts.max_iters - spent)
        spent += step
        chunk *= 2
        if primal_on:
            primal.run(step)
            if primal.residual < next_try or primal.converged:
                next_try = min(next_try, primal.residual) / 10
                numeric, certificate = _try_primal(primal, p, k)
                if certificate is None and primal.converged:
                    if margins:
                        primal = _restart_with_margin(primal, system, opts, margins.pop(0))
                        next_try = 1e-3
                    else:
                        primal_on = False
        if dual_on:
            dual.run(step)
            witness = _try_dual(dual, p, k, opts)
            if dual.converged and witness is None and dual.objective > -10 * dual.residual:
                dual_on = False

    iterations = (primal.iterations if primal else 0) + (dual.iterations if dual else 0)
    residuals = {}
    if primal is not None:
        residuals["primal"] = primal.residual
    if dual is not None:
        residuals["dual"] = dual.residual
        residuals["dual_objective"] = dual.objective
    if certificate is not None and witness is not None:
        raise DualityViolation("both a certificate and a witness verified")
    if certificate is not None and verify_certificate(certificate, p, k):
        return MembershipVerdict(Status.MEMBER, requested, certificate=certificate, iterations=iterations, residuals=residuals)
    if witness is not None and verify_witness(witness, p, k, cap=max(opts.support_cap, 1)):
        return MembershipVerdict(Status.NOT_MEMBER, requested, witness=witness, iterations=iterations, residuals=residuals)
    return MembershipVerdict(Status.UNDECIDED, requested, certificate=numeric, iterations=iterations, residuals=residuals)


POLISH_TAUS = (1e-2, 1e-4, 1e-6, 1e-1)


def _try_primal(primal: _Primal, p: Form, k: int):
    """Numeric certificate plus, if rounding succeeds, the exact one."""
    blocks = primal.blocks()
    try:
        numeric = extract_certificate(blocks, k, tol=1e-6)
    except BlockNotPsd as exc:
        log.debug("skipping rounding: %s", exc)
        return None, None
    candidates = [blocks]
    for tau in POLISH_TAUS:
        polished = polish_blocks(blocks, p, tau)
        if polished is not None:
            candidates.append(polished)
    for cand in candidates:
        try:
            return numeric, rationalize_and_verify(SosCertificate(k, (), False, cand), p, k)
        except RoundingFailed as exc:
            log.debug("primal rounding at residual %.3g failed: %s", primal.residual, exc)
    return numeric, None


def _restart_with_margin(old: _Primal, system: GramSystem, opts: SolverOptions, margin: float) -> _Primal:
    fresh = _Primal(system, opts, margin)
    fresh.z = old.z.copy()
    fresh.iterations = old.iterations
    return fresh
