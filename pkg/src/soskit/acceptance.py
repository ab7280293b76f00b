"""The built-in reproduction suite behind ``soskit verify-paper``.

Each item returns an :class:`ItemResult`; an item passes only if every exact
check holds and it finishes inside its time budget.  Items keep the forms
and verdicts they produced so that callers can re-check them independently.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .algebra import bbem_check
from .certificates import verify_certificate, verify_witness
from .constructions import binary_separator, dual_example, extremal_generator, hurwitz, motzkin, trinomial
from .errors import DualityViolation
from .forms import Form, from_raw_terms, index_set, monomial, num_terms, power, variable
from .moment import (
    dual_membership,
    dual_quartic_criteria,
    moment_matrix,
    pair_with_square,
    pointedness_decomposition,
    recover_coefficient,
)
from .solver import MembershipVerdict, SolverOptions, Status, membership

__all__ = ["ItemResult", "ITEMS", "run_suite", "item_names"]


@dataclass
class ItemResult:
    number: int
    name: str
    passed: bool
    seconds: float
    limit: float
    detail: str = ""
    verdicts: list = field(default_factory=list, repr=False)

    @property
    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name:<12s} {self.seconds:7.2f}s (limit {self.limit:g}s)  {self.detail}"


class _Checks:
    """Collects named boolean checks; the first failure becomes the detail."""

    def __init__(self):
        self.failures: list[str] = []
        self.count = 0
        self.verdicts: list[tuple[Form, int, MembershipVerdict]] = []

    def __call__(self, ok: bool, what: str) -> bool:
        self.count += 1
        if not ok:
            self.failures.append(what)
        return ok

    def record(self, p: Form, k: int, verdict: MembershipVerdict) -> MembershipVerdict:
        self.verdicts.append((p, k, verdict))
        return verdict


def _member(c: _Checks, p: Form, k: int, what: str, opts: Optional[SolverOptions] = None) -> MembershipVerdict:
    v = c.record(p, k, membership(p, k, opts))
    ok = v.status is Status.MEMBER and v.certificate is not None and verify_certificate(v.certificate, p, k)
    c(ok, f"{what}: expected a verified certificate at k={k}, got {v.status.name}")
    if ok:
        c(all(len(h.coeffs) <= k for h in v.certificate.summands), f"{what}: a summand has more than {k} terms")
    return v


def _not_member(c: _Checks, p: Form, k: int, what: str, opts: Optional[SolverOptions] = None) -> MembershipVerdict:
    v = c.record(p, k, membership(p, k, opts))
    ok = v.status is Status.NOT_MEMBER and v.witness is not None and verify_witness(v.witness, p, k)
    c(ok, f"{what}: expected a verified witness at k={k}, got {v.status.name}")
    return v


def _x():
    return variable(2, 0), variable(2, 1)


def item_duals(c: _Checks, seed: int):
    x, y = _x()
    p1, p2 = dual_example(1), dual_example(2)
    F = Fraction
    c(moment_matrix(p1).rows() == [[1, -1, 0], [-1, 0, 0], [0, 0, 0]], "moment matrix of the first example")
    c(moment_matrix(p2).rows() == [[4, -2, 1], [-2, 1, -2], [1, -2, 4]], "moment matrix of the second example")
    c(moment_matrix(p2).determinant() == F(-9), "determinant -9")
    c(pair_with_square(p1, x * x + x * y) == -1, "pairing -1")
    c(pair_with_square(p2, x * x + 2 * x * y + y * y) == -2, "pairing -2")
    c(dual_membership(p1, 1).member and not dual_membership(p1, 2).member, "first example sits at level 1 only")
    c(dual_membership(p2, 2).member and not dual_membership(p2, 3).member, "second example sits at level 2 only")
    crit = dual_quartic_criteria(p2)
    c(crit.member_k2 and not crit.member_k3, "quartic criteria agree for the second example")


def item_separation(c: _Checks, seed: int):
    for k in range(2, 6):
        p = power(binary_separator(4, k), 2)
        _member(c, p, k, f"g_{k}^2")
        _not_member(c, p, k - 1, f"g_{k}^2")


def item_trinomial(c: _Checks, seed: int):
    t = trinomial(3, 3)
    p = t * t
    _member(c, p, 2, "trinomial squared")
    _not_member(c, p, 1, "trinomial squared")


def item_motzkin(c: _Checks, seed: int):
    p = motzkin()
    v = _not_member(c, p, 10, "Motzkin")
    if v.witness is not None:
        c(dual_membership(v.witness.q, 10, force=True).member, "Motzkin witness has a PSD moment matrix")


def item_hurwitz(c: _Checks, seed: int):
    p = hurwitz((2, 1, 1))
    v = _member(c, p, 2, "Hurwitz (2,1,1)")
    if v.certificate is not None:
        c(all(len(h.coeffs) <= 2 for h in v.certificate.summands), "Hurwitz summands are binomials")


def extremal_parameters(seed: int, count: int = 20):
    rng = random.Random(seed)
    out = []
    for m in range(count):
        r = Fraction(rng.randint(1, 20), rng.randint(1, 6))
        s = Fraction(rng.randint(1, 20), rng.randint(1, 6))
        # t <= min(r, s) guarantees r*s >= t^2; every fifth set sits on the boundary
        t = min(r, s) * Fraction(rng.randint(1, 10), 10)
        if m % 5 == 0:
            r = s = t
        out.append((r, s, t, rng.choice((1, -1)), rng.choice((1, -1))))
    return out


def item_extremal(c: _Checks, seed: int):
    x, y = _x()
    for r, s, t, e1, e2 in extremal_parameters(seed):
        q = extremal_generator(r, s, t, e1, e2)
        tag = f"(r,s,t,e1,e2)=({r},{s},{t},{e1},{e2})"
        c(pair_with_square(q, t * x * x - e1 * r * x * y) == 0, f"first zero pairing {tag}")
        c(pair_with_square(q, t * y * y - e2 * s * x * y) == 0, f"second zero pairing {tag}")
        c(dual_membership(q, 2).member, f"level-2 dual membership {tag}")
        crit = dual_quartic_criteria(q)
        c(crit.minors[0] == 0 and crit.minors[2] == 0, f"vanishing minors {tag}")


def random_form(rng: random.Random, n: int, d: int, lo: int = -3, hi: int = 3, density: float = 0.6) -> Form:
    terms = [(rng.randint(lo, hi), i) for i in index_set(n, d) if rng.random() < density]
    return from_raw_terms(n, d, terms)


def item_bbem(c: _Checks, seed: int):
    rng = random.Random(seed)
    for m in range(500):
        n = rng.randint(1, 3)
        f = random_form(rng, n, rng.randint(0, 4))
        g = random_form(rng, n, rng.randint(0, 4))
        res = bbem_check(f, g)
        c(res.holds, f"pair {m}: ||fg||^2 = {res.lhs} < {res.rhs}")
    for e1 in range(5):
        for e2 in range(5):
            res = bbem_check(monomial((e1, 0)), monomial((0, e2)))
            c(res.equality, f"equality for x^{e1}, y^{e2}")


def item_pointedness(c: _Checks, seed: int):
    rng = random.Random(seed)
    c(all(recover_coefficient(from_raw_terms(2, 4, []), i) == 0 for i in index_set(2, 4)), "zero form")
    for m in range(50):
        q = random_form(rng, 2, 4, -9, 9, density=0.8)
        recovered = {i: recover_coefficient(q, i) for i in index_set(2, 4)}
        c(all(recovered[i] == q.a(i) for i in recovered), f"form {m}: coefficients recovered")
        pairings = []
        for i in index_set(2, 4):
            j, jp = pointedness_decomposition(i)
            for sign in (1, -1):
                pairings.append(pair_with_square(q, monomial(j) + sign * monomial(jp)))
        c(any(pairings) == (not q.is_zero()), f"form {m}: square pairings vanish only for zero")


ROBINSON_BOUND = Fraction(1, 100)


def robinson_perturbations(seed: int, count: int = 10) -> list[Form]:
    rng = random.Random(seed)
    base = from_raw_terms(3, 4, [(1, (4, 0, 0)), (1, (0, 4, 0)), (1, (0, 0, 4))])
    out = []
    for _ in range(count):
        terms = [(Fraction(rng.randint(-100, 100), 100) * ROBINSON_BOUND, i) for i in index_set(3, 4)]
        out.append(base + from_raw_terms(3, 4, terms))
    return out


def item_robinson(c: _Checks, seed: int):
    for m, p in enumerate(robinson_perturbations(seed)):
        _member(c, p, 2, f"perturbation {m}")


def nestedness_forms(seed: int, count: int = 200) -> list[Form]:
    """A mix of random forms and nonnegative combinations of point evaluations."""
    rng = random.Random(seed)
    out = []
    for m in range(count):
        n = 2 if m % 2 == 0 else 3
        kind = m % 6 // 2
        if kind == 0:
            out.append(random_form(rng, n, 4))
        elif kind == 1:
            q = from_raw_terms(n, 4, [])
            for _ in range(rng.randint(1, 3)):
                v = [rng.randint(-2, 2) for _ in range(n)]
                lin = from_raw_terms(n, 1, [(v[j], tuple(int(t == j) for t in range(n))) for j in range(n)])
                q = q + power(lin, 4)
            out.append(q)
        else:
            q = random_form(rng, n, 4, -2, 2)
            evens = [(rng.randint(2, 6), tuple(2 * e for e in i)) for i in index_set(n, 2)]
            out.append(q + from_raw_terms(n, 4, evens))
    return out


NESTEDNESS_OPTIONS = SolverOptions(max_iters=2000)


def item_nestedness(c: _Checks, seed: int):
    forms = nestedness_forms(seed)
    for m, q in enumerate(forms):
        N = num_terms(q.n, 2)
        levels = [dual_membership(q, k).member for k in range(1, N + 1)]
        c(all(levels[a] or not levels[b] for b in range(N) for a in range(b)), f"form {m}: dual levels not nested")
    for m, p in enumerate(forms):
        try:
            c.record(p, 2, membership(p, 2, NESTEDNESS_OPTIONS))
        except DualityViolation:
            c(False, f"form {m}: certificate and witness both verified")


ITEMS: list[tuple[int, str, float, Callable]] = [
    (1, "duals", 1.0, item_duals),
    (2, "separation", 60.0, item_separation),
    (3, "trinomial", 30.0, item_trinomial),
    (4, "motzkin", 120.0, item_motzkin),
    (5, "hurwitz", 30.0, item_hurwitz),
    (6, "extremal", 5.0, item_extremal),
    (7, "bbem", 10.0, item_bbem),
    (8, "pointedness", 5.0, item_pointedness),
    (9, "robinson", 120.0, item_robinson),
    (10, "nestedness", 60.0, item_nestedness),
]


def item_names() -> list[str]:
    return [name for _, name, _, _ in ITEMS]


def _never_both(verdicts) -> list[str]:
    """Re-check every verdict: one kind of evidence only, and it must verify."""
    problems = []
    for p, k, v in verdicts:
        has_cert = v.certificate is not None and v.certificate.exact and verify_certificate(v.certificate, p, min(k, v.certificate.k))
        has_wit = v.witness is not None and verify_witness(v.witness, p)
        if has_cert and has_wit:
            problems.append(f"both kinds of evidence for {p.pretty()} at k={k}")
        if v.status is Status.MEMBER and not has_cert:
            problems.append(f"MEMBER without a verified certificate at k={k}")
        if v.status is Status.NOT_MEMBER and not has_wit:
            problems.append(f"NOT_MEMBER without a verified witness at k={k}")
    return problems


def run_item(number: int, name: str, limit: float, fn: Callable, seed: int = 0) -> ItemResult:
    checks = _Checks()
    start = time.perf_counter()
    try:
        fn(checks, seed)
        error = None
    except Exception as exc:  # an item that crashes fails, it does not abort the suite
        error = f"{type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - start
    problems = list(checks.failures)
    if error:
        problems.insert(0, error)
    problems += _never_both(checks.verdicts)
    if seconds >= limit:
        problems.append(f"over the {limit:g}s budget")
    detail = f"{checks.count} checks" if not problems else f"{len(problems)} problem(s); first: {problems[0]}"
    return ItemResult(number, name, not problems, seconds, limit, detail, checks.verdicts)


def run_suite(only: Optional[Iterable[str]] = None, seed: int = 0, report: Optional[Callable[[ItemResult], None]] = None) -> list[ItemResult]:
    wanted = set(only) if only else None
    if wanted:
        unknown = wanted - set(item_names()) - {str(n) for n, *_ in ITEMS}
        if unknown:
            raise ValueError(f"unknown suite item(s): {', '.join(sorted(unknown))}")
    results = []
    for number, name, limit, fn in ITEMS:
        if wanted and name not in wanted and str(number) not in wanted:
            continue
        res = run_item(number, name, limit, fn, seed)
        if report:
            report(res)
        results.append(res)
    return results
