"""Command-line front end.

Exit codes: 0 member, 1 not a member, 2 undecided; 10 bad input or
parameters, 11 k out of range, 12 too many supports for the configured cap.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import constructions as C
from .acceptance import item_names, run_suite
from .errors import KOutOfRange, ParseError, SoskitError, SubsetExplosion
from .forms import Form, MultiIndex
from .moment import dual_membership, moment_matrix, pair_with_square
from .solver import SolverOptions, Status, membership
from .textio import format_certificate, format_form, format_witness, parse_rational, read_form, write_text

EXIT_CODES = {Status.MEMBER: 0, Status.NOT_MEMBER: 1, Status.UNDECIDED: 2}
EXIT_BAD_INPUT = 10
EXIT_K_RANGE = 11
EXIT_EXPLOSION = 12


class UsageError(SoskitError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's own exit status 2 would collide with UNDECIDED
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


class Emitter:
    """Human-readable lines, or ``key=value`` records with ``--json-lines``."""

    def __init__(self, records: bool):
        self.records = records

    def record(self, **fields):
        if self.records:
            print(" ".join(f"{k}={_token(v)}" for k, v in fields.items()))

    def text(self, line: str = ""):
        if not self.records:
            print(line)


def _token(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return ";".join(_token(x) for x in v) or "-"
    if v is None:
        return "-"
    return str(v).replace(" ", "")


def _exponent(i: MultiIndex) -> str:
    return "(" + ",".join(map(str, i)) + ")"


def _solver_options(args) -> SolverOptions:
    try:
        return SolverOptions(
            rho=args.rho,
            tol_primal=args.tol,
            tol_dual=args.tol,
            max_iters=args.max_iters,
            support_cap=args.cap,
            seed=args.seed,
            prune=not args.no_prune,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_check(args, out: Emitter) -> int:
    p = read_form(args.form)
    if args.k < 1:
        raise KOutOfRange(f"k must be at least 1, got {args.k}")
    v = membership(p, args.k, _solver_options(args))
    artifact = None
    body = None
    if v.status is Status.MEMBER:
        body = format_certificate(v.certificate)
    elif v.status is Status.NOT_MEMBER:
        body = format_witness(v.witness)
    if body is not None and args.out:
        write_text(args.out, body)
        artifact = args.out
    residuals = {f"residual_{k}": val for k, val in v.residuals.items()}
    out.record(status=v.status.value, k=args.k, artifact=artifact, iterations=v.iterations, **residuals)
    out.text(f"status: {v.status.value}")
    out.text(f"k: {args.k}")
    out.text(f"iterations: {v.iterations}")
    for key, val in v.residuals.items():
        out.text(f"{key}: {val:.3g}")
    if body is not None and not args.out:
        out.text(body.rstrip("\n"))
    elif artifact:
        out.text(f"artifact: {artifact}")
    return EXIT_CODES[v.status]


def cmd_dual_check(args, out: Emitter) -> int:
    p = read_form(args.form)
    v = dual_membership(p, args.k, cap=args.cap, force=args.force)
    status = "member" if v.member else "not_member"
    support = [_exponent(i) for i in v.violating_support or ()]
    vector = [str(x) for x in v.violating_vector or ()]
    out.record(status=status, k=args.k, support=support, vector=vector, subsets=v.subsets_checked, artifact=None)
    out.text(f"status: {status}")
    out.text(f"k: {args.k}")
    out.text(f"subsets checked: {v.subsets_checked}")
    if not v.member:
        out.text(f"violating support: {' '.join(support)}")
        out.text(f"witness vector: {' '.join(vector)}")
    return 0 if v.member else 1


def cmd_gram(args, out: Emitter) -> int:
    M = moment_matrix(read_form(args.form))
    for i, row in zip(M.basis, M.entries):
        out.record(row=_exponent(i), entries=[str(x) for x in row])
        out.text(f"{_exponent(i):>14s}  " + " ".join(f"{str(x):>8s}" for x in row))
    return 0


def cmd_pair(args, out: Emitter) -> int:
    value = pair_with_square(read_form(args.form), read_form(args.square))
    out.record(pairing=str(value))
    out.text(str(value))
    return 0


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _rationals(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(parse_rational(t.strip()) for t in text.split(","))
    except ParseError as exc:
        raise UsageError(str(exc)) from None


def _index_list(text: str) -> tuple[tuple[int, ...], ...]:
    return tuple(_ints(part) for part in text.split(";") if part.strip())


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"construction {args.name} needs {', '.join(missing)}")


def _build(args) -> Form:
    name = args.name
    if name == "hurwitz":
        _need(args, "a")
        return C.hurwitz(_ints(args.a))
    if name == "agiform":
        _need(args, "lambdas", "alphas")
        return C.agiform(C.AgiformSpec(_rationals(args.lambdas), _index_list(args.alphas)))
    if name == "motzkin":
        return C.motzkin(classical=not args.agiform_scaling)
    if name == "separator":
        _need(args, "d", "k")
        return C.binary_separator(args.d, args.k)
    if name == "trinomial":
        _need(args, "n", "d")
        return C.trinomial(args.n, args.d)
    if name == "perturbed-fermat":
        _need(args, "n", "d")
        mons = _index_list(args.extra) if args.extra else ()
        eps = _rationals(args.eps) if args.eps else ()
        s = parse_rational(args.s) if args.s else Fraction(1, 100)
        return C.perturbed_fermat(args.n, args.d, C.PerturbationSpec(s, mons, eps))
    if name == "dual-example":
        _need(args, "which")
        return C.dual_example(args.which)
    if name == "extremal":
        _need(args, "r", "s", "t")
        r, s, t = (parse_rational(v) for v in (args.r, args.s, args.t))
        return C.extremal_generator(r, s, t, args.eps1, args.eps2)
    if name == "thicken":
        _need(args, "g", "lam")
        return C.thicken(read_form(args.g), parse_rational(args.lam))
    if name == "polya-lift":
        _need(args, "p", "r")
        return C.polya_lift(read_form(args.p), int(args.r))
    raise UsageError(f"unknown construction {name!r}")


CONSTRUCTIONS = (
    "hurwitz",
    "agiform",
    "motzkin",
    "separator",
    "trinomial",
    "perturbed-fermat",
    "dual-example",
    "extremal",
    "thicken",
    "polya-lift",
)


def cmd_construct(args, out: Emitter) -> int:
    p = _build(args)
    text = format_form(p)
    if args.out:
        write_text(args.out, text)
        out.record(construction=args.name, n=p.n, d=p.d, terms=len(p.coeffs), artifact=args.out)
        out.text(f"wrote {args.out}")
    else:
        out.record(construction=args.name, n=p.n, d=p.d, terms=len(p.coeffs), artifact=None)
        out.text(text.rstrip("\n"))
    return 0


def cmd_verify_paper(args, out: Emitter) -> int:
    only = [x.strip() for x in args.only.split(",")] if args.only else None
    try:
        results = run_suite(
            only=only,
            seed=args.seed,
            report=lambda r: (
                out.record(item=r.number, name=r.name, passed=r.passed, seconds=round(r.seconds, 3), limit=r.limit),
                out.text(r.line),
            ),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    passed = sum(r.passed for r in results)
    out.text(f"{passed}/{len(results)} items passed")
    return 0 if passed == len(results) else 1


def _add_solver_flags(sp):
    d = SolverOptions()
    sp.add_argument("--tol", type=float, default=d.tol_primal, help="primal and dual stopping tolerance")
    sp.add_argument("--max-iters", type=int, default=d.max_iters)
    sp.add_argument("--seed", type=int, default=d.seed)
    sp.add_argument("--rho", type=float, default=d.rho, help="penalty of the dual splitting")
    sp.add_argument("--cap", type=int, default=d.support_cap, help="maximum number of k-subsets")
    sp.add_argument("--no-prune", action="store_true", help="keep the full monomial basis")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="soskit", description="Sparse sum-of-squares cones: membership, duals, constructions.")
    parser.add_argument("--json-lines", action="store_true", help="emit key=value records instead of text")
    # accepted on either side of the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--json-lines", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("check", parents=[common], help="decide membership with an exact certificate or witness")
    sp.add_argument("form")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out", help="write the certificate or witness here")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("dual-check", parents=[common], help="exact membership in the dual cone")
    sp.add_argument("form")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--cap", type=int, default=SolverOptions().support_cap)
    sp.add_argument("--force", action="store_true", help="ignore the subset cap")
    sp.set_defaults(func=cmd_dual_check)

    sp = sub.add_parser("gram", parents=[common], help="print the moment matrix")
    sp.add_argument("form")
    sp.set_defaults(func=cmd_gram)

    sp = sub.add_parser("pair", parents=[common], help="print the pairing of a form with the square of another")
    sp.add_argument("form")
    sp.add_argument("square", help="form of half the degree; its square is paired")
    sp.set_defaults(func=cmd_pair)

    sp = sub.add_parser("construct", parents=[common], help="write a named form")
    sp.add_argument("name", choices=CONSTRUCTIONS)
    sp.add_argument("--out")
    sp.add_argument("--a", help="hurwitz exponents, e.g. 2,1,1")
    sp.add_argument("--lambdas", help="agiform weights, e.g. 1/3,1/3,1/3")
    sp.add_argument("--alphas", help="agiform exponents, e.g. '4,2,0;2,4,0;0,0,6'")
    sp.add_argument("--agiform-scaling", action="store_true", help="motzkin with weights summing to one")
    sp.add_argument("--n", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--s", help="perturbation box radius (default 1/100)")
    sp.add_argument("--extra", help="extra monomials, e.g. '1,1,1;2,1,0'")
    sp.add_argument("--eps", help="their raw coefficients, e.g. 1/100,-1/200")
    sp.add_argument("--which", type=int)
    sp.add_argument("--r")
    sp.add_argument("--t")
    sp.add_argument("--eps1", type=int, default=1)
    sp.add_argument("--eps2", type=int, default=1)
    sp.add_argument("--g", help="form file for thicken")
    sp.add_argument("--lam")
    sp.add_argument("--p", help="form file for polya-lift")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify-paper", parents=[common], help="run the built-in reproduction suite")
    sp.add_argument("--only", help=f"comma-separated items: {','.join(item_names())}")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Emitter(args.json_lines)
    try:
        return args.func(args, out)
    except KOutOfRange as exc:
        code, error = EXIT_K_RANGE, exc
    except SubsetExplosion as exc:
        code, error = EXIT_EXPLOSION, exc
    except (SoskitError, ValueError, OSError) as exc:
        code, error = EXIT_BAD_INPUT, exc
    out.record(error=type(error).__name__, exit=code)
    print(f"soskit: error: {error}", file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
