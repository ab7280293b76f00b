"""Plain-text formats for forms, certificates and dual witnesses.

A form file::

    form n=2 d=4
    # raw coefficient, then exponents
    1 4 0
    -4 3 1

A certificate is ``cert k=<k>`` followed by one form block per square.  A
witness is ``witness k=<k>``, one form block and a ``pairing <rational>``
line.  Coefficients are always raw monomial coefficients, written ``p``,
``-p`` or ``p/q``; duplicate exponent rows add up.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

from .certificates import DualWitness, SosCertificate
from .errors import ParseError, SoskitError
from .forms import Form, from_raw_terms, zero

__all__ = [
    "format_rational",
    "parse_rational",
    "format_form",
    "parse_form",
    "read_form",
    "write_text",
    "format_certificate",
    "parse_certificate",
    "format_witness",
    "parse_witness",
]

_RATIONAL = re.compile(r"[+-]?\d+(?:/\d+)?")
_HEADER = re.compile(r"(form|cert|witness)((?:\s+\w+=\S+)*)\s*")

PathLike = Union[str, Path]


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def parse_rational(token: str, lineno: int = 0) -> Fraction:
    if not _RATIONAL.fullmatch(token):
        raise ParseError(f"line {lineno}: {token!r} is not a rational of the form p, -p or p/q")
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise ParseError(f"line {lineno}: zero denominator in {token!r}") from None


def _lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def _header(line: str, lineno: int, kind: str, keys: Iterable[str]) -> dict[str, int]:
    m = _HEADER.fullmatch(line)
    if not m or m.group(1) != kind:
        raise ParseError(f"line {lineno}: expected a '{kind}' header, got {line!r}")
    fields = {}
    for item in m.group(2).split():
        key, _, value = item.partition("=")
        if not value.isdigit():
            raise ParseError(f"line {lineno}: {key} must be a non-negative integer")
        fields[key] = int(value)
    missing = [k for k in keys if k not in fields]
    if missing:
        raise ParseError(f"line {lineno}: header is missing {', '.join(missing)}")
    return fields


def format_form(p: Form) -> str:
    rows = [f"form n={p.n} d={p.d}"]
    rows += [" ".join([format_rational(c), *map(str, i)]) for c, i in p.raw_terms()]
    return "\n".join(rows) + "\n"


def _parse_form_lines(lines: list[tuple[int, str]], start: int) -> tuple[Form, int]:
    lineno, line = lines[start]
    head = _header(line, lineno, "form", ("n", "d"))
    n, d = head["n"], head["d"]
    if n < 1:
        raise ParseError(f"line {lineno}: a form needs n >= 1")
    terms = []
    pos = start + 1
    while pos < len(lines) and not _HEADER.fullmatch(lines[pos][1]) and not lines[pos][1].startswith("pairing"):
        lineno, line = lines[pos]
        tokens = line.split()
        if len(tokens) != n + 1:
            raise ParseError(f"line {lineno}: expected a coefficient and {n} exponents")
        c = parse_rational(tokens[0], lineno)
        if not all(t.isdigit() for t in tokens[1:]):
            raise ParseError(f"line {lineno}: exponents must be non-negative integers")
        i = tuple(int(t) for t in tokens[1:])
        if sum(i) != d:
            raise ParseError(f"line {lineno}: exponents {i} do not have degree {d}")
        terms.append((c, i))
        pos += 1
    return (from_raw_terms(n, d, terms) if terms else zero(n, d)), pos


def parse_form(text: str) -> Form:
    lines = _lines(text)
    if not lines:
        raise ParseError("empty input")
    p, pos = _parse_form_lines(lines, 0)
    if pos != len(lines):
        raise ParseError(f"line {lines[pos][0]}: unexpected content after the form")
    return p


def read_form(path: PathLike) -> Form:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_form(text)


def write_text(path: Optional[PathLike], text: str) -> None:
    """Write to ``path``; ``None`` or ``-`` means standard output."""
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)


def format_certificate(cert: SosCertificate) -> str:
    if not cert.exact:
        raise SoskitError("only exact certificates have a text form")
    return f"cert k={cert.k}\n" + "".join(format_form(h) for h in cert.summands)


def parse_certificate(text: str) -> SosCertificate:
    lines = _lines(text)
    if not lines:
        raise ParseError("empty input")
    k = _header(lines[0][1], lines[0][0], "cert", ("k",))["k"]
    summands = []
    pos = 1
    while pos < len(lines):
        h, pos = _parse_form_lines(lines, pos)
        summands.append(h)
    return SosCertificate(k=k, summands=tuple(summands), exact=True)


def format_witness(w: DualWitness) -> str:
    return f"witness k={w.k}\n{format_form(w.q)}pairing {format_rational(w.pairing)}\n"


def parse_witness(text: str) -> DualWitness:
    lines = _lines(text)
    if len(lines) < 2:
        raise ParseError("witness needs a header, a form and a pairing line")
    k = _header(lines[0][1], lines[0][0], "witness", ("k",))["k"]
    q, pos = _parse_form_lines(lines, 1)
    if pos != len(lines) - 1:
        raise ParseError("expected exactly one 'pairing' line after the form")
    lineno, line = lines[pos]
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != "pairing":
        raise ParseError(f"line {lineno}: expected 'pairing <rational>'")
    return DualWitness(q=q, pairing=parse_rational(tokens[1], lineno), k=k)
