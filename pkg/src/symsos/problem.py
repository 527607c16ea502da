"""Problem file format: a small line-oriented grammar for instances.

Each non-blank line is `key: value`; `#` starts a comment.  `eq:` and
`groebner:` may repeat, every other key may appear once.  Polynomials use
1-indexed variables and exact coefficients, e.g. `3/2*x1^2*x3 - x2 + 1`.
The full grammar is spelled out as EBNF in the README.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ParseError
from .groebner import GroebnerBasis
from .pipeline import ProblemInstance
from .poly import Polynomial
from .symmetry import GroupSpec

_SCALAR_KEYS = {"vars", "group", "domain", "target", "degree", "epsilon",
                "tolerance", "denom-bound", "max-iters", "seed", "restarts"}
_REPEAT_KEYS = {"eq", "groebner"}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<var>x\d+)|(?P<op>[*^/+-]))")


@dataclass
class ProblemFile:
    n: int
    block_sizes: tuple[int, ...]
    equalities: list[Polynomial] = field(default_factory=list)
    domain_roots: Optional[tuple[Fraction, ...]] = None
    groebner_polys: list[Polynomial] = field(default_factory=list)
    target: Optional[Polynomial] = None  # None means refute mode
    degree: int = 1
    epsilon: Optional[Fraction] = None
    options: dict = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemFile):
            return NotImplemented
        return (self.n, self.block_sizes, self.equalities, self.domain_roots,
                self.groebner_polys, self.target, self.degree, self.epsilon,
                self.options) == \
               (other.n, other.block_sizes, other.equalities, other.domain_roots,
                other.groebner_polys, other.target, other.degree, other.epsilon,
                other.options)

    def instance(self) -> ProblemInstance:
        kwargs = dict(group=GroupSpec(self.block_sizes),
                      equalities=list(self.equalities),
                      domain_roots=self.domain_roots,
                      target=self.target, degree=self.degree)
        if self.groebner_polys:
            kwargs["groebner"] = GroebnerBasis(tuple(self.groebner_polys))
        if self.epsilon is not None:
            kwargs["epsilon"] = self.epsilon
        return ProblemInstance(**kwargs)


def _tokens(text: str, line: int, offset: int):
    """Tokenize a polynomial body into (kind, lexeme, column) triples."""
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            col = offset + pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                             line, col)
        kind = m.lastgroup
        out.append((kind, m.group(kind), offset + m.start(kind) + 1))
        pos = m.end()
    return out


def parse_rational(text: str, line: int = 0, column: int = 1) -> Fraction:
    """Exact value from an integer, decimal, or a/b literal."""
    body = text.strip()
    try:
        if "/" in body:
            num, den = body.split("/", 1)
            return Fraction(num.strip()) / Fraction(den.strip())
        return Fraction(body)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational literal {body!r}", line, column) from None


def parse_polynomial(text: str, n: int, line: int = 0, offset: int = 0) -> Polynomial:
    """Parse `3/2*x1^2*x3 - x2 + 1` into an n-variable polynomial.

    A polynomial is signed terms; a term is atoms joined by `*`; an atom is
    a coefficient (integer, decimal, or a/b) or a variable power `xi^e`.
    """
    toks = _tokens(text, line, offset)
    if not toks:
        raise ParseError("empty polynomial", line, offset + 1)
    pos = 0

    def peek(kind=None):
        if pos >= len(toks):
            return None
        if kind is not None and toks[pos][0] != kind:
            return None
        return toks[pos]

    def fail(message, at=None):
        col = toks[at if at is not None else min(pos, len(toks) - 1)][2] \
            if toks else offset + 1
        if pos >= len(toks) and at is None:
            col = toks[-1][2] + len(toks[-1][1])
        raise ParseError(message, line, col)

    def atom() -> Polynomial:
        nonlocal pos
        tok = peek()
        if tok is None:
            fail("expected a coefficient or variable")
        kind, lex, col = tok
        pos += 1
        if kind == "num":
            value = Fraction(lex)
            if peek("op") and toks[pos][1] == "/":
                pos += 1
                den = peek("num")
                if den is None:
                    fail("expected denominator after '/'")
                if Fraction(den[1]) == 0:
                    raise ParseError("zero denominator", line, den[2])
                value /= Fraction(den[1])
                pos += 1
            return Polynomial.constant(n, value)
        if kind == "var":
            index = int(lex[1:])
            if not 1 <= index <= n:
                raise ParseError(f"variable {lex} out of range for vars: {n}",
                                 line, col)
            exponent = 1
            if peek("op") and toks[pos][1] == "^":
                pos += 1
                etok = peek("num")
                if etok is None or "." in etok[1]:
                    fail("expected integer exponent after '^'")
                exponent = int(etok[1])
                pos += 1
            return Polynomial.variable(n, index - 1) ** exponent
        fail(f"expected a coefficient or variable, got {lex!r}", pos - 1)

    def term() -> Polynomial:
        nonlocal pos
        result = atom()
        while peek("op") and toks[pos][1] == "*":
            pos += 1
            result = result * atom()
        return result

    sign = 1
    tok = peek("op")
    if tok and tok[1] in "+-":
        sign = -1 if tok[1] == "-" else 1
        pos += 1
    total = term() * sign
    while pos < len(toks):
        tok = peek("op")
        if tok is None or tok[1] not in "+-":
            fail("expected '+' or '-' between terms")
        sign = -1 if tok[1] == "-" else 1
        pos += 1
        total = total + term() * sign
    return total


def _parse_group(value: str, line: int, column: int) -> tuple[int, ...]:
    blocks = []
    for part in value.split("x"):
        m = re.fullmatch(r"\s*S\((\d+)\)\s*", part)
        if m is None or int(m.group(1)) < 1:
            raise ParseError(f"bad group {value.strip()!r}; expected e.g. S(2)xS(1)",
                             line, column)
        blocks.append(int(m.group(1)))
    return tuple(blocks)


def _parse_domain(value: str, line: int, column: int) -> tuple[Fraction, ...]:
    body = value.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError("domain must be a braced list like {0,1}", line, column)
    inner = body[1:-1].strip()
    if not inner:
        raise ParseError("empty domain", line, column)
    return tuple(parse_rational(r, line, column) for r in inner.split(","))


def _parse_int(value: str, key: str, line: int, column: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise ParseError(f"{key} expects an integer", line, column) from None


def parse_problem(text: str) -> ProblemFile:
    """Parse problem text; raises ParseError with line and column on bad input."""
    raw: dict[str, tuple[str, int, int]] = {}
    repeats: dict[str, list[tuple[str, int, int]]] = {k: [] for k in _REPEAT_KEYS}
    for number, full_line in enumerate(text.splitlines(), start=1):
        line = full_line.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", number,
                             len(line) - len(line.lstrip()) + 1)
        key, value = line.split(":", 1)
        column = line.index(":") + 2
        key = key.strip()
        if key in _REPEAT_KEYS:
            repeats[key].append((value, number, column))
        elif key in _SCALAR_KEYS:
            if key in raw:
                raise ParseError(f"duplicate key {key!r}", number, 1)
            raw[key] = (value, number, column)
        else:
            raise ParseError(f"unknown key {key!r}", number,
                             len(line) - len(line.lstrip()) + 1)
    if "vars" not in raw:
        raise ParseError("missing required key 'vars'", 1, 1)
    value, line, column = raw["vars"]
    n = _parse_int(value, "vars", line, column)
    if n < 1:
        raise ParseError("vars must be positive", line, column)

    if "group" in raw:
        value, line, column = raw["group"]
        blocks = _parse_group(value, line, column)
        if sum(blocks) != n:
            raise ParseError(f"group blocks sum to {sum(blocks)}, vars is {n}",
                             line, column)
    else:
        blocks = (1,) * n

    pf = ProblemFile(n=n, block_sizes=blocks)
    if "domain" in raw and repeats["groebner"]:
        _, line, _ = raw["domain"]
        raise ParseError("give either domain or groebner, not both", line, 1)
    if "domain" in raw:
        value, line, column = raw["domain"]
        pf.domain_roots = _parse_domain(value, line, column)
    for value, line, column in repeats["groebner"]:
        pf.groebner_polys.append(parse_polynomial(value, n, line, column - 1))
    for value, line, column in repeats["eq"]:
        pf.equalities.append(parse_polynomial(value, n, line, column - 1))
    if "target" in raw:
        value, line, column = raw["target"]
        if value.strip() != "refute":
            pf.target = parse_polynomial(value, n, line, column - 1)
    if "degree" in raw:
        value, line, column = raw["degree"]
        pf.degree = _parse_int(value, "degree", line, column)
        if pf.degree < 1:
            raise ParseError("degree must be at least 1", line, column)
    if "epsilon" in raw:
        value, line, column = raw["epsilon"]
        pf.epsilon = parse_rational(value, line, column)
        if pf.epsilon < 0:
            raise ParseError("epsilon must be nonnegative", line, column)
    for key in ("tolerance", "denom-bound", "max-iters", "seed", "restarts"):
        if key in raw:
            value, line, column = raw[key]
            if key == "tolerance":
                try:
                    pf.options[key] = float(value.strip())
                except ValueError:
                    raise ParseError("tolerance expects a number", line,
                                     column) from None
            else:
                pf.options[key] = _parse_int(value, key, line, column)
    return pf


def serialize_problem(pf: ProblemFile) -> str:
    """Canonical text form; parse_problem inverts it exactly."""
    lines = [f"vars: {pf.n}",
             "group: " + "x".join(f"S({b})" for b in pf.block_sizes)]
    if pf.domain_roots is not None:
        lines.append("domain: {" + ",".join(str(r) for r in pf.domain_roots) + "}")
    for g in pf.groebner_polys:
        lines.append(f"groebner: {g}")
    for p in pf.equalities:
        lines.append(f"eq: {p}")
    lines.append("target: refute" if pf.target is None else f"target: {pf.target}")
    lines.append(f"degree: {pf.degree}")
    if pf.epsilon is not None:
        lines.append(f"epsilon: {pf.epsilon}")
    for key, value in sorted(pf.options.items()):
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"
