"""Sparse multivariate polynomials over exact rational coefficients.

A monomial is a tuple of nonnegative integer exponents, one per variable.
A polynomial maps monomials to nonzero Fraction coefficients; the zero
polynomial is the empty map and reports degree -1.  Everything in this
module is exact: floats never enter, and no coefficient is ever stored
as zero.

Monomials are ordered by graded lexicographic order (total degree first,
ties broken lexicographically on the exponent tuple), which doubles as
the term order used by the division algorithm downstream.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import DimensionMismatch, ResourceLimit

Monomial = tuple[int, ...]
Scalar = Union[int, Fraction]

# Hard cap on exact grid evaluations in grid_sup_lower_bound.
GRID_EVAL_CAP = 10**6


def mono_degree(m: Monomial) -> int:
    return sum(m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if len(a) != len(b):
        raise DimensionMismatch(f"monomials over {len(a)} and {len(b)} variables")
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True iff a divides b componentwise."""
    if len(a) != len(b):
        raise DimensionMismatch(f"monomials over {len(a)} and {len(b)} variables")
    return all(x <= y for x, y in zip(a, b))


def mono_quotient(b: Monomial, a: Monomial) -> Monomial:
    """b / a, assuming a divides b."""
    return tuple(y - x for x, y in zip(a, b))


def grlex_key(m: Monomial):
    """Sort key realizing graded lexicographic order."""
    return (sum(m), m)


def grlex_compare(a: Monomial, b: Monomial) -> int:
    """-1, 0 or +1 as a is below, equal to, or above b in grlex order."""
    if len(a) != len(b):
        raise DimensionMismatch(f"monomials over {len(a)} and {len(b)} variables")
    ka, kb = grlex_key(a), grlex_key(b)
    return (ka > kb) - (ka < kb)


def multinomial(m: Monomial) -> int:
    """|m|! / (m_1! * ... * m_n!), exactly."""
    out = math.factorial(sum(m))
    for e in m:
        out //= math.factorial(e)
    return out


class Polynomial:
    """Immutable-by-convention sparse polynomial over Fraction coefficients."""

    __slots__ = ("n", "_terms", "_key")

    def __init__(self, n: int, terms: Mapping[Monomial, Scalar] | None = None):
        if n < 0:
            raise ValueError("number of variables must be nonnegative")
        self.n = n
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                mono = tuple(mono)
                if len(mono) != n:
                    raise DimensionMismatch(
                        f"monomial {mono} has {len(mono)} exponents, expected {n}")
                if any(e < 0 for e in mono):
                    raise ValueError(f"negative exponent in {mono}")
                c = Fraction(coeff)
                if c != 0:
                    clean[mono] = c
        self._terms = clean
        self._key = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n)

    @classmethod
    def constant(cls, n: int, value: Scalar) -> "Polynomial":
        return cls(n, {(0,) * n: Fraction(value)})

    @classmethod
    def variable(cls, n: int, index: int) -> "Polynomial":
        """The polynomial x_{index}, 0-based."""
        if not 0 <= index < n:
            raise ValueError(f"variable index {index} out of range for n={n}")
        mono = tuple(1 if i == index else 0 for i in range(n))
        return cls(n, {mono: Fraction(1)})

    @classmethod
    def monomial(cls, n: int, mono: Monomial, coeff: Scalar = 1) -> "Polynomial":
        return cls(n, {tuple(mono): Fraction(coeff)})

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(m) for m in self._terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(tuple(mono), Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.n, Fraction(0))

    def items_grlex(self, reverse: bool = True) -> list[tuple[Monomial, Fraction]]:
        """Terms sorted by grlex order, descending by default."""
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=reverse)

    def leading_monomial(self) -> Monomial:
        if not self._terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self._terms, key=grlex_key)

    def leading_coefficient(self) -> Fraction:
        return self._terms[self.leading_monomial()]

    def key(self):
        """Hashable canonical form (used to compare and index polynomials)."""
        if self._key is None:
            self._key = (self.n, tuple(self.items_grlex()))
        return self._key

    # -- arithmetic --------------------------------------------------------

    def _check_same_n(self, other: "Polynomial") -> None:
        if self.n != other.n:
            raise DimensionMismatch(
                f"polynomials over {self.n} and {other.n} variables")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_n(other)
        out = dict(self._terms)
        for mono, coeff in other._terms.items():
            acc = out.get(mono, Fraction(0)) + coeff
            if acc:
                out[mono] = acc
            else:
                out.pop(mono, None)
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return Polynomial.zero(self.n)
            return Polynomial(self.n, {m: co * c for m, co in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_n(other)
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                mono = mono_mul(ma, mb)
                acc = out.get(mono, Fraction(0)) + ca * cb
                if acc:
                    out[mono] = acc
                else:
                    out.pop(mono, None)
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = Polynomial.constant(self.n, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash(self.key())

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.n:
            raise DimensionMismatch(
                f"point has {len(point)} coordinates, expected {self.n}")
        coords = [Fraction(x) for x in point]
        total = Fraction(0)
        for mono, coeff in self._terms.items():
            val = coeff
            for x, e in zip(coords, mono):
                if e:
                    val *= x ** e
            total += val
        return total

    # -- formatting --------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for mono, coeff in self.items_grlex():
            factors = []
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append(f"x{i + 1}")
                elif e > 1:
                    factors.append(f"x{i + 1}^{e}")
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = str(mag) + "*" + "*".join(factors)
            if not parts:
                parts.append(body if coeff > 0 else "-" + body)
            else:
                parts.append(("+ " if coeff > 0 else "- ") + body)
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.n}, {self._terms!r})"


def monomials_up_to(n: int, d: int) -> list[Monomial]:
    """All monomials in n variables of total degree <= d, grlex ascending."""
    if d < 0:
        return []
    out: list[Monomial] = []

    def rec(prefix: list[int], remaining: int, budget: int) -> None:
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for e in range(budget + 1):
            prefix.append(e)
            rec(prefix, remaining - 1, budget - e)
            prefix.pop()

    rec([], n, d)
    out.sort(key=grlex_key)
    return out


class MonomialBasis:
    """The monomials of degree <= d in n variables, grlex ascending.

    Used to index vectors and Gram matrices; len(basis) == C(n + d, d).
    """

    __slots__ = ("n", "d", "entries", "_index")

    def __init__(self, n: int, d: int):
        if d < 0:
            raise ValueError("basis degree must be nonnegative")
        self.n = n
        self.d = d
        self.entries: list[Monomial] = monomials_up_to(n, d)
        self._index = {m: i for i, m in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.entries)

    def __getitem__(self, i: int) -> Monomial:
        return self.entries[i]

    def index(self, mono: Monomial) -> int:
        try:
            return self._index[tuple(mono)]
        except KeyError:
            raise KeyError(f"monomial {mono} not in basis (n={self.n}, d={self.d})")

    def __contains__(self, mono: Monomial) -> bool:
        return tuple(mono) in self._index

    def __eq__(self, other):
        return (isinstance(other, MonomialBasis)
                and self.n == other.n and self.d == other.d)

    def __repr__(self) -> str:
        return f"MonomialBasis(n={self.n}, d={self.d}, size={len(self)})"


def coefficient_norm(p: Polynomial) -> Fraction:
    """max over terms of |coeff| / multinomial(exponents).

    This normalization makes the norm of (x1 + ... + xn)^d equal to 1 and is
    dominated by 3^(d+1) times the sup of |p| on the unit cube [-1, 1]^n.
    """
    best = Fraction(0)
    for mono, coeff in p.terms.items():
        cand = abs(coeff) / multinomial(mono)
        if cand > best:
            best = cand
    return best


def grid_sup_lower_bound(p: Polynomial, points_per_axis: int = 9) -> Fraction:
    """max |p| over a uniform rational grid on [-1, 1]^n.

    A certified lower bound on the sup norm over the cube (never an upper
    bound).  Refuses to evaluate more than GRID_EVAL_CAP points.
    """
    if points_per_axis < 2:
        raise ValueError("need at least two points per axis")
    if points_per_axis ** max(p.n, 1) > GRID_EVAL_CAP:
        raise ResourceLimit(
            f"{points_per_axis}^{p.n} grid evaluations exceed cap {GRID_EVAL_CAP}")
    coords = [Fraction(2 * i, points_per_axis - 1) - 1 for i in range(points_per_axis)]
    if p.n == 0:
        return abs(p.constant_term())
    best = Fraction(0)
    point = [coords[0]] * p.n
    idx = [0] * p.n
    while True:
        val = abs(p.evaluate(point))
        if val > best:
            best = val
        pos = p.n - 1
        while pos >= 0 and idx[pos] == points_per_axis - 1:
            idx[pos] = 0
            point[pos] = coords[0]
            pos -= 1
        if pos < 0:
            return best
        idx[pos] += 1
        point[pos] = coords[idx[pos]]
