"""Sum-of-squares certificates: expansion, exact verification, constructions.

A certificate states that `target` equals

    <sigma, x x^T>  +  sum over equality constraints  +  sum g_i * f_i

where sigma is a rational Gram matrix, the equality part is h * p per
constraint (general mode) or a * p^2 with a scalar a (normal-form mode),
and the f_i are Groebner generators of the coordinate ring.  A refutation
is the special case target = -1.

verify() re-expands the identity and certifies sigma >= 0 by exact LDL^T;
acceptance is a theorem about the inputs, and every rejection carries an
exact witness (a residual polynomial or a vector v with v^T sigma v < 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import linalg
from .errors import (DimensionMismatch, InvalidSystem, InvalidWitness,
                     ParseError, ResourceLimit)
from .poly import (Monomial, MonomialBasis, Polynomial, coefficient_norm,
                   mono_mul)
from .symmetry import (GramMatrix, GroupSpec, act_on_polynomial,
                       is_invariant, is_invariant_system,
                       reynolds_gram, reynolds_polynomial)

MultiplierLike = Union[Polynomial, Fraction]

GENERAL = "general"
NORMAL_FORM = "normal-form"

# Cap on explicit group enumeration in symmetrize (only hit when a
# non-invariant constraint carries a polynomial multiplier).
GROUP_ENUMERATION_CAP = 10_000


@dataclass
class SosCertificate:
    target: Polynomial
    sigma: GramMatrix
    equality_multipliers: list[tuple[Polynomial, MultiplierLike]]
    groebner_multipliers: list[tuple[Polynomial, Polynomial]]
    degree_bound: int
    mode: str = GENERAL

    @property
    def n(self) -> int:
        return self.target.n


@dataclass
class VerificationOutcome:
    accepted: bool
    failure: Optional[str] = None
    residual: Optional[Polynomial] = None
    psd_witness: Optional[list[Fraction]] = None
    psd_witness_value: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.accepted


@dataclass
class BitSizeReport:
    max_numerator_bits: int
    max_denominator_bits: int
    total_bits: int
    coefficient_count: int
    sigma_expansion_norm: Fraction


def _equality_term(constraint: Polynomial, mult: MultiplierLike, mode: str) -> Polynomial:
    if isinstance(mult, Polynomial):
        return mult * constraint
    # Scalar multiplier: in normal form it weights the squared constraint.
    if mode == NORMAL_FORM:
        return constraint * constraint * Fraction(mult)
    return constraint * Fraction(mult)


def expand(cert: SosCertificate) -> Polynomial:
    """The polynomial the certificate claims to equal its target."""
    total = cert.sigma.to_polynomial()
    if total.n != cert.target.n:
        raise DimensionMismatch("sigma basis arity differs from target")
    for constraint, mult in cert.equality_multipliers:
        total = total + _equality_term(constraint, mult, cert.mode)
    for generator, mult in cert.groebner_multipliers:
        total = total + mult * generator
    return total


def verify(cert: SosCertificate) -> VerificationOutcome:
    """Exact acceptance check: structure, identity, degree bounds, PSD."""
    if cert.mode not in (GENERAL, NORMAL_FORM):
        return VerificationOutcome(False, failure=f"unknown mode {cert.mode!r}")
    if cert.mode == NORMAL_FORM:
        for constraint, mult in cert.equality_multipliers:
            if isinstance(mult, Polynomial):
                return VerificationOutcome(
                    False, failure="normal-form certificates need scalar "
                                   "multipliers on equality constraints")
    try:
        claimed = expand(cert)
    except DimensionMismatch as exc:
        return VerificationOutcome(False, failure=str(exc))
    residual = cert.target - claimed
    if not residual.is_zero():
        return VerificationOutcome(False, failure="identity", residual=residual)

    bound = cert.degree_bound
    if cert.sigma.to_polynomial().degree() > bound:
        return VerificationOutcome(False, failure="degree: sigma exceeds bound")
    for constraint, mult in cert.equality_multipliers:
        if _equality_term(constraint, mult, cert.mode).degree() > bound:
            return VerificationOutcome(False, failure="degree: equality term exceeds bound")
    for generator, mult in cert.groebner_multipliers:
        if (mult * generator).degree() > bound:
            return VerificationOutcome(False, failure="degree: basis term exceeds bound")

    psd = linalg.psd_certificate(cert.sigma.entries)
    if not psd.is_psd:
        return VerificationOutcome(
            False, failure="sigma not positive semidefinite",
            psd_witness=psd.witness, psd_witness_value=psd.witness_value)
    return VerificationOutcome(True)


def sos_decomposition(gram: GramMatrix) -> list[tuple[Fraction, Polynomial]]:
    """Explicit weighted squares summing to <gram, x x^T> (gram must be PSD)."""
    perm, low, diag = linalg.ldl_decomposition(gram.entries)
    out = []
    n = gram.basis.n
    for k, d in enumerate(diag):
        if d == 0:
            continue
        terms = {}
        for i in range(k, gram.dim):
            if low[i][k]:
                terms[gram.basis[perm[i]]] = low[i][k]
        out.append((d, Polynomial(n, terms)))
    return out


def bit_size(cert: SosCertificate) -> BitSizeReport:
    """Exact bit counts over every stored rational coefficient."""
    max_num = 0
    max_den = 0
    total = 0
    count = 0

    def visit(value: Fraction) -> None:
        nonlocal max_num, max_den, total, count
        nb = abs(value.numerator).bit_length()
        db = value.denominator.bit_length()
        max_num = max(max_num, nb)
        max_den = max(max_den, db)
        total += nb + db
        count += 1

    def visit_poly(p: Polynomial) -> None:
        for _, c in p.terms.items():
            visit(c)

    visit_poly(cert.target)
    for row in cert.sigma.entries:
        for x in row:
            visit(x)
    for constraint, mult in cert.equality_multipliers:
        visit_poly(constraint)
        if isinstance(mult, Polynomial):
            visit_poly(mult)
        else:
            visit(Fraction(mult))
    for generator, mult in cert.groebner_multipliers:
        visit_poly(generator)
        visit_poly(mult)
    return BitSizeReport(
        max_numerator_bits=max_num,
        max_denominator_bits=max_den,
        total_bits=total,
        coefficient_count=count,
        sigma_expansion_norm=coefficient_norm(cert.sigma.to_polynomial()))


# -- order unit construction ------------------------------------------------


class _Parts:
    """A sum-of-squares-plus-ideal expression under construction.

    gram maps monomial pairs to coefficients (a PSD matrix by construction:
    it only ever accumulates nonnegative rank-one terms, embeddings and
    rescalings of other _Parts grams).  eq and gb collect multipliers keyed
    by the constraint polynomial.
    """

    def __init__(self, n: int):
        self.n = n
        self.gram: dict[tuple[Monomial, Monomial], Fraction] = {}
        self.eq: dict = {}
        self.gb: dict = {}

    def _bump(self, key, delta: Fraction) -> None:
        acc = self.gram.get(key, Fraction(0)) + delta
        if acc:
            self.gram[key] = acc
        else:
            self.gram.pop(key, None)

    def add_rank_one(self, weight: Fraction, p: Polynomial) -> None:
        if weight < 0:
            raise ValueError("rank-one weight must be nonnegative")
        if weight == 0:
            return
        items = list(p.terms.items())
        for ma, ca in items:
            for mb, cb in items:
                self._bump((ma, mb), weight * ca * cb)

    def add_constant(self, value: Fraction) -> None:
        self.add_rank_one(Fraction(value), Polynomial.constant(self.n, 1))

    def _merge_mult(self, table: dict, constraint: Polynomial, mult: Polynomial) -> None:
        key = constraint.key()
        if key in table:
            table[key] = (constraint, table[key][1] + mult)
        else:
            table[key] = (constraint, mult)

    def add_scaled(self, other: "_Parts", scale: Fraction, shift: Monomial | None = None) -> None:
        """Accumulate scale * x^(2*shift) * other (scale >= 0)."""
        if scale < 0:
            raise ValueError("scale must be nonnegative")
        if scale == 0:
            return
        shift_poly = None
        if shift is not None:
            shift_poly = Polynomial.monomial(self.n, mono_mul(shift, shift))
        for (ma, mb), c in other.gram.items():
            key = (mono_mul(ma, shift), mono_mul(mb, shift)) if shift else (ma, mb)
            self._bump(key, c * scale)
        for constraint, mult in other.eq.values():
            m = mult * scale
            if shift_poly is not None:
                m = m * shift_poly
            self._merge_mult(self.eq, constraint, m)
        for generator, mult in other.gb.values():
            m = mult * scale
            if shift_poly is not None:
                m = m * shift_poly
            self._merge_mult(self.gb, generator, m)

    @classmethod
    def from_certificate(cls, cert: SosCertificate) -> "_Parts":
        parts = cls(cert.n)
        basis = cert.sigma.basis
        for i, a in enumerate(basis.entries):
            for j, b in enumerate(basis.entries):
                c = cert.sigma.entries[i][j]
                if c:
                    parts._bump((a, b), c)
        for constraint, mult in cert.equality_multipliers:
            if not isinstance(mult, Polynomial):
                raise InvalidWitness("witness must carry polynomial multipliers")
            parts._merge_mult(parts.eq, constraint, mult)
        for generator, mult in cert.groebner_multipliers:
            parts._merge_mult(parts.gb, generator, mult)
        return parts

    def to_certificate(self, target: Polynomial, degree_bound: int) -> SosCertificate:
        half = max((max(sum(a), sum(b)) for a, b in self.gram), default=0)
        basis = MonomialBasis(self.n, half)
        gram = GramMatrix(basis)
        for (a, b), c in self.gram.items():
            gram.entries[basis.index(a)][basis.index(b)] += c
        eq = [self.eq[k] for k in sorted(self.eq)]
        gb = [self.gb[k] for k in sorted(self.gb)]
        return SosCertificate(
            target=target, sigma=gram,
            equality_multipliers=[(c, m) for c, m in eq],
            groebner_multipliers=list(gb),
            degree_bound=degree_bound, mode=GENERAL)


def _witness_bound_constant(witness: SosCertificate) -> Fraction:
    """Recover N from a witness proving N - sum x_i^2."""
    n = witness.n
    square_sum = Polynomial.zero(n)
    for i in range(n):
        xi = Polynomial.variable(n, i)
        square_sum = square_sum + xi * xi
    diff = witness.target + square_sum
    if diff.degree() > 0:
        raise InvalidWitness("witness target must be a constant minus sum of x_i^2")
    value = diff.constant_term()
    if value < 0:
        raise InvalidWitness("witness bound constant is negative")
    return value


def order_unit_certificate(witness: SosCertificate, mono: Monomial,
                           d: int, sign: int = 1) -> SosCertificate:
    """Certify N' + m or N' - m for a monomial m of degree <= 2d.

    witness must be a verifying certificate for N - sum x_i^2 of degree 2k;
    the output has degree at most 2(d + k - 1).  N' comes out of the
    construction (2N + 3/2 for nonconstant m) and is not minimized.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if d < 1:
        raise ValueError("d must be at least 1")
    if witness.mode != GENERAL:
        raise InvalidWitness("witness must be a general-mode certificate")
    if not verify(witness).accepted:
        raise InvalidWitness("witness certificate does not verify")
    if witness.degree_bound < 2 or witness.degree_bound % 2 != 0:
        raise InvalidWitness("witness degree bound must be even and at least 2")
    n = witness.n
    mono = tuple(mono)
    if len(mono) != n:
        raise DimensionMismatch("monomial arity differs from witness")
    if sum(mono) > 2 * d:
        raise ValueError(f"monomial degree {sum(mono)} exceeds 2d = {2 * d}")

    n_k = _witness_bound_constant(witness)
    k = witness.degree_bound // 2
    bound = 2 * (d + k - 1)
    witness_parts = _Parts.from_certificate(witness)

    if sum(mono) == 0:
        # N' = 1: the certificate for 1 +- 1 is the constant 1 -+ 1 itself.
        target = Polynomial.constant(n, 1 + sign)
        parts = _Parts(n)
        parts.add_constant(Fraction(1 + sign))
        return parts.to_certificate(target, bound)

    def unit_vector(i: int) -> Monomial:
        return tuple(1 if t == i else 0 for t in range(n))

    def claim(m: Monomial) -> tuple[Fraction, _Parts, _Parts]:
        """(N, proof of N - m^2, proof of N + m^2) for deg(m) <= d."""
        deg = sum(m)
        if deg == 0:
            minus = _Parts(n)
            plus = _Parts(n)
            plus.add_constant(Fraction(2))
            return Fraction(1), minus, plus
        if deg == 1:
            i = m.index(1)
            minus = _Parts(n)
            minus.add_scaled(witness_parts, Fraction(1))
            for j in range(n):
                if j != i:
                    minus.add_rank_one(Fraction(1), Polynomial.variable(n, j))
            plus = _Parts(n)
            plus.add_constant(n_k)
            plus.add_rank_one(Fraction(1), Polynomial.variable(n, i))
            return n_k, minus, plus
        i = next(t for t, e in enumerate(m) if e > 0)
        rest = tuple(e - 1 if t == i else e for t, e in enumerate(m))
        n_rest, minus_rest, _ = claim(rest)
        big = max(n_k, n_rest)
        # N - m2^2, padded up from the recursive bound.
        pad_rest = _Parts(n)
        pad_rest.add_scaled(minus_rest, Fraction(1))
        pad_rest.add_constant(big - n_rest)
        # N - x_i^2, padded up from the witness bound.
        _, minus_xi, _ = claim(unit_vector(i))
        pad_xi = _Parts(n)
        pad_xi.add_scaled(minus_xi, Fraction(1))
        pad_xi.add_constant(big - n_k)
        # N^2 - m^2 = (N - m2^2) * x_i^2 + N * (N - x_i^2).
        minus = _Parts(n)
        minus.add_scaled(pad_rest, Fraction(1), shift=unit_vector(i))
        minus.add_scaled(pad_xi, big)
        plus = _Parts(n)
        plus.add_constant(big * big)
        plus.add_rank_one(Fraction(1), Polynomial.monomial(n, m))
        return big * big, minus, plus

    # Split m = m1 * m2 with both factor degrees <= d.
    half = (sum(mono) + 1) // 2
    m1 = [0] * n
    taken = 0
    for i, e in enumerate(mono):
        grab = min(e, half - taken)
        m1[i] = grab
        taken += grab
        if taken == half:
            break
    m1 = tuple(m1)
    m2 = tuple(e - f for e, f in zip(mono, m1))

    n1, minus1, _ = claim(m1)
    n2, minus2, _ = claim(m2)
    big = max(n1, n2)
    parts = _Parts(n)
    parts.add_scaled(minus1, Fraction(1))
    parts.add_constant(big - n1)
    parts.add_scaled(minus2, Fraction(1))
    parts.add_constant(big - n2)
    p1 = Polynomial.monomial(n, m1)
    p2 = Polynomial.monomial(n, m2)
    one = Polynomial.constant(n, 1)
    half_w = Fraction(1, 2)
    if sign == 1:
        parts.add_rank_one(half_w, one - p1)
        parts.add_rank_one(half_w, one - p2)
        parts.add_rank_one(half_w, one + p1 + p2)
    else:
        parts.add_rank_one(half_w, one - p1)
        parts.add_rank_one(half_w, one + p2)
        parts.add_rank_one(half_w, one + p1 - p2)
    target = Polynomial.constant(n, 2 * big + Fraction(3, 2)) \
        + Polynomial.monomial(n, mono, sign)
    return parts.to_certificate(target, bound)


# -- symmetrization ---------------------------------------------------------


def _redistribute(group: GroupSpec,
                  entries: list[tuple[Polynomial, Polynomial]]) -> list[tuple[Polynomial, Polynomial]]:
    """Average multipliers across a constraint orbit by explicit group sum:
    each constraint receives (1/|G|) sum over (j, g) with g . r_j = r_k of g . q_j."""
    order = group.order()
    if order > GROUP_ENUMERATION_CAP:
        raise ResourceLimit(
            f"group order {order} exceeds enumeration cap "
            f"{GROUP_ENUMERATION_CAP} for non-invariant multiplier averaging")
    n = entries[0][0].n
    index = {c.key(): i for i, (c, _) in enumerate(entries)}
    acc = [Polynomial.zero(n) for _ in entries]
    for g in group.elements():
        for constraint, mult in entries:
            image = act_on_polynomial(g, constraint)
            k = index.get(image.key())
            if k is None:
                raise InvalidSystem("constraint orbit is not closed in the certificate")
            acc[k] = acc[k] + act_on_polynomial(g, mult)
    inv = Fraction(1, order)
    return [(entries[i][0], acc[i] * inv) for i in range(len(entries))]


def symmetrize(cert: SosCertificate, group: GroupSpec) -> SosCertificate:
    """Average a certificate over the group.

    The target must be invariant and each constraint orbit must be closed
    inside the certificate's constraint lists.  sigma is replaced by its
    orbit average (still PSD), invariant constraints get averaged
    multipliers, and constraints in a nontrivial orbit share redistributed
    multipliers.  The output verifies whenever the input does.
    """
    if group.n != cert.n:
        raise DimensionMismatch("group and certificate arity differ")
    if not is_invariant(group, cert.target):
        raise InvalidSystem("target polynomial is not invariant under the group")

    new_sigma = reynolds_gram(group, cert.sigma)

    def transform(pairs, scalars_allowed: bool):
        if not pairs:
            return []
        polys = [c for c, _ in pairs]
        closed, orbits = is_invariant_system(group, polys)
        if not closed:
            raise InvalidSystem("constraint list is not closed under the group")
        out: list = [None] * len(pairs)
        for orbit in orbits:
            members = [pairs[i] for i in orbit]
            all_scalar = all(not isinstance(m, Polynomial) for _, m in members)
            if all_scalar and scalars_allowed:
                mean = sum((Fraction(m) for _, m in members), Fraction(0)) / len(members)
                for i in orbit:
                    out[i] = (pairs[i][0], mean)
                continue
            if len(orbit) == 1 and is_invariant(group, pairs[orbit[0]][0]):
                constraint, mult = pairs[orbit[0]]
                if isinstance(mult, Polynomial):
                    mult = reynolds_polynomial(group, mult)
                out[orbit[0]] = (constraint, mult)
                continue
            entries = [(c, m if isinstance(m, Polynomial)
                        else Polynomial.constant(cert.n, m)) for c, m in members]
            redistributed = _redistribute(group, entries)
            for slot, i in enumerate(orbit):
                out[i] = redistributed[slot]
        return out

    return SosCertificate(
        target=cert.target,
        sigma=new_sigma,
        equality_multipliers=transform(cert.equality_multipliers,
                                       scalars_allowed=cert.mode == NORMAL_FORM),
        groebner_multipliers=transform(cert.groebner_multipliers, scalars_allowed=False),
        degree_bound=cert.degree_bound,
        mode=cert.mode)


# -- serialization ----------------------------------------------------------

FORMAT_TAG = "symsos.certificate/1"


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _frac_parse(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r}: {exc}")


def _poly_dump(p: Polynomial) -> list:
    return [[list(m), _frac_str(c)] for m, c in p.items_grlex()]


def _poly_load(data, n: int) -> Polynomial:
    terms = {}
    for entry in data:
        if len(entry) != 2:
            raise ParseError("polynomial term must be [exponents, coefficient]")
        mono, coeff = entry
        terms[tuple(int(e) for e in mono)] = _frac_parse(coeff)
    return Polynomial(n, terms)


def serialize_certificate(cert: SosCertificate) -> str:
    eq = []
    for constraint, mult in cert.equality_multipliers:
        item = {"constraint": _poly_dump(constraint)}
        if isinstance(mult, Polynomial):
            item["multiplier"] = _poly_dump(mult)
        else:
            item["scalar"] = _frac_str(Fraction(mult))
        eq.append(item)
    doc = {
        "format": FORMAT_TAG,
        "variables": cert.n,
        "mode": cert.mode,
        "degree_bound": cert.degree_bound,
        "target": _poly_dump(cert.target),
        "sigma_basis_degree": cert.sigma.basis.d,
        "sigma": [[_frac_str(x) for x in row] for row in cert.sigma.entries],
        "equality_multipliers": eq,
        "groebner_multipliers": [
            {"generator": _poly_dump(g), "multiplier": _poly_dump(m)}
            for g, m in cert.groebner_multipliers],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_certificate(text: str) -> SosCertificate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}")
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise ParseError(f"missing or unsupported format tag (want {FORMAT_TAG})")
    try:
        n = int(doc["variables"])
        mode = doc["mode"]
        bound = int(doc["degree_bound"])
        target = _poly_load(doc["target"], n)
        basis = MonomialBasis(n, int(doc["sigma_basis_degree"]))
        rows = [[_frac_parse(x) for x in row] for row in doc["sigma"]]
        sigma = GramMatrix(basis, rows)
        eq = []
        for item in doc["equality_multipliers"]:
            constraint = _poly_load(item["constraint"], n)
            if "scalar" in item:
                eq.append((constraint, _frac_parse(item["scalar"])))
            else:
                eq.append((constraint, _poly_load(item["multiplier"], n)))
        gb = [(_poly_load(item["generator"], n), _poly_load(item["multiplier"], n))
              for item in doc["groebner_multipliers"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed certificate document: {exc}")
    return SosCertificate(target=target, sigma=sigma, equality_multipliers=eq,
                          groebner_multipliers=gb, degree_bound=bound, mode=mode)
