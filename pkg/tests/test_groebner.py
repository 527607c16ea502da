import random
from fractions import Fraction

import pytest

from symsos.errors import InvalidDomain, ReconstructionError
from symsos.groebner import (GroebnerBasis, boolean_basis, divide,
                             finite_domain_basis, reconstruct_proof,
                             reduce_identity, reduce_polynomial)
from symsos.poly import Polynomial, mono_divides

from .test_poly import random_poly


def test_boolean_basis():
    gb = boolean_basis(2)
    x1 = Polynomial.variable(2, 0)
    x2 = Polynomial.variable(2, 1)
    assert list(gb) == [x1 * x1 - x1, x2 * x2 - x2]
    assert gb.assumed_groebner


def test_finite_domain_basis_roots():
    roots = (Fraction(0), Fraction(1), Fraction(-1), Fraction(2))
    gb = finite_domain_basis(2, roots)
    assert len(gb) == 2
    for i, g in enumerate(gb):
        assert g.degree() == 4
        for r in roots:
            point = [Fraction(0)] * 2
            point[i] = r
            assert g.evaluate(point) == 0


def test_finite_domain_basis_validation():
    with pytest.raises(InvalidDomain):
        finite_domain_basis(1, (Fraction(0),))  # odd count
    with pytest.raises(InvalidDomain):
        finite_domain_basis(1, (Fraction(0), Fraction(0)))  # repeated root
    with pytest.raises(InvalidDomain):
        finite_domain_basis(1, ())


def test_divide_pinned():
    gb = boolean_basis(2)
    p = Polynomial.monomial(2, (2, 1))  # x1^2 x2
    out = divide(p, gb)
    assert out.remainder == Polynomial.monomial(2, (1, 1))
    assert out.quotients[0] == Polynomial.variable(2, 1)
    assert out.quotients[1] == Polynomial.zero(2)


def test_divide_first_divisor_wins():
    # both generators reduce x1^2; list order decides the remainder
    x = Polynomial.variable(1, 0)
    one = Polynomial.constant(1, 1)
    a = GroebnerBasis((x * x - x, x * x - one))
    b = GroebnerBasis((x * x - one, x * x - x))
    assert divide(x * x, a).remainder == x
    assert divide(x * x, b).remainder == one


def test_division_identity_random():
    rng = random.Random(23)
    for _ in range(60):
        n = rng.randint(1, 4)
        gb = boolean_basis(n)
        p = random_poly(rng, n, 5, terms=6)
        out = divide(p, gb)
        combo = out.remainder
        for q, g in zip(out.quotients, gb):
            combo = combo + q * g
        assert combo == p
        # remainder is irreducible: multilinear over the boolean ideal
        for mono in out.remainder.terms:
            assert all(e <= 1 for e in mono)
            assert not any(mono_divides(g.leading_monomial(), mono) for g in gb)


def test_reduce_is_idempotent():
    rng = random.Random(29)
    for _ in range(40):
        n = rng.randint(1, 3)
        gb = finite_domain_basis(n, (Fraction(0), Fraction(1)))
        p = random_poly(rng, n, 4, terms=5)
        r = reduce_polynomial(p, gb)
        assert reduce_polynomial(r, gb) == r


def test_reduce_agrees_with_evaluation_on_domain():
    # reduction preserves values at every domain point
    rng = random.Random(31)
    gb = finite_domain_basis(2, (Fraction(0), Fraction(1)))
    for _ in range(20):
        p = random_poly(rng, 2, 4, terms=5)
        r = reduce_polynomial(p, gb)
        for a in (0, 1):
            for b in (0, 1):
                pt = [Fraction(a), Fraction(b)]
                assert p.evaluate(pt) == r.evaluate(pt)


def test_reduce_identity():
    gb = boolean_basis(1)
    x = Polynomial.variable(1, 0)
    sigma = x * x
    products = [x * x * x]
    red_sigma, red_products = reduce_identity(sigma, products, gb)
    assert red_sigma == x
    assert red_products == [x]


def test_reconstruct_proof_planted():
    rng = random.Random(37)
    for _ in range(50):
        n = rng.randint(1, 3)
        gb = boolean_basis(n)
        sigma = random_poly(rng, n, 2, terms=4)
        pairs = [(random_poly(rng, n, 2, terms=3), random_poly(rng, n, 1, terms=2))
                 for _ in range(rng.randint(0, 2))]
        cofactors = [random_poly(rng, n, 2, terms=3) for _ in gb]
        target = sigma
        for mult, constr in pairs:
            target = target + mult * constr
        for c, g in zip(cofactors, gb):
            target = target + c * g
        out = reconstruct_proof(target, sigma, pairs, gb)
        rebuilt = sigma
        for mult, constr in pairs:
            rebuilt = rebuilt + mult * constr
        for c, g in zip(out, gb):
            rebuilt = rebuilt + c * g
        assert rebuilt == target


def test_reconstruct_proof_mismatch_raises_with_residual():
    gb = boolean_basis(1)
    x = Polynomial.variable(1, 0)
    one = Polynomial.constant(1, 1)
    with pytest.raises(ReconstructionError) as info:
        reconstruct_proof(one, x, [], gb)
    assert not info.value.residual.is_zero()


def test_basis_rejects_zero_generator():
    with pytest.raises(ValueError):
        GroebnerBasis((Polynomial.zero(1),))
