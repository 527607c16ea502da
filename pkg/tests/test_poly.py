import math
import random
from fractions import Fraction

import pytest

from symsos.errors import DimensionMismatch, ResourceLimit
from symsos.poly import (GRID_EVAL_CAP, Monomial, MonomialBasis, Polynomial,
                         coefficient_norm, grid_sup_lower_bound, grlex_compare,
                         grlex_key, mono_divides, mono_mul, mono_quotient,
                         monomials_up_to, multinomial)


def random_poly(rng, n, max_degree, terms=5):
    p = Polynomial.zero(n)
    for _ in range(terms):
        mono = tuple(rng.randint(0, max_degree) for _ in range(n))
        if sum(mono) > max_degree:
            continue
        coeff = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        p = p + Polynomial(n, {mono: coeff}) if coeff else p
    return p


def test_monomial_ops():
    assert mono_mul((1, 2), (0, 3)) == (1, 5)
    assert mono_divides((1, 0), (2, 1))
    assert not mono_divides((0, 2), (1, 1))
    assert mono_quotient((2, 1), (1, 0)) == (1, 1)
    with pytest.raises(DimensionMismatch):
        mono_mul((1,), (1, 2))


def test_grlex_order_small():
    # degree first, then componentwise tuple comparison
    ordered = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    keys = [grlex_key(m) for m in ordered]
    assert keys == sorted(keys)
    assert grlex_compare((0, 1), (1, 0)) == -1
    assert grlex_compare((2, 0), (1, 1)) == 1
    assert grlex_compare((1, 1), (1, 1)) == 0
    assert grlex_compare((0, 2), (1, 0)) == 1  # higher total degree wins


def test_multinomial():
    assert multinomial((2, 1)) == 3
    assert multinomial((0, 0, 0)) == 1
    assert multinomial((1, 1, 1)) == 6
    assert multinomial((4,)) == 1


def test_constructor_drops_zeros_and_validates():
    p = Polynomial(2, {(1, 0): Fraction(0), (0, 1): Fraction(3)})
    assert p.terms == {(0, 1): Fraction(3)}
    with pytest.raises(ValueError):
        Polynomial(2, {(1, -1): Fraction(1)})
    with pytest.raises(DimensionMismatch):
        Polynomial(2, {(1, 0, 0): Fraction(1)})


def test_zero_polynomial_degree():
    assert Polynomial.zero(3).degree() == -1
    assert Polynomial.zero(3).is_zero()
    assert Polynomial.constant(3, 0) == Polynomial.zero(3)


def test_arithmetic_matches_evaluation():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(1, 4)
        p = random_poly(rng, n, 4)
        q = random_poly(rng, n, 4)
        pt = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
        assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)
        assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)
        assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
        assert (-p).evaluate(pt) == -p.evaluate(pt)
        assert (p ** 2).evaluate(pt) == p.evaluate(pt) ** 2


def test_degree_of_product_adds():
    rng = random.Random(11)
    for _ in range(30):
        p = random_poly(rng, 3, 3)
        q = random_poly(rng, 3, 3)
        if p.is_zero() or q.is_zero():
            assert (p * q).is_zero()
        else:
            # leading terms cannot cancel over a domain
            assert (p * q).degree() == p.degree() + q.degree()


def test_leading_monomial_grlex():
    p = Polynomial(2, {(2, 0): Fraction(1), (1, 1): Fraction(5),
                       (0, 1): Fraction(-2)})
    assert p.leading_monomial() == (2, 0)
    assert p.leading_coefficient() == 1
    assert p.degree() == 2
    assert p.constant_term() == 0


def test_string_form():
    n = 3
    p = (Polynomial.monomial(n, (2, 0, 1)) * Fraction(3, 2)
         - Polynomial.variable(n, 1) + Polynomial.constant(n, 1))
    assert str(p) == "3/2*x1^2*x3 - x2 + 1"
    assert str(Polynomial.zero(2)) == "0"
    assert str(-Polynomial.variable(1, 0)) == "-x1"


def test_monomials_up_to_counts_and_order():
    for n in range(1, 5):
        for d in range(0, 4):
            monos = monomials_up_to(n, d)
            assert len(monos) == math.comb(n + d, d)
            assert len(set(monos)) == len(monos)
            assert all(sum(m) <= d for m in monos)
            keys = [grlex_key(m) for m in monos]
            assert keys == sorted(keys)


def test_monomial_basis():
    basis = MonomialBasis(2, 2)
    assert len(basis) == 6
    assert basis.entries[0] == (0, 0)
    assert (1, 1) in basis
    assert (2, 1) not in basis
    assert basis.index((0, 2)) == 3
    assert MonomialBasis(2, 2) == MonomialBasis(2, 2)
    assert MonomialBasis(2, 2) != MonomialBasis(2, 1)


def test_coefficient_norm():
    n = 2
    p = (Polynomial.monomial(n, (2, 1)) * 3      # 3 / multinomial(2,1)=3 -> 1
         + Polynomial.constant(n, -2))           # 2 / 1 -> 2
    assert coefficient_norm(p) == 2
    q = Polynomial.monomial(n, (1, 1)) * 6       # 6 / 2 -> 3
    assert coefficient_norm(q) == 3
    assert coefficient_norm(Polynomial.zero(2)) == 0


def test_grid_sup_lower_bound():
    x = Polynomial.variable(1, 0)
    one = Polynomial.constant(1, 1)
    # sup over [-1,1] of 1 - x^2 is 1, attained at a grid point
    assert grid_sup_lower_bound(one - x * x) == 1
    # lower bound never exceeds an easy upper bound on the poly
    assert grid_sup_lower_bound(x * x) <= 1
    assert grid_sup_lower_bound(x * x) == 1  # endpoints on the grid


def test_grid_cap():
    n = 8
    p = Polynomial.constant(n, 1)
    assert 9 ** n > GRID_EVAL_CAP
    with pytest.raises(ResourceLimit):
        grid_sup_lower_bound(p)


def test_hash_and_equality():
    p = Polynomial(2, {(1, 0): Fraction(1, 2)})
    q = Polynomial.variable(2, 0) * Fraction(1, 2)
    assert p == q
    assert hash(p) == hash(q)
    assert p != Polynomial.variable(2, 1)
