import math
import random
from fractions import Fraction

import pytest

from symsos.linalg import psd_certificate
from symsos.poly import MonomialBasis, Polynomial, monomials_up_to
from symsos.symmetry import (GramMatrix, GroupSpec, Permutation, act_on_gram,
                             act_on_monomial, act_on_polynomial,
                             bipartition_count, canonical_monomial,
                             canonical_pair, enumerate_monomial_orbits,
                             enumerate_pair_orbits, is_invariant,
                             is_invariant_system, monomial_orbit_elements,
                             monomial_orbit_size, orbit_indicator_matrices,
                             pair_orbit_elements, pair_orbit_size,
                             reynolds_gram, reynolds_polynomial)

from .test_poly import random_poly


def random_group(rng, n):
    blocks = []
    left = n
    while left:
        b = rng.randint(1, left)
        blocks.append(b)
        left -= b
    return GroupSpec(tuple(blocks))


def brute_orbit(group, mono):
    return {act_on_monomial(g, mono) for g in group.elements()}


def test_group_spec_basics():
    g = GroupSpec((2, 1))
    assert g.n == 3
    assert g.order() == 2
    assert str(g) == "S(2)xS(1)"
    assert GroupSpec.symmetric(3).order() == 6
    assert GroupSpec.trivial(4).order() == 1
    assert len(list(GroupSpec((2, 2)).elements())) == 4
    with pytest.raises(ValueError):
        GroupSpec((0, 2))


def test_permutation_compose_inverse():
    g = Permutation((1, 2, 0))
    assert g.inverse().images == (2, 0, 1)
    assert g.compose(g.inverse()).images == (0, 1, 2)
    h = Permutation((1, 0, 2))
    left = g.compose(h)
    for i in range(3):
        assert left.images[i] == g.images[h.images[i]]


def test_act_on_monomial_moves_exponents():
    # g sends position i to position g(i); exponents ride along
    g = Permutation((1, 0))
    assert act_on_monomial(g, (2, 0)) == (0, 2)
    cyc = Permutation((1, 2, 0))
    assert act_on_monomial(cyc, (3, 1, 0)) == (0, 3, 1)


def test_act_on_polynomial_evaluation():
    rng = random.Random(41)
    for _ in range(25):
        n = rng.randint(1, 4)
        group = random_group(rng, n)
        p = random_poly(rng, n, 3)
        pt = [Fraction(rng.randint(-2, 2), rng.randint(1, 3)) for _ in range(n)]
        for g in group.elements():
            moved = act_on_polynomial(g, p)
            permuted_pt = [pt[g.images[i]] for i in range(n)]
            assert moved.evaluate(pt) == p.evaluate(permuted_pt)


def test_canonical_monomial_is_orbit_invariant():
    rng = random.Random(43)
    for _ in range(40):
        n = rng.randint(1, 5)
        group = random_group(rng, n)
        mono = tuple(rng.randint(0, 3) for _ in range(n))
        canon = canonical_monomial(group, mono)
        orbit = brute_orbit(group, mono)
        assert canon in orbit
        for member in orbit:
            assert canonical_monomial(group, member) == canon


def test_canonical_pair_is_orbit_invariant():
    rng = random.Random(47)
    for _ in range(30):
        n = rng.randint(1, 4)
        group = random_group(rng, n)
        a = tuple(rng.randint(0, 2) for _ in range(n))
        b = tuple(rng.randint(0, 2) for _ in range(n))
        canon = canonical_pair(group, (a, b))
        orbit = {(act_on_monomial(g, a), act_on_monomial(g, b))
                 for g in group.elements()}
        assert canon in orbit
        for member in orbit:
            assert canonical_pair(group, member) == canon


def test_orbit_sizes_against_brute_force():
    rng = random.Random(53)
    for _ in range(30):
        n = rng.randint(1, 5)
        group = random_group(rng, n)
        mono = tuple(rng.randint(0, 2) for _ in range(n))
        assert monomial_orbit_size(group, mono) == len(brute_orbit(group, mono))
        elements = list(monomial_orbit_elements(group, mono))
        assert set(elements) == brute_orbit(group, mono)
        assert len(elements) == len(set(elements))


def test_pair_orbit_sizes_against_brute_force():
    rng = random.Random(59)
    for _ in range(20):
        n = rng.randint(1, 4)
        group = random_group(rng, n)
        a = tuple(rng.randint(0, 2) for _ in range(n))
        b = tuple(rng.randint(0, 2) for _ in range(n))
        brute = {(act_on_monomial(g, a), act_on_monomial(g, b))
                 for g in group.elements()}
        assert pair_orbit_size(group, (a, b)) == len(brute)
        assert set(pair_orbit_elements(group, (a, b))) == brute


def test_enumerate_monomial_orbits_partitions():
    for group in (GroupSpec.symmetric(3), GroupSpec((2, 1)), GroupSpec.trivial(2)):
        for d in (1, 2, 3):
            table = enumerate_monomial_orbits(group, d)
            everything = monomials_up_to(group.n, d)
            assert sorted(table.orbit_of) == sorted(everything)
            assert sum(table.sizes) == len(everything)
            for rep in table.representatives:
                assert canonical_monomial(group, rep) == rep


def test_enumerate_pair_orbits_partitions():
    group = GroupSpec.symmetric(3)
    table = enumerate_pair_orbits(group, 1)
    w = len(monomials_up_to(3, 1))
    assert sum(table.sizes) == w * w
    # S_3 at degree 1: (1,1), (1,x), (x,1), diag (x,x), offdiag (x,y)
    assert len(table) == 5


def test_bipartition_count_small_values():
    assert bipartition_count(0, 0) == 1
    assert bipartition_count(1, 0) == 1
    assert bipartition_count(1, 1) == 2
    assert bipartition_count(2, 0) == 2


def test_bipartition_count_matches_orbit_enumeration():
    # orbits of monomial pairs with fixed degrees (k, l) under S_n, n large
    for k in range(0, 4):
        for l in range(0, 4):
            n = k + l if k + l else 1
            group = GroupSpec.symmetric(n)
            table = enumerate_pair_orbits(group, max(k, l))
            found = sum(1 for a, b in table.representatives
                        if sum(a) == k and sum(b) == l)
            assert found == bipartition_count(k, l), (k, l)


def test_gram_matrix_polynomial():
    basis = MonomialBasis(2, 1)
    q = GramMatrix(basis)
    i = basis.index((1, 0))
    q.entries[i][i] = Fraction(4)
    x1 = Polynomial.variable(2, 0)
    assert q.to_polynomial() == x1 * x1 * 4
    with pytest.raises(ValueError):
        GramMatrix(basis, [[Fraction(1)] * 3] * 2)


def test_reynolds_polynomial_is_group_average():
    rng = random.Random(61)
    for _ in range(25):
        n = rng.randint(1, 4)
        group = random_group(rng, n)
        p = random_poly(rng, n, 3)
        avg = reynolds_polynomial(group, p)
        brute = Polynomial.zero(n)
        for g in group.elements():
            brute = brute + act_on_polynomial(g, p)
        brute = brute * Fraction(1, group.order())
        assert avg == brute
        assert is_invariant(group, avg)
        assert reynolds_polynomial(group, avg) == avg  # idempotent


def test_reynolds_gram_is_group_average():
    rng = random.Random(67)
    for _ in range(15):
        n = rng.randint(1, 3)
        group = random_group(rng, n)
        basis = MonomialBasis(n, 1)
        entries = [[Fraction(rng.randint(-3, 3)) for _ in range(len(basis))]
                   for _ in range(len(basis))]
        for i in range(len(basis)):
            for j in range(i):
                entries[i][j] = entries[j][i]
        q = GramMatrix(basis, entries)
        avg = reynolds_gram(group, q)
        total = GramMatrix(basis)
        for g in group.elements():
            total = total.add(act_on_gram(g, q))
        expected = total.scaled(Fraction(1, group.order()))
        assert avg == expected


def test_act_on_gram_transforms_polynomial():
    rng = random.Random(71)
    for _ in range(15):
        n = rng.randint(1, 3)
        group = random_group(rng, n)
        basis = MonomialBasis(n, 2)
        entries = [[Fraction(0)] * len(basis) for _ in range(len(basis))]
        for _ in range(4):
            i = rng.randrange(len(basis))
            j = rng.randrange(len(basis))
            v = Fraction(rng.randint(-3, 3))
            entries[i][j] += v
            if i != j:
                entries[j][i] += v
        q = GramMatrix(basis, entries)
        for g in group.elements():
            moved = act_on_gram(g, q)
            assert moved.to_polynomial() == act_on_polynomial(g, q.to_polynomial())


def test_reynolds_preserves_psd():
    rng = random.Random(73)
    for _ in range(15):
        n = rng.randint(1, 3)
        group = random_group(rng, n)
        basis = MonomialBasis(n, 1)
        w = len(basis)
        b = [[Fraction(rng.randint(-3, 3)) for _ in range(w)] for _ in range(w)]
        psd = [[sum(b[k][i] * b[k][j] for k in range(w)) for j in range(w)]
               for i in range(w)]
        q = GramMatrix(basis, psd)
        avg = reynolds_gram(group, q)
        assert psd_certificate(avg.entries).is_psd


def test_orbit_indicator_matrices():
    group = GroupSpec.symmetric(3)
    basis = MonomialBasis(3, 1)
    table = enumerate_pair_orbits(group, 1)
    indicators = orbit_indicator_matrices(table, basis)
    w = len(basis)
    total = [[Fraction(0)] * w for _ in range(w)]
    supports = set()
    for q in indicators:
        for i in range(w):
            for j in range(w):
                e = q.entries[i][j]
                assert e in (0, 1)
                assert q.entries[j][i] == e  # transpose-merged, symmetric
                if e:
                    assert (i, j) not in supports
                    supports.add((i, j))
                    total[i][j] += e
    assert all(total[i][j] == 1 for i in range(w) for j in range(w))
    # each indicator promotes to an invariant polynomial
    for q in indicators:
        assert is_invariant(group, q.to_polynomial())


def test_is_invariant():
    g2 = GroupSpec.symmetric(2)
    x1 = Polynomial.variable(2, 0)
    x2 = Polynomial.variable(2, 1)
    assert is_invariant(g2, x1 + x2)
    assert is_invariant(g2, x1 * x2)
    assert not is_invariant(g2, x1)


def test_is_invariant_system():
    g2 = GroupSpec.symmetric(2)
    x1 = Polynomial.variable(2, 0)
    x2 = Polynomial.variable(2, 1)
    closed, orbits = is_invariant_system(g2, [x1 - x2, x2 - x1])
    assert closed
    assert orbits == [[0, 1]]
    closed, orbits = is_invariant_system(g2, [x1, x2])
    assert closed
    assert orbits == [[0, 1]]
    closed, orbits = is_invariant_system(g2, [x1])
    assert not closed
    closed, orbits = is_invariant_system(g2, [x1 + x2, x1 * x2])
    assert closed
    assert orbits == [[0], [1]]


def test_monomial_orbit_size_multiset():
    # arrangements of exponents (1,1,0) within one block of size 3
    assert monomial_orbit_size(GroupSpec.symmetric(3), (1, 1, 0)) == 3
    assert monomial_orbit_size(GroupSpec.symmetric(3), (2, 1, 0)) == 6
    assert monomial_orbit_size(GroupSpec((2, 1)), (1, 0, 2)) == 2
    assert monomial_orbit_size(GroupSpec.trivial(3), (1, 1, 0)) == 1
