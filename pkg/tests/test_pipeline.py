import math
from fractions import Fraction

import pytest

from symsos.certificates import NORMAL_FORM, verify
from symsos.errors import InvalidInstance, InvalidSystem
from symsos.pipeline import (ProblemInstance, check_pseudoexpectation,
                             find_pseudoexpectation, first_certificate,
                             point_pseudoexpectation, prove_invariant,
                             pseudoexpectation_value, refute_invariant_system,
                             variable_count_report)
from symsos.poly import Polynomial
from symsos.symmetry import GroupSpec, is_invariant

BOOL = (Fraction(0), Fraction(1))


def frac(a, b=1):
    return Fraction(a, b)


def sum_of_vars(n):
    s = Polynomial.zero(n)
    for i in range(n):
        s = s + Polynomial.variable(n, i)
    return s


def half_integral_knapsack(n):
    """sum x_i = n + 1/2 over {0,1}^n: unsatisfiable for every n."""
    return ProblemInstance(group=GroupSpec.symmetric(n),
                           equalities=[sum_of_vars(n)
                                       - Polynomial.constant(n, frac(2 * n + 1, 2))],
                           domain_roots=BOOL, degree=1)


def test_instance_validation():
    with pytest.raises(InvalidInstance):
        ProblemInstance(group=GroupSpec.symmetric(2),
                        equalities=[Polynomial.variable(1, 0)],
                        domain_roots=BOOL)
    with pytest.raises(InvalidInstance):
        ProblemInstance(group=GroupSpec.symmetric(2),
                        equalities=[Polynomial.zero(2)], domain_roots=BOOL)
    with pytest.raises(InvalidInstance):
        ProblemInstance(group=GroupSpec.symmetric(2), equalities=[],
                        domain_roots=BOOL, degree=0)


def test_refute_half_integral_knapsack():
    for n in (1, 2):
        result = refute_invariant_system(half_integral_knapsack(n))
        assert result.certified
        cert = result.certificate
        assert verify(cert).accepted
        assert cert.mode == NORMAL_FORM
        assert cert.degree_bound == 2
        scalars = [m for _, m in cert.equality_multipliers]
        assert all(isinstance(m, Fraction) for m in scalars)
        assert is_invariant(GroupSpec.symmetric(n), cert.sigma.to_polynomial())


def test_refute_satisfiable_returns_none():
    n = 2
    inst = ProblemInstance(group=GroupSpec.symmetric(n),
                           equalities=[sum_of_vars(n) - Polynomial.constant(n, 1)],
                           domain_roots=BOOL, degree=1)
    result = refute_invariant_system(inst)
    assert not result.certified
    assert result.status == "no-certificate-at-degree"
    assert result.reason == "solver-infeasible"


def test_refute_requires_closed_system():
    inst = ProblemInstance(group=GroupSpec.symmetric(2),
                           equalities=[Polynomial.variable(2, 0)],
                           domain_roots=BOOL, degree=1)
    with pytest.raises(InvalidSystem):
        refute_invariant_system(inst)


def test_refute_rejects_prove_style_instance():
    inst = half_integral_knapsack(2)
    inst.target = Polynomial.constant(2, 1)
    with pytest.raises(InvalidInstance):
        refute_invariant_system(inst)


def test_prove_pinned_example():
    # on {0,1}^2 with x1 + x2 = 2 the only point is (1,1), so x1 x2 >= 0
    n = 2
    x1, x2 = Polynomial.variable(n, 0), Polynomial.variable(n, 1)
    inst = ProblemInstance(group=GroupSpec.symmetric(2),
                           equalities=[x1 + x2 - Polynomial.constant(n, 2)],
                           domain_roots=BOOL, target=x1 * x2, degree=1)
    result = prove_invariant(inst)
    assert result.certified
    cert = result.certificate
    assert verify(cert).accepted
    assert cert.target == x1 * x2 + Polynomial.constant(n, inst.epsilon)
    assert is_invariant(inst.group, cert.sigma.to_polynomial())
    for _, mult in cert.equality_multipliers:
        assert is_invariant(inst.group, mult)
    assert result.bit_report is not None


def test_prove_constant_one():
    inst = ProblemInstance(group=GroupSpec.symmetric(2), equalities=[],
                           domain_roots=BOOL, target=Polynomial.constant(2, 1),
                           degree=1, epsilon=frac(0))
    result = prove_invariant(inst)
    assert result.certified
    assert result.certificate.sigma.to_polynomial() == Polynomial.constant(2, 1)
    assert result.certificate.equality_multipliers == []


def test_prove_minus_one_fails_on_satisfiable():
    inst = ProblemInstance(group=GroupSpec.symmetric(2), equalities=[],
                           domain_roots=BOOL, target=Polynomial.constant(2, -1),
                           degree=1, epsilon=frac(0))
    result = prove_invariant(inst)
    assert not result.certified
    assert result.reason == "solver-infeasible"


def test_prove_requires_invariant_target():
    inst = ProblemInstance(group=GroupSpec.symmetric(2), equalities=[],
                           domain_roots=BOOL, target=Polynomial.variable(2, 0),
                           degree=1)
    with pytest.raises(InvalidInstance):
        prove_invariant(inst)


def test_first_certificate_wrapper():
    result, trail = first_certificate(half_integral_knapsack(2), 3)
    assert result.certified
    assert trail == [(1, "certificate")]


def test_variable_count_report_pinned():
    # refute mode, n = 4, d = 1, one constraint orbit
    report = variable_count_report(half_integral_knapsack(4))
    assert report.n == 4
    assert report.gram_degree == 1
    assert report.w_size == 5
    assert report.pair_orbit_count == 5  # ordered: (1,1),(1,x),(x,1),(x,x),(x,y)
    assert report.indicator_count == 4   # (1,x) and (x,1) merge
    assert report.constraint_orbit_count == 1
    assert report.after_variables == 4 + 1
    assert report.before_variables == 15 + 5  # gram triangle + multiplier dim
    assert report.multiplier_dims == [5]


def test_variable_counts_stable_in_n():
    counts = {variable_count_report(half_integral_knapsack(n)).after_variables
              for n in range(2, 7)}
    assert len(counts) == 1
    befores = [variable_count_report(half_integral_knapsack(n)).before_variables
               for n in range(2, 7)]
    assert befores == sorted(befores) and befores[0] < befores[-1]


def test_variable_count_trivial_group_prove_mode():
    n = 2
    inst = ProblemInstance(group=GroupSpec.trivial(n),
                           equalities=[sum_of_vars(n) - Polynomial.constant(n, 1)],
                           domain_roots=BOOL,
                           target=Polynomial.constant(n, 1), degree=1)
    report = variable_count_report(inst)
    assert report.before_variables == report.after_variables


def test_find_pseudoexpectation_knapsack3():
    n = 3
    inst = ProblemInstance(group=GroupSpec.symmetric(n),
                           equalities=[sum_of_vars(n)
                                       - Polynomial.constant(n, frac(3, 2))],
                           domain_roots=BOOL, degree=1)
    pe = find_pseudoexpectation(inst)
    assert pe is not None
    assert pe.numeric
    # forced by the linear moment equations alone
    assert math.isclose(pe.moments[(1, 0, 0)], 0.5, abs_tol=1e-6)
    assert math.isclose(pe.moments[(1, 1, 0)], 0.125, abs_tol=1e-6)
    assert check_pseudoexpectation(inst, pe)


def test_find_pseudoexpectation_contradiction():
    x = Polynomial.variable(1, 0)
    inst = ProblemInstance(group=GroupSpec.trivial(1),
                           equalities=[x, x - Polynomial.constant(1, 1)],
                           domain_roots=BOOL, degree=1)
    assert find_pseudoexpectation(inst) is None


def test_point_pseudoexpectation_exact():
    n = 2
    inst = ProblemInstance(group=GroupSpec.symmetric(n),
                           equalities=[sum_of_vars(n) - Polynomial.constant(n, 1)],
                           domain_roots=BOOL, degree=1)
    pe = point_pseudoexpectation(inst, [[1, 0]])
    assert not pe.numeric
    assert pe.moments[(1, 0)] == frac(1, 2)  # averaged over the orbit of (1,0)
    assert pe.moments[(1, 1)] == 0
    assert pe.moments[(0, 0)] == 1
    assert check_pseudoexpectation(inst, pe)
    value = pseudoexpectation_value(pe, sum_of_vars(n), inst.groebner)
    assert value == 1


def test_point_pseudoexpectation_rejects_bad_point():
    n = 2
    inst = ProblemInstance(group=GroupSpec.symmetric(n),
                           equalities=[sum_of_vars(n) - Polynomial.constant(n, 1)],
                           domain_roots=BOOL, degree=1)
    with pytest.raises(InvalidInstance):
        point_pseudoexpectation(inst, [[1, 1]])  # violates the constraint
    with pytest.raises(InvalidInstance):
        point_pseudoexpectation(inst, [[frac(1, 2), frac(1, 2)]])  # off domain


def test_duality_on_small_battery():
    # never both a verified refutation and a valid pseudoexpectation
    cases = []
    for n in (1, 2):
        cases.append(half_integral_knapsack(n))
        cases.append(ProblemInstance(
            group=GroupSpec.symmetric(n),
            equalities=[sum_of_vars(n) - Polynomial.constant(n, 1)],
            domain_roots=BOOL, degree=1))
    for inst in cases:
        refuted = refute_invariant_system(inst).certified
        pe = find_pseudoexpectation(inst)
        valid = pe is not None and check_pseudoexpectation(inst, pe)
        assert not (refuted and valid)


def test_accounting_attached_to_results():
    result = refute_invariant_system(half_integral_knapsack(2))
    assert result.accounting is not None
    assert result.accounting.after_variables == \
        result.accounting.indicator_count + 1
    assert result.solver is not None and result.solver.feasible
