import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grvar.catalog import get_entry, lambert_w
from grvar.gamma_inverse import (ContractError, DegenerateCaseError, GammaClassFunction, L_from_q,
                                 build_A, build_log_A, check_C0_recursion, coefficient_C,
                                 coefficient_C0_closed, invert_A, inverse_function, q_ladder,
                                 qi_asymptotic_law, verify_dq_law, verify_qi_asymptotics)
from grvar.grv_core import ScalarFunction, default_t_grid
from grvar.numerics import falling_factorial


def power_q(alpha, scale=1.0, order=4, t_min=1e-12):
    q = ScalarFunction(lambda t: scale * np.asarray(t, float) ** alpha, t_min=t_min,
                       derivs=tuple((lambda t, k=k: scale * falling_factorial(alpha, k)
                                     * np.asarray(t, float) ** (alpha - k)) for k in range(1, order)))
    return q


def constant_q(order=4):
    return ScalarFunction(lambda t: np.ones_like(np.asarray(t, float)), t_min=-math.inf,
                          derivs=tuple((lambda t: np.zeros_like(np.asarray(t, float)))
                                       for _ in range(1, order)))


def test_power_q_coefficients_against_oracle(oracles):
    for case in oracles["power_q_coefficients"]:
        alpha = Fraction(case["alpha"]).limit_denominator(1000)
        for key, val in case["C"].items():
            i, j = map(int, key.split(","))
            assert float(coefficient_C(alpha, i, j)) == pytest.approx(float(val), rel=1e-14, abs=1e-14)


def test_power_q_ladder_is_exact_law(oracles):
    G = GammaClassFunction(power_q(0.3), 1.0, math.e, 0.3)
    Q = q_ladder(G, 4)
    case = oracles["power_q_coefficients"][0]
    for key, val in case["C"].items():
        i, j = map(int, key.split(","))
        assert Q.evaluate(i, 1.0, j) == pytest.approx(float(val), rel=1e-13, abs=1e-14)


def test_coefficient_examples():
    assert coefficient_C(0.5, 1, 2) == -0.25
    assert coefficient_C(Fraction(1, 2), 3, 0) == 0
    assert coefficient_C(Fraction(3, 10), 3, 0) == Fraction(-3, 25)


@given(st.fractions(min_value=-3, max_value=1, max_denominator=20), st.integers(1, 8))
def test_C0_recursion_matches_closed_form_exactly(alpha, n):
    for rec, closed in check_C0_recursion(alpha, n):
        assert rec == closed
    assert coefficient_C0_closed(alpha, 1) == 1


def test_constant_q_ladder():
    G = GammaClassFunction(constant_q(), 0.0, 1.0, 0.0)
    Q = q_ladder(G, 4)
    assert Q.evaluate(1, 3.0) == 1.0
    assert all(Q.evaluate(i, 3.0) == 0 for i in (2, 3, 4))


def test_sqrt_q_ladder_degenerates():
    # q = 2 t^(1/2): q_2 = q Dq = 2 (a constant) and q_i = 0 beyond
    G = GammaClassFunction(power_q(0.5, scale=2.0), 1.0, math.e, 0.5)
    Q = q_ladder(G, 4)
    t = np.array([0.5, 10.0, 1e6])
    np.testing.assert_allclose(Q.evaluate(2, t), 2.0, rtol=1e-14)
    assert np.max(np.abs(Q.evaluate(3, t))) < 1e-15 and np.max(np.abs(Q.evaluate(4, t))) < 1e-15
    with pytest.raises(DegenerateCaseError):
        G.check_exclusion(3)
    G.check_exclusion(2)


def test_lambert_q_ladder_law():
    G = get_entry("lambert_w").gamma
    Q = q_ladder(G, 4)
    t = 1e6
    for n in (2, 3, 4):
        pred = (-1) ** n * math.factorial(n - 1) * t ** (-n)
        assert Q.evaluate(n, t) / pred == pytest.approx(1.0, abs=1e-4)


def test_qi_law_cases():
    assert qi_asymptotic_law(0.0, "zero_alpha", 2, 0).coefficient == 1.0
    assert qi_asymptotic_law(0.5, "positive_alpha", 1, 2).coefficient == -0.25
    with pytest.raises(ValueError):
        qi_asymptotic_law(0.5, "zero_alpha", 1, 1)
    with pytest.raises(ValueError):
        qi_asymptotic_law(0.5, "no_such_case", 1, 1)
    with pytest.raises(DegenerateCaseError):
        qi_asymptotic_law(0.5, "positive_alpha", 3, 0)


def test_case_classification():
    assert GammaClassFunction(power_q(1.0), 1.0, 1.0, 1.0).case == "alpha_one"
    assert GammaClassFunction(power_q(-1.0), 1.0, 1.0, -1.0, q_inf=0.0).case == "negative_alpha_zero_limit"
    with pytest.raises(ContractError):
        GammaClassFunction(power_q(-1.0), 1.0, 1.0, -1.0).case
    with pytest.raises(ValueError):
        GammaClassFunction(power_q(1.5), 1.0, 1.0, 1.5)
    with pytest.raises(ContractError):
        q_ladder(GammaClassFunction(power_q(0.3, order=2), 1.0, 1.0, 0.3), 4)


def test_build_A_of_constant_q_is_exp():
    A = build_A(GammaClassFunction(constant_q(), 0.0, 1.0, 0.0))
    for t in (0.5, 3.0, 20.0):
        assert A(t) == pytest.approx(math.exp(t), rel=1e-12)


def test_build_A_lambert():
    q = get_entry("lambert_w").gamma.q
    G = GammaClassFunction(q, 1.0, math.e, -1.0, q_inf=1.0)
    logA = build_log_A(G)
    for t in (2.0, 10.0, 300.0):
        assert logA(t) == pytest.approx(math.log(t) + t, rel=1e-12)


def test_build_A_exp_t_over_log_t():
    q = get_entry("log_loglog_b").gamma.q
    G = GammaClassFunction(q, 5.0, math.exp(5 / math.log(5)), 0.0)
    logA = build_log_A(G)
    for t in (10.0, 1e3):
        assert logA(t) == pytest.approx(t / math.log(t), rel=1e-11)


def test_invert_A():
    A = ScalarFunction(np.exp, t_min=-50.0, derivs=(np.exp,))
    assert invert_A(A, math.e) == pytest.approx(1.0, rel=1e-15)
    Atet = ScalarFunction(lambda y: y * np.exp(y), t_min=0.0, derivs=(lambda y: (1 + y) * np.exp(y),))
    w = invert_A(Atet, 1e6, lo=1.0)
    assert w * math.exp(w) == pytest.approx(1e6, rel=1e-10)
    assert w == pytest.approx(lambert_w(np.array([1e6]))[0], rel=1e-14)
    ys = invert_A(A, np.array([2.0, 1e10, 1e300]))
    np.testing.assert_allclose(ys, np.log([2.0, 1e10, 1e300]), rtol=1e-15)


def test_inverse_of_compl_gamma_b0_is_log():
    f = inverse_function(get_entry("compl_gamma_b0").gamma)
    t = np.array([3.0, 1e5, 1e40])
    np.testing.assert_allclose(f(t), np.log(t), rtol=1e-13)


def test_L_from_q_of_exp():
    G = GammaClassFunction(constant_q(), 0.0, 1.0, 0.0)
    lad = L_from_q(G, 3)
    t = np.array([5.0, 1e6])
    np.testing.assert_allclose(lad.levels[0](t), np.log(t), rtol=1e-13)
    np.testing.assert_allclose(lad.levels[1](t), 1.0)
    assert np.all(lad.levels[2](t) == 0)


def test_L_from_q_compl_gamma_law():
    b = 1.0
    e = get_entry("compl_gamma_b1", 3)
    lad = L_from_q(e.gamma, 3)
    t = 1e200
    for n in (2, 3):
        pred = (-1) ** (n - 1) * math.factorial(n - 1) * b * math.log(t) ** (-n)
        assert lad.levels[n](t) / pred == pytest.approx(1.0, abs=0.05)


def test_L_from_q_compl_error_law():
    p = 2.0
    e = get_entry("compl_error_p2_b0", 3)
    lad = L_from_q(e.gamma, 3)
    t = 1e100
    for n in (1, 2, 3):
        pred = (p * math.log(t)) ** (1 / p - n) * math.prod(1 - k * p for k in range(1, n))
        assert lad.levels[n](t) / pred == pytest.approx(1.0, rel=1e-6)


def test_verify_qi_asymptotics_lambert():
    G = get_entry("lambert_w").gamma
    rep = verify_qi_asymptotics(G, 4, default_t_grid(1e1, 1e6, 30))
    assert rep.passed
    assert "(3,0)" in rep.x_probes


def test_verify_dq_law_power():
    G = GammaClassFunction(power_q(0.3), 1.0, math.e, 0.3)
    rep = verify_dq_law(G, 3, default_t_grid(1e1, 1e4, 10))
    assert rep.final_ratio < 1e-12
