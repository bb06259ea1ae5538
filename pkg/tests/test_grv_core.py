import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grvar.catalog import function_entries, get_entry
from grvar.grv_core import (DEFAULT_X_PROBES, DecayReport, GrvFunction, RateVector, ScalarFunction,
                            Thresholds, check_rate_vector, default_t_grid, estimate_index_matrix,
                            estimate_limit_functions, grv_check, grv_potter_certificate,
                            grv_remainder, improved_grv_envelope, improved_potter_certificate,
                            improved_rv_envelope, limit_matrix, nonzero_diagonal_check,
                            potter_certificate, power_representation_check,
                            representation_components, rv_check, rv_envelope, summarize)
from grvar.trimat import DomainError, ReductionError, jordan_block, mat_power_x


def sf(func, t_min=1.0, name=""):
    return ScalarFunction(func, t_min=t_min, name=name)


ONE = sf(lambda t: np.ones_like(np.asarray(t, float)), name="1")
LOG = sf(np.log, name="log")
log_vec = RateVector([LOG, ONE])
power_vec = RateVector([sf(lambda t: 1 / t + t ** -2.0), sf(lambda t: t ** -2.0)])
POWER_B = [[-1.0, -1.0], [0.0, -2.0]]


def test_default_grid_and_probes():
    t = default_t_grid()
    assert len(t) == 40 and t[0] == 1e2 and t[-1] == pytest.approx(1e8)
    assert np.all(np.diff(t) > 0)
    assert DEFAULT_X_PROBES[3] == 1.0


def test_limit_matrix_examples():
    np.testing.assert_allclose(limit_matrix(log_vec, jordan_block(2), math.e).entries, [[1, 1], [0, 1]])
    g1 = RateVector([sf(lambda t: t ** 2.0)])
    assert limit_matrix(g1, [[2.0]], 3.0).entries[0, 0] == pytest.approx(9.0)
    A = limit_matrix(None, [[1.0, 1.0], [0.0, 1.0]], 2.0).entries
    np.testing.assert_allclose(A, [[2, 2 * math.log(2)], [0, 2]], rtol=1e-14)


def test_rv_check_exact_log_vector():
    rep = rv_check(log_vec, jordan_block(2))
    assert rep.final_ratio < 1e-12 and rep.passed


def test_rv_check_domain_error():
    with pytest.raises(DomainError):
        rv_check(RateVector([sf(np.log, t_min=50.0)]), [[0.0]], default_t_grid(10.0, 1e3, 10))


def test_rate_vector_diagnostics():
    diag = check_rate_vector(power_vec, default_t_grid())
    assert diag == {"sign_ok": True, "chain_ok": True}
    bad = RateVector([ONE, LOG], signs=(1, 1))
    assert not check_rate_vector(bad, default_t_grid())["chain_ok"]


def test_grv_remainder_examples():
    F = GrvFunction(LOG, RateVector([ONE]), [[0.0]], [1.0])
    assert grv_remainder(F, 1e5, 3.0) == pytest.approx(0.0, abs=1e-14)
    sq = sf(lambda t: np.log(t) ** 2)
    F2 = GrvFunction(sq, RateVector([sf(lambda t: 2 * np.log(t)), sf(lambda t: 2 + 0 * t)]),
                     jordan_block(2), [1.0, 0.0])
    for t in (10.0, 1e4, 1e9):
        assert abs(grv_remainder(F2, t, math.e)) < 1e-12


def test_grv_check_identity_column_is_zero():
    rep = grv_check(get_entry("lambert_w").F)
    col = DEFAULT_X_PROBES.index(1.0)
    assert all(row[col] == 0 for row in rep.ratios)


def test_power_series_grv_rate():
    F = get_entry("power_series", 2).F
    rep = grv_check(F)
    assert rep.passed and rep.slope == pytest.approx(-1.0, abs=0.1)


def _catalog_grv():
    return [e for e in function_entries() if e.B.n >= 2]


@pytest.mark.parametrize("name", ["power_series", "log_gamma", "lambert_w", "loglog", "compl_error_p2_b1",
                                  "log_loglog_b"])
def test_h_cocycle(name):
    F = get_entry(name).F
    rng = np.random.default_rng(7)
    for x, y in np.exp(rng.uniform(-2, 2, (10, 2))):
        A = mat_power_x(F.B, y).entries
        lhs = F.h(x * y)
        rhs = F.h(x) @ A + F.h(y)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(lhs)))
        inv = -F.h(x) @ np.linalg.inv(mat_power_x(F.B, x).entries)
        assert np.max(np.abs(F.h(1 / x) - inv)) <= 1e-10 * max(1.0, np.max(np.abs(inv)))


def test_report_json_schema():
    rep = rv_check(power_vec, POWER_B, default_t_grid(1e2, 1e4, 10))
    d = json.loads(rep.to_json())
    for key in ("entry", "n", "t_grid", "x_probes", "ratios", "slope", "final_ratio", "pass"):
        assert key in d
    assert len(d["ratios"]) == 10 and len(d["ratios"][0]) == len(DEFAULT_X_PROBES)


def test_report_csv_long_form():
    rep = rv_check(power_vec, POWER_B, default_t_grid(1e2, 1e4, 10), x_probes=[0.5, 2.0])
    rows = list(rep.csv_rows())
    assert len(rows) == 20
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    back = list(csv.reader(io.StringIO(buf.getvalue())))
    assert float(back[0][0]) == rows[0][0] and float(back[-1][2]) == rows[-1][2]


def test_summarize_rules():
    t = default_t_grid(1e2, 1e6, 20)
    rep = summarize("x", 1, t, ["a"], (1 / t)[:, None])
    assert rep.passed and rep.slope == pytest.approx(-1.0)
    rep = summarize("x", 1, t, ["a"], np.ones((20, 1)))
    assert not rep.passed and rep.monotone_fraction == 1.0
    assert summarize("x", 1, t, ["a"], np.full((20, 1), 1e-3)).passed
    assert not summarize("x", 1, t, ["a"], np.full((20, 1), 1e-3), Thresholds(0.1, 1e-4)).passed
    with pytest.raises(Exception):
        summarize("x", 1, t, ["a"], np.full((20, 1), np.nan))


def test_estimate_limit_functions_examples():
    h = estimate_limit_functions(LOG, RateVector([ONE]), math.e)
    assert h[0] == pytest.approx(1.0, abs=1e-8)
    sq = sf(lambda t: np.log(t) ** 2)
    g = RateVector([sf(lambda t: 2 * np.log(t)), sf(lambda t: 2 + 0 * t)])
    np.testing.assert_allclose(estimate_limit_functions(sq, g, math.e), [1.0, 0.5], atol=1e-8)


def test_estimate_index_matrix_examples():
    assert np.max(np.abs(estimate_index_matrix(log_vec).entries - jordan_block(2).entries)) < 1e-4
    pure = RateVector([sf(lambda t: 1 / t), sf(lambda t: t ** -2.0)])
    assert np.max(np.abs(estimate_index_matrix(pure).entries - np.diag([-1.0, -2.0]))) < 1e-4
    e = get_entry("no_jordan_d")
    assert np.max(np.abs(estimate_index_matrix(e.g, e.estimation_grid()).entries)) < 1e-3


def test_log_gamma_limit_functions():
    e = get_entry("log_gamma", 2)
    h = estimate_limit_functions(e.F.f, e.g, 2.0, e.estimation_grid())
    assert np.max(np.abs(h[:3] - e.F.h(2.0)[:3])) < 1e-3


def test_representation_reconstructs_log_vector():
    rep = representation_components(log_vec, jordan_block(2), a=1.0)
    for t in (5.0, 1e3, 1e6):
        rec = rep.reconstruct(t)
        assert np.max(np.abs(rec - log_vec(t))) <= 1e-8 * np.max(np.abs(log_vec(t)))


def test_representation_of_pure_solution():
    B = np.array([[-1.0, 1.0], [0.0, -2.0]])
    v0 = np.array([0.7, -0.3])
    comps = [sf(lambda t, i=i: (mat_power_x(B, float(t)).entries @ v0)[i] if np.ndim(t) == 0 else
                np.array([(mat_power_x(B, s).entries @ v0)[i] for s in np.ravel(t)]))
             for i in range(2)]
    g = RateVector(comps, signs=(1, -1))
    rep = representation_components(g, B, a=1.0)
    np.testing.assert_allclose(rep.v, v0, rtol=1e-10)
    assert np.max(np.abs(rep.eta(10.0))) < 1e-12
    assert np.max(np.abs(rep.phi(10.0))) < 1e-14


def test_representation_phi_decays_for_log_gamma():
    e = get_entry("log_gamma", 1)
    assert e.n == 4
    rep = representation_components(e.g, e.B, a=10.0)
    # the components solve g(et) = e^B g(t) exactly, so only rounding is left
    r = [np.max(np.abs(rep.phi(t))) / abs(e.g.components[-1](t)) for t in (1e2, 1e3, 1e4)]
    assert max(r) < 1e-6


def test_potter_exact_vector_certifies_at_start():
    t = default_t_grid()
    c = potter_certificate(log_vec, jordan_block(2), 0.1, t)
    assert c.t_eps == t[0] and c.margin > 0
    g1 = RateVector([sf(lambda t: t ** 1.5)])
    assert potter_certificate(g1, [[1.5]], 0.1, t).t_eps == t[0]
    F = GrvFunction(LOG, RateVector([ONE]), [[0.0]], [1.0])
    assert grv_potter_certificate(F, 0.1, t).t_eps == t[0]
    with pytest.raises(ValueError):
        potter_certificate(log_vec, jordan_block(2), 0.0, t)


def test_potter_log_gamma_vector():
    e = get_entry("log_gamma", 2)
    c = potter_certificate(e.g, e.B, 0.5)
    assert c.found and c.t_eps <= 1e4
    assert grv_potter_certificate(e.F, 0.2).found


def test_improved_potter_for_power_example():
    rv, grv = improved_potter_certificate(power_vec, POWER_B, 0.1)
    assert rv.found and grv is None
    with pytest.raises(ReductionError):
        improved_potter_certificate(log_vec, jordan_block(2), 0.1)


@given(st.floats(-3, 1), st.floats(0.0, 2.0), st.floats(0.01, 0.5), st.floats(1.0, 100.0))
def test_improved_envelope_is_tighter(b1, gap, eps, x):
    B = [[b1, 0.0], [0.0, b1 - gap - 1e-3]]
    assert improved_rv_envelope(B, eps, [x])[0] <= rv_envelope(B, eps, [x])[0] * (1 + 1e-12)
    from grvar.grv_core import grv_envelope
    assert improved_grv_envelope(B, eps, [x])[0] <= grv_envelope(B, eps, [x])[0] * (1 + 1e-12)


def test_envelopes_at_x_one():
    B = [[0.5, 0.0], [0.0, -1.0]]
    assert improved_rv_envelope(B, 0.2, [1.0])[0] == pytest.approx(0.2)


def test_nonzero_diagonal_check():
    e = get_entry("power_series", 2)
    rep = nonzero_diagonal_check(e.F, thresholds=Thresholds(0.5, 1e-8))
    assert rep.passed
    with pytest.raises(ValueError):
        nonzero_diagonal_check(get_entry("loglog").F)


def test_power_representation_check():
    Q, rep = power_representation_check(power_vec, POWER_B)
    assert rep.final_ratio < 1e-6
    np.testing.assert_allclose(Q.entries, [[1, 1], [0, 1]], atol=1e-8)


@pytest.mark.parametrize("name", ["lambert_w", "loglog", "logloglog", "superlog_sqrt", "log_loglog_a"])
def test_derivative_callbacks_match_differences(name):
    # L_k(t) = t D L_{k-1}(t), checked by a central difference in log t
    f = get_entry(name).F.f
    levels = [f.func] + [d for d in f.log_derivs]
    h = 1e-4
    for t in (1e4, 1e7):
        for k in range(1, len(levels)):
            prev = levels[k - 1]
            fd = (np.ravel(prev(t * math.exp(h)))[0] - np.ravel(prev(t * math.exp(-h)))[0]) / (2 * h)
            assert np.ravel(levels[k](t))[0] == pytest.approx(fd, rel=1e-6)
