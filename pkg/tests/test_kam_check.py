from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from gbbm_kam import kam_check as kc
from gbbm_kam.index_sets import TangentialSet
from gbbm_kam.normal_form import normal_form


@pytest.fixture(scope="module")
def model37():
    return kc.model_from_normal_form(normal_form(TangentialSet(3, 7), 35))


@pytest.fixture(scope="module")
def model513():
    return kc.model_from_normal_form(normal_form(TangentialSet(5, 13), 65))


def displayed_bracket(n1, n2, xi):
    q1, q2 = 1 + n1 * n1, 1 + n2 * n2
    return (
        1
        + n1 * n1 * xi[0] / (2 * math.pi**2 * q1**2)
        + 3 * n1 * n2 * math.sqrt(xi[0] * xi[1]) / (math.pi**2 * q1 * q2)
        + 3 * n2 * n2 * xi[1] / (2 * math.pi**2 * q2**2)
    )


# ---------------------------------------------------------------------------
# model


def test_omega0_at_zero_exact(model37, model513):
    assert model37.omega0_at_zero() == (Fraction(3, 10), Fraction(7, 50))
    assert model513.omega0_at_zero() == (Fraction(5, 26), Fraction(13, 170))
    assert kc.omega0(model37, (0.0, 0.0)) == (0.3, 0.14)


def test_model_matches_normal_form_closed_forms(model37, model513):
    for m in (model37, model513):
        assert m.Gbar_S == kc.closed_form_gbar(m.n1, m.n2)
        assert m.omega_bracket == kc.closed_form_bracket(m.n1, m.n2)


def test_r_and_t_derivative_coefficients(model37):
    R = [r for r, _ in model37.R]
    R1, R2 = model37.R_lj()
    assert R1[0] == 5 * R[0] and R2[4] == 5 * R[5]
    T1, T2 = model37.T_lj()
    assert T1[0] == 7 * model37.T[0][0] and T2[6] == 7 * model37.T[7][0]


@pytest.mark.parametrize("xi", [(1e-4, 2e-4), (3e-3, 1e-3), (0.02, 0.05)])
def test_quadratic_bracket_matches_display(xi):
    for n1, n2 in ((3, 7), (50, 2500)):
        m = kc.leading_order_model(n1, n2)
        w1, _ = kc.omega0(m, xi)
        assert w1 / (n1 / (1 + n1 * n1)) == pytest.approx(displayed_bracket(n1, n2, xi), rel=1e-14)


def test_bracket_arithmetic_example():
    m = kc.leading_order_model(1, 2)
    xi = (math.pi**2, math.pi**2)
    w1, _ = kc.omega0(m, xi)
    assert w1 / 0.5 == pytest.approx(1 + 1 / 8 + 6 / 10 + 12 / 50, rel=1e-14)


def test_swapped_model_swaps_frequencies(model37):
    xi = (2e-3, 5e-3)
    w = kc.omega0(model37, xi)
    ws = kc.omega0(model37.swapped(), xi[::-1])
    assert ws == pytest.approx(w[::-1], rel=1e-14)


def test_normal_frequencies(model37):
    js = [j for j in range(1, 120) if j not in (3, 7)][:100]
    assert len(js) == 100
    for j in js:
        assert kc.Omega(model37, j, (0.0, 0.0)) == pytest.approx(j / (1 + j * j), rel=1e-15)
    xi = (1.3e-3, 2.1e-3)
    ratios = [kc.Omega(model37, j, xi) * (1 + j * j) / j for j in js]
    assert max(ratios) - min(ratios) <= 1e-14 * ratios[0]
    with pytest.raises(ValueError):
        kc.Omega(model37, 3, xi)
    with pytest.raises(ValueError):
        kc.Omega(model37, 0, xi)


def test_higher_order_terms_are_order_xi_squared(model37):
    diffs = []
    for s in (1e-4, 1e-3):
        full = np.array(kc.omega0(model37, (s, s)))
        lead = np.array(kc.omega0(model37.truncated(), (s, s)))
        diffs.append(np.abs(full - lead))
    slope = np.log(diffs[1] / diffs[0]) / np.log(10.0)
    assert np.all(np.abs(slope - 2.0) < 0.05)


def test_shift_bounded_by_sqrt_eps(model513):
    consts = []
    for eps in (1e-4, 1e-6, 1e-8):
        pts = kc.domain_grid(eps, 16)
        shift = max(max(abs(w - l) for w, l in zip(kc.omega0(model513, p), (5 / 26, 13 / 170))) for p in pts)
        consts.append(shift / math.sqrt(eps))
    assert max(consts) < 1.0
    assert consts[-1] == pytest.approx(consts[-2], rel=1e-2)


def test_domain_warning(model37):
    with pytest.warns(UserWarning):
        kc.omega0(model37, (1.0, 1.0), eps=1e-6)
    assert kc.in_domain((1e-3, 4e-3), 1e-6)


# ---------------------------------------------------------------------------
# Jacobian


def test_jacobian_against_finite_differences(model37):
    eps = 1e-6
    xi = (2 * math.sqrt(eps), 3 * math.sqrt(eps))
    J = kc.jacobian(model37, xi)
    Jfd = kc.jacobian_fd(model37, xi, eps=eps)
    assert np.max(np.abs(J - Jfd)) <= 1e-5 * np.max(np.abs(J))
    assert np.linalg.det(Jfd) == pytest.approx(kc.jacobian_det(model37, xi), rel=1e-5)


def test_jacobian_one_sided_at_boundary(model37):
    eps = 1e-6
    corner = (math.sqrt(eps), 4 * math.sqrt(eps))
    J = kc.jacobian(model37, corner)
    assert np.max(np.abs(J - kc.jacobian_fd(model37, corner, eps=eps))) <= 1e-5 * np.max(np.abs(J))


def test_jacobian_rejects_zero_action(model37):
    with pytest.raises(ValueError):
        kc.jacobian(model37, (0.0, 1e-3))


def test_leading_determinant_closed_form(model37):
    xi = (2e-3, 3e-3)
    lead = kc.jacobian_det(model37.truncated(), xi)
    assert lead == pytest.approx(kc.leading_det_closed_form(3, 7, xi), rel=1e-13)
    full = kc.jacobian_det(model37, xi)
    assert full == pytest.approx(-4.168880e-06, rel=1e-5)
    assert abs(full / lead - 1) < 1e-3


@pytest.mark.parametrize("k", range(10))
def test_determinant_swap_symmetry(model513, k):
    rng = np.random.default_rng(k)
    xi = tuple(rng.uniform(1e-3, 4e-3, size=2))
    d = kc.jacobian_det(model513, xi)
    ds = kc.jacobian_det(model513.swapped(), xi[::-1])
    assert ds == pytest.approx(d, rel=1e-12)


def test_determinant_negative_on_grid(model513):
    dets = [kc.jacobian_det(model513, p) for p in kc.domain_grid(1e-6, 64)]
    assert max(dets) < 0


# ---------------------------------------------------------------------------
# assumptions


def test_assumptions_small_configuration(model37):
    rep = kc.verify_assumptions(model37, 1e-6, 5 * 7)
    assert all(r.passed for r in rep.values())
    assert rep["B"].values["points"] == 64 * 64 + 1000
    assert rep["B"].values["stated_c11_holds"] is False
    assert rep["A"].values["det_negative_everywhere"]
    assert rep["E"].passed


def test_assumption_b_big_configuration():
    # the normal-frequency bracket equals its closed form exactly (see the acceptance suite)
    m = kc.leading_order_model(50, 2500)
    B = kc.check_assumption_B(m, 1e-6, 10**4)
    assert B.passed
    assert B.values["sup_dxi_Omega_times_j"] <= B.values["c13"]
    assert B.values["c13"] == pytest.approx(15 * 50**2 / (2 * math.pi**2 * 2501**2), rel=1e-15)
    A = kc.check_assumption_A(m, 1e-6)
    assert A.values["inf_abs_det"] > 0


def test_assumption_b_detects_violation():
    m = kc.leading_order_model(3, 7)
    # a huge eps pushes the bracket beyond the upper constant
    B = kc.check_assumption_B(m, 100.0, 35, grid=8, samples=10)
    assert not B.passed
    assert B.values["max_Omega_times_j"] > 2.0


def test_assumption_c_scaling():
    C = kc.check_assumption_C(5, 13)
    assert C.passed
    for name, s in C.values["slopes"].items():
        assert abs(s - 1.0) <= 0.15, name
    # sizes also drop by roughly a factor of ten per decade in eps
    g = C.values["sizes"]["Ghat"]
    assert 5 < g[0] / g[1] < 20


def test_check_results_serialize(model37):
    out = kc.check_assumption_A(model37, 1e-6, 8).to_json()
    assert out["pass"] is True and "witness" in out
