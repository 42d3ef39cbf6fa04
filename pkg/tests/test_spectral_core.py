from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbbm_kam import oracles
from gbbm_kam import spectral_core as sc


def random_state(rng, jmax, scale=1.0, real=True):
    zpos = scale * (rng.normal(size=jmax) + 1j * rng.normal(size=jmax))
    if real:
        return sc.SpectralState.from_positive(zpos)
    zneg = scale * (rng.normal(size=jmax) + 1j * rng.normal(size=jmax))
    return sc.SpectralState(np.concatenate([zneg, zpos]), jmax, real=False)


# ---------------------------------------------------------------------------
# exact frequencies


def test_lambda_examples():
    assert sc.lam(1) == Fraction(1, 2)
    assert sc.lam(2) == Fraction(2, 5)
    assert sc.lam(-3) == Fraction(-3, 10)


def test_delta_sq_examples():
    assert sc.delta_sq(1) == Fraction(1, 2)
    assert sc.delta_sq(-2) == Fraction(2, 5)
    assert sc.delta_sq(5) == Fraction(5, 26)


def test_zero_mode_rejected():
    with pytest.raises(ValueError):
        sc.lam(0)
    with pytest.raises(ValueError):
        sc.delta_sq(0)


@given(st.integers(min_value=1, max_value=10**6))
def test_lambda_parity_and_bounds(j):
    assert sc.lam(-j) == -sc.lam(j)
    assert sc.delta_sq(-j) == sc.delta_sq(j) == sc.lam(j)
    assert 0 < sc.lam(j) <= Fraction(1, 2)
    assert sc.lam(j + 1) < sc.lam(j) or j == 0


# ---------------------------------------------------------------------------
# transforms


def test_cos_profile():
    M = 64
    x = 2 * np.pi * np.arange(M) / M
    z = sc.analyze(sc.GridProfile(np.cos(x)), 8)
    assert z[1] == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert z[-1] == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    others = [abs(z[j]) for j in range(-8, 9) if j not in (0, 1, -1)]
    assert max(others) < 1e-14


def test_zero_state_synthesizes_to_zero():
    u = sc.synthesize(sc.SpectralState.zeros(8), 32)
    assert np.all(u.samples == 0)


def test_round_trip_random_real_state():
    rng = np.random.default_rng(0)
    z = random_state(rng, 32)
    back = sc.analyze(sc.synthesize(z, 256), 32)
    assert np.max(np.abs(back.z - z.z)) <= 1e-12 * np.max(np.abs(z.z))
    assert back.real


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=16), st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_property(jmax, seed):
    rng = np.random.default_rng(seed)
    z = random_state(rng, jmax)
    M = max(8, 1 << (4 * jmax - 1).bit_length())
    u = sc.synthesize(z, M)
    assert not np.iscomplexobj(u.samples)
    assert abs(np.mean(u.samples)) < 1e-12 * (1 + np.max(np.abs(u.samples)))
    back = sc.analyze(u, jmax)
    assert np.allclose(back.z, z.z, rtol=0, atol=1e-12 * np.max(np.abs(z.z)))


def test_transform_preconditions():
    z = sc.SpectralState.zeros(16)
    with pytest.raises(ValueError):
        sc.synthesize(z, 48)
    with pytest.raises(ValueError):
        sc.synthesize(z, 32)
    with pytest.raises(ValueError):
        sc.GridProfile(np.zeros(12))


def test_reality_constraint_enforced():
    z = np.zeros(4, dtype=complex)
    z[3] = 1.0  # z_2 = 1, z_{-2} = 0
    with pytest.raises(ValueError):
        sc.SpectralState(z, 2, real=True)


def test_state_rejects_zero_mode_and_out_of_range():
    with pytest.raises(ValueError):
        sc.SpectralState.from_modes({0: 1.0}, 4)
    with pytest.raises(ValueError):
        sc.SpectralState.from_modes({5: 1.0}, 4)


# ---------------------------------------------------------------------------
# energy


def test_energy_of_cosine():
    z = sc.SpectralState.from_modes({1: math.sqrt(math.pi), -1: math.sqrt(math.pi)}, 4, real=True)
    assert sc.energy(z) == pytest.approx(math.pi / 2 + math.pi / 48, rel=1e-13)


def test_energy_zero_state():
    assert sc.energy(sc.SpectralState.zeros(6)) == 0.0


@pytest.mark.parametrize("n1", [1, 3, 50])
def test_single_pair_energy_split(n1):
    I = 0.37
    a = math.sqrt(I)
    z = sc.SpectralState.from_modes({n1: a, -n1: a}, n1, real=True)
    assert sc.quadratic_energy(z) == pytest.approx(n1 / (1 + n1 * n1) * I, rel=1e-14)
    sextic = 1 / (6 * math.pi**2) * n1**3 / (1 + n1 * n1) ** 3 * I**3
    assert sc.sextic_value(z).real == pytest.approx(sextic, rel=1e-12)


def test_energy_requires_real_state():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        sc.energy(random_state(rng, 4, real=False))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=24), st.integers(min_value=0, max_value=2**32 - 1))
def test_quadratic_part_matches_grid_quadrature(jmax, seed):
    rng = np.random.default_rng(seed)
    z = random_state(rng, jmax)
    M = sc.dealiased_grid_size(jmax)
    u = sc.synthesize(z, M).samples
    half_int_u2 = 0.5 * (2 * np.pi / M) * np.sum(u**2)
    assert sc.quadratic_energy(z) == pytest.approx(half_int_u2, rel=1e-10)
    assert isinstance(sc.energy(z), float)


# ---------------------------------------------------------------------------
# norms


def test_weighted_norm_examples():
    e1 = sc.SpectralState.from_modes({1: 1.0}, 3)
    e2 = sc.SpectralState.from_modes({2: 1.0}, 3)
    assert sc.weighted_norm(e1, 1) == 1.0
    assert sc.weighted_norm(e2, 1) == 2.0
    assert sc.weighted_norm(e2, 0.5) == pytest.approx(math.sqrt(2), rel=1e-15)
    with pytest.raises(ValueError):
        sc.weighted_norm(e1, -1)


# ---------------------------------------------------------------------------
# sextic vector field


def test_gradient_zero():
    g = sc.gradient_G(sc.SpectralState.zeros(8))
    assert np.all(g.z == 0)


def test_gradient_homogeneity():
    rng = np.random.default_rng(2)
    z = random_state(rng, 12, 0.3)
    g1 = sc.gradient_G(z).z
    g2 = sc.gradient_G(z.scaled(2.0)).z
    assert np.max(np.abs(g2 - 32 * g1)) <= 1e-12 * np.max(np.abs(32 * g1))


def test_gradient_cosine_against_direct_sum():
    jmax = 8
    a = math.sqrt(math.pi)
    z = sc.SpectralState.from_modes({1: a, -1: a}, jmax, real=True)
    g = sc.gradient_G(z)
    ref = oracles.gradient_direct({1: a, -1: a}, jmax)
    for j, v in ref.items():
        assert abs(g[j] - v) <= 1e-13 * max(1.0, abs(v))


def test_gradient_random_state_against_direct_sum():
    jmax = 4
    rng = np.random.default_rng(3)
    z = random_state(rng, jmax, 0.5)
    g = sc.gradient_G(z)
    ref = oracles.gradient_direct({int(j): complex(v) for j, v in zip(z.modes, z.z)}, jmax)
    scale = max(abs(v) for v in ref.values())
    for j, v in ref.items():
        assert abs(g[j] - v) <= 1e-12 * scale


def test_gradient_matches_finite_differences():
    """``dG/dz_{-j}`` against central differences of the polynomial sextic value."""
    jmax = 6
    rng = np.random.default_rng(4)
    z = random_state(rng, jmax, 0.2, real=False)
    g = sc.gradient_G(z)
    h = 1e-6
    for j in (-6, -3, -1, 1, 2, 5):
        e = np.zeros(2 * jmax, dtype=complex)
        e[sc._index(-j, jmax)] = h
        plus = sc.sextic_value(sc.SpectralState(z.z + e, jmax, False))
        minus = sc.sextic_value(sc.SpectralState(z.z - e, jmax, False))
        fd = (plus - minus) / (2 * h)
        assert abs(fd - g[j]) <= 1e-6 * max(abs(g[j]), 1e-12)


def test_aliasing_guard():
    z = sc.SpectralState.zeros(16)
    with pytest.raises(sc.AliasingError):
        sc.gradient_G(z, M=64)
    assert sc.dealiased_grid_size(16) > 6 * 16
