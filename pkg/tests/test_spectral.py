import math

import numpy as np
import pytest

from twofluid import (
    InvalidConfigError,
    NumericalError,
    PeriodicGrid,
    antideriv,
    apply_multiplier,
    apply_symbol,
    deriv,
    l2_norm,
    norm_h1_sigma,
    norm_hdot_mu,
    norm_sobolev,
)
from conftest import smooth_field


def test_grid_invariants():
    with pytest.raises(InvalidConfigError):
        PeriodicGrid(7)
    with pytest.raises(InvalidConfigError):
        PeriodicGrid(6)
    g = PeriodicGrid(16, length=4.0)
    assert g.dx == pytest.approx(0.25)
    assert np.allclose(np.diff(g.nodes), g.dx)


def test_multiplier_identity(grid64, rng):
    u = smooth_field(rng, grid64)
    out = apply_multiplier(grid64, lambda k: np.ones_like(k), u)
    assert np.allclose(out, u, atol=1e-14)


def test_multiplier_abs_on_sine(grid64):
    x = grid64.nodes
    u = np.sin(3 * x)
    out = apply_multiplier(grid64, np.abs, u)
    assert np.allclose(out, 3 * np.sin(3 * x), atol=1e-12)


def test_multiplier_tanh_on_cosine(grid64):
    x = grid64.nodes
    out = apply_multiplier(grid64, lambda k: np.tanh(np.abs(k)), np.cos(2 * x))
    assert np.allclose(out, math.tanh(2.0) * np.cos(2 * x), atol=1e-12)


def test_multiplier_rejects_nan(grid64, rng):
    u = smooth_field(rng, grid64)
    with pytest.raises(NumericalError):
        apply_multiplier(grid64, lambda k: np.where(k == 0, np.nan, 1.0), u)


def test_deriv_and_antideriv(grid64, rng):
    x = grid64.nodes
    assert np.allclose(deriv(grid64, np.sin(4 * x)), 4 * np.cos(4 * x), atol=1e-11)
    u = smooth_field(rng, grid64)
    u -= np.mean(u)
    assert np.allclose(deriv(grid64, antideriv(grid64, u)), u, atol=1e-11)


def test_symbol_identity_and_collapse(grid64, rng):
    u = smooth_field(rng, grid64)
    out = apply_symbol(grid64, lambda x, k: np.ones(np.broadcast_shapes(x.shape, k.shape)), u)
    assert np.allclose(out, u, atol=1e-12)
    # x-independent symbol must match the multiplier path to rounding
    m = lambda k: np.tanh(0.7 * np.abs(k)) + 0.3
    out_sym = apply_symbol(grid64, lambda x, k: m(k) + 0.0 * x, u)
    out_mul = apply_multiplier(grid64, m, u)
    assert np.max(np.abs(out_sym - out_mul)) <= 1e-13 * max(1.0, np.max(np.abs(u)))


def test_symbol_pointwise_product(grid64, rng):
    u = smooth_field(rng, grid64)
    a = 1.0 + 0.5 * np.cos(grid64.nodes)
    out = apply_symbol(
        grid64, lambda x, k: np.interp(x, grid64.nodes, a, period=grid64.length) + 0.0 * k, u
    )
    assert np.allclose(out, a * u, atol=1e-12)


def test_symbol_deterministic(grid64, rng):
    u = smooth_field(rng, grid64)
    s = lambda x, k: np.cos(x) * np.tanh(np.abs(k)) + 1.0
    out1 = apply_symbol(grid64, s, u)
    out2 = apply_symbol(grid64, s, u)
    assert np.array_equal(out1, out2)


def test_parseval(grid64, rng):
    u = smooth_field(rng, grid64)
    assert norm_sobolev(grid64, u, 0.0) == pytest.approx(l2_norm(grid64, u), rel=1e-12)


def test_sobolev_single_mode_ratio(grid64):
    u = np.cos(5 * grid64.nodes)
    ratio = norm_sobolev(grid64, u, 1.0) / norm_sobolev(grid64, u, 0.0)
    assert ratio == pytest.approx(math.sqrt(1 + 25), rel=1e-12)
    assert norm_sobolev(grid64, np.zeros(64), 2.0) == 0.0


def test_hdot_mu_norm(grid64):
    # constants vanish; single-mode value |xi|/(1+sqrt(mu)|xi|)^{1/2}
    assert norm_hdot_mu(grid64, np.ones(64), 0.0, 0.5) == 0.0
    u = np.cos(4 * grid64.nodes)
    val = norm_hdot_mu(grid64, u, 0.0, 1.0) / norm_sobolev(grid64, u, 0.0)
    assert val == pytest.approx(4.0 / math.sqrt(5.0), rel=1e-12)
    # mode-wise monotone nonincreasing in mu
    v1 = norm_hdot_mu(grid64, u, 0.0, 0.1)
    v2 = norm_hdot_mu(grid64, u, 0.0, 0.9)
    assert v2 <= v1


def test_h1_sigma_norm(grid64):
    u = np.cos(3 * grid64.nodes)
    bond = 50.0
    val = norm_h1_sigma(grid64, u, bond)
    assert val**2 == pytest.approx((1 + 9 / bond) * grid64.length / 2, rel=1e-12)
    assert norm_h1_sigma(grid64, u, math.inf) == pytest.approx(
        l2_norm(grid64, u), rel=1e-12
    )
    assert norm_h1_sigma(grid64, np.zeros(64), bond) == 0.0
