import math

import numpy as np
import pytest

from twofluid import (
    InvalidConfigError,
    ShearConfig,
    critical_shear,
    growth_table,
    kelvin_criterion_threshold,
    max_growth,
    mode_frequencies,
    mode_growth,
)
from twofluid.kelvin import write_growth_csv

AIR_WATER_DEEP = ShearConfig(
    rho_plus=1025.0, rho_minus=1.2, depth_plus=1e3, depth_minus=1e3,
    sigma=0.073, gravity=9.81,
)


def test_no_shear_is_stable():
    cfg = ShearConfig(1000.0, 400.0, 2.0, 1.0, c_plus=0.7, c_minus=0.7, sigma=0.01)
    for k in np.geomspace(1e-3, 1e4, 50):
        assert mode_growth(k, cfg) == 0.0


def test_equal_densities_no_tension_always_unstable():
    cfg = ShearConfig(1000.0, 1000.0, 1.0, 1.0, c_plus=0.5, c_minus=-0.5, sigma=0.0)
    for k in np.geomspace(1e-2, 1e3, 30):
        assert mode_growth(k, cfg) > 0.0


def test_deep_water_marginal_mode():
    # classical threshold: (rho+ rho-/(rho+ + rho-)) U^2 = 2 sqrt(g drho sigma),
    # attained at k* = sqrt(g drho / sigma)
    cfg0 = AIR_WATER_DEEP
    g, s = cfg0.gravity, cfg0.sigma
    drho = cfg0.rho_plus - cfg0.rho_minus
    k_star = math.sqrt(g * drho / s)
    u_star = math.sqrt(
        2.0 * math.sqrt(g * drho * s) * (cfg0.rho_plus + cfg0.rho_minus)
        / (cfg0.rho_plus * cfg0.rho_minus)
    )
    assert mode_growth(k_star, cfg0.with_shear(0.999 * u_star)) == 0.0
    assert mode_growth(k_star, cfg0.with_shear(1.001 * u_star)) > 0.0
    # double root at the marginal point: the two frequencies coincide
    w1, w2 = mode_frequencies(k_star, cfg0.with_shear(u_star))
    assert abs(w1 - w2) < 1e-6 * abs(w1)


def test_deep_water_critical_shear_value():
    u_crit, k_crit = critical_shear(AIR_WATER_DEEP)
    closed = (
        4.0 * AIR_WATER_DEEP.sigma * AIR_WATER_DEEP.gravity
        * (AIR_WATER_DEEP.rho_plus - AIR_WATER_DEEP.rho_minus)
        * (AIR_WATER_DEEP.rho_plus + AIR_WATER_DEEP.rho_minus) ** 2
        / (AIR_WATER_DEEP.rho_plus * AIR_WATER_DEEP.rho_minus) ** 2
    ) ** 0.25
    assert u_crit == pytest.approx(closed, rel=1e-4)
    assert u_crit == pytest.approx(6.7, rel=0.01)
    k_star = math.sqrt(
        AIR_WATER_DEEP.gravity * (AIR_WATER_DEEP.rho_plus - AIR_WATER_DEEP.rho_minus)
        / AIR_WATER_DEEP.sigma
    )
    assert k_crit == pytest.approx(k_star, rel=0.05)


def test_galilean_invariance(rng):
    for _ in range(10):
        jump = rng.uniform(0.1, 5.0)
        shift = rng.uniform(-10, 10)
        base = ShearConfig(1200.0, 900.0, 0.05, 0.11, c_plus=jump / 2,
                           c_minus=-jump / 2, sigma=0.02)
        moved = ShearConfig(1200.0, 900.0, 0.05, 0.11, c_plus=jump / 2 + shift,
                            c_minus=-jump / 2 + shift, sigma=0.02)
        for k in (0.5, 7.0, 300.0):
            assert mode_growth(k, base) == pytest.approx(
                mode_growth(k, moved), abs=1e-12 * max(1.0, mode_growth(k, base))
            )


def test_jump_sign_symmetry():
    cfg = ShearConfig(1100.0, 1000.0, 0.2, 0.1, sigma=0.03)
    for k in (1.0, 50.0):
        up = mode_growth(k, cfg.with_shear(1.7))
        down = mode_growth(k, cfg.with_shear(-1.7))
        assert up == pytest.approx(down, rel=1e-12)


def test_threshold_formula_scalings():
    base = kelvin_criterion_threshold(AIR_WATER_DEEP, 1.0)
    doubled = kelvin_criterion_threshold(AIR_WATER_DEEP, 2.0)
    assert doubled == pytest.approx(base * 2.0 ** (-0.25), rel=1e-12)
    dry = ShearConfig(1000.0, 0.0, 1.0, 1.0, sigma=0.05)
    assert kelvin_criterion_threshold(dry, 1.0) == math.inf
    no_sigma = ShearConfig(1000.0, 500.0, 1.0, 1.0, sigma=0.0)
    assert kelvin_criterion_threshold(no_sigma, 1.0) == 0.0


def test_sigma_to_zero_threshold_to_zero():
    vals = []
    for s in (0.05, 0.005, 0.0005):
        cfg = ShearConfig(1100.0, 900.0, 10.0, 10.0, sigma=s)
        u, _ = critical_shear(cfg)
        vals.append(u)
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.5 * vals[0]


def test_growth_table_csv(tmp_path):
    rows = growth_table(AIR_WATER_DEEP.with_shear(10.0), np.geomspace(1, 1e4, 16))
    assert len(rows) == 16
    assert any(r["im_omega_max"] > 0 for r in rows)
    path = tmp_path / "growth.csv"
    write_growth_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,re_omega_1,re_omega_2,im_omega_max"
    assert len(lines) == 17


def test_mode_growth_rejects_bad_wavenumber():
    with pytest.raises(InvalidConfigError):
        mode_growth(0.0, AIR_WATER_DEEP)


def test_max_growth_positive_above_threshold():
    rate, k = max_growth(AIR_WATER_DEEP.with_shear(10.0))
    assert rate > 0.0
    assert 1e-3 <= k <= 1e5
