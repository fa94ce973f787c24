import math

import numpy as np
import pytest

from twofluid import (
    DegenerateGeometryError,
    IncompatibleDataError,
    InterfaceState,
    Workspace,
    apply_e,
    apply_g,
    apply_g_tilde,
    apply_j,
    apply_multiplier,
    config_from_dimensionless,
    coupled_dn_flat_symbol,
    derive_params,
    dn_apply,
    dn_mix_flat_symbol,
    e_quadratic_form,
    inner,
    invert_g_tilde,
    invert_j,
    j_flat_symbol,
    norm_hdot_mu,
    transmission_solve,
)
from twofluid.spectral import deriv
from conftest import smooth_field


def make_state(grid, zeta, psi, eps=0.3, mu=0.5, rbm=0.4, ratio=1.5, bond=100.0, n_z=32):
    p = derive_params(config_from_dimensionless(eps, mu, rbm, ratio, bond))
    return InterfaceState(grid=grid, zeta=zeta, psi=psi, params=p, n_z=n_z)


def test_state_depth_guard(grid64):
    with pytest.raises(DegenerateGeometryError):
        make_state(grid64, -5.0 * np.ones(64), np.zeros(64), eps=0.5)


def test_apply_j_water_waves_identity(grid64, rng):
    u = smooth_field(rng, grid64)
    st = make_state(grid64, 0.4 * np.cos(grid64.nodes), np.zeros(64), rbm=0.0, ratio=1.0)
    assert np.allclose(apply_j(st, u), u, atol=1e-14)
    assert np.allclose(invert_j(st, u), u, atol=1e-14)


def test_apply_j_constants(grid64):
    st = make_state(grid64, 0.2 * np.cos(grid64.nodes), np.zeros(64))
    out = apply_j(st, 3.0 * np.ones(64))
    assert np.allclose(out, 3.0 * st.params.rhobar_plus, atol=1e-8)


def test_apply_j_flat_multiplier(grid64):
    st = make_state(grid64, np.zeros(64), np.zeros(64), eps=0.0, n_z=192)
    p = st.params
    for k in (1, 3):
        u = np.cos(k * grid64.nodes)
        expected = float(j_flat_symbol(p, np.array([float(k)]))[0]) * u
        out = apply_j(st, u, tol=1e-12)
        assert np.max(np.abs(out - expected)) < 2e-5


def test_invert_j_round_trip(grid64, rng):
    st = make_state(grid64, smooth_field(rng, grid64, 3, 0.8), np.zeros(64))
    for _ in range(3):
        psi = smooth_field(rng, grid64)
        x = invert_j(st, psi)
        back = apply_j(st, x, tol=1e-12)
        assert np.linalg.norm(back - psi) <= 1e-9 * np.linalg.norm(psi)


def test_invert_j_flat_closed_form(grid64):
    st = make_state(grid64, np.zeros(64), np.zeros(64), eps=0.0, n_z=192)
    p = st.params
    k = 2
    psi = np.cos(k * grid64.nodes)
    expected = psi / float(j_flat_symbol(p, np.array([float(k)]))[0])
    assert np.max(np.abs(invert_j(st, psi) - expected)) < 2e-5


def test_invert_j_steep_symbolic_preconditioner(grid64, rng):
    # steepness above the switch point exercises the symbolic preconditioner
    zeta = 0.9 * np.cos(grid64.nodes)
    st = make_state(grid64, zeta, np.zeros(64), eps=0.7, mu=0.3, n_z=32)
    assert st.params.eps * np.max(np.abs(zeta)) > 0.5
    psi = smooth_field(rng, grid64)
    x = invert_j(st, psi)
    assert np.linalg.norm(apply_j(st, x, tol=1e-12) - psi) <= 1e-9 * np.linalg.norm(psi)


def test_apply_g_flat_multiplier(grid64):
    st = make_state(grid64, np.zeros(64), np.zeros(64), eps=0.0, mu=0.7, n_z=192)
    p = st.params
    for k in (1, 4):
        psi = np.sin(k * grid64.nodes)
        expected = float(coupled_dn_flat_symbol(p, np.array([float(k)]))[0]) * psi
        out = apply_g(st, psi)
        assert np.max(np.abs(out - expected)) < 5e-5


def test_apply_g_water_waves_single_layer(grid64, rng):
    zeta = 0.3 * np.cos(grid64.nodes)
    st = make_state(grid64, zeta, np.zeros(64), rbm=0.0, ratio=1.0)
    psi = smooth_field(rng, grid64)
    out = apply_g(st, psi)
    single = dn_apply(st.diffeo(+1), psi) / st.params.hbar_plus
    assert np.allclose(out, single, atol=1e-12)


def test_apply_g_constants_and_mean(grid64, rng):
    st = make_state(grid64, 0.25 * np.sin(grid64.nodes), np.zeros(64))
    assert np.max(np.abs(apply_g(st, np.ones(64)))) < 1e-8
    out = apply_g(st, smooth_field(rng, grid64))
    assert abs(np.mean(out)) < 1e-10


def test_g_symmetry_and_coercivity(grid64, rng):
    zeta = smooth_field(rng, grid64, 3, 1.0)
    coercivity = []
    for eps, mu in ((0.1, 0.9), (0.3, 0.3), (0.5, 0.05)):
        st = make_state(grid64, zeta, np.zeros(64), eps=eps, mu=mu)
        for _ in range(4):
            p1 = smooth_field(rng, grid64)
            p2 = smooth_field(rng, grid64)
            g1 = apply_g(st, p1)
            g2 = apply_g(st, p2)
            s12 = inner(grid64, g1, p2)
            s21 = inner(grid64, g2, p1)
            assert abs(s12 - s21) / max(abs(s12), abs(s21), 1e-30) < 1e-9
            quad = inner(grid64, p1, g1) / mu
            pnorm = norm_hdot_mu(grid64, p1, 0.0, mu) ** 2
            assert quad > 0.0
            coercivity.append(quad / pnorm)
    # uniformly coercive across the sweep
    assert min(coercivity) > 0.05


def test_transmission_zero_psi(grid64):
    st = make_state(grid64, 0.3 * np.cos(grid64.nodes), np.zeros(64))
    tr = transmission_solve(st)
    for f in (tr.psi_plus, tr.psi_minus, tr.v_plus, tr.v_minus, tr.w_plus, tr.w_minus):
        assert np.allclose(f, 0.0, atol=1e-12)


def test_transmission_reconstruction_and_flux(grid64, rng):
    zeta = smooth_field(rng, grid64, 3, 1.0)
    st = make_state(grid64, zeta, smooth_field(rng, grid64), eps=0.25, mu=0.6)
    tr = transmission_solve(st, tol=1e-11)
    p = st.params
    recon = p.rhobar_plus * tr.psi_plus - p.rhobar_minus * tr.psi_minus
    assert np.max(np.abs(recon - st.psi)) < 1e-8
    # flux continuity re-verified through independent solves of both layers
    gp = dn_apply(st.diffeo(+1), tr.psi_plus, tol=1e-12) / p.hbar_plus
    gm = dn_apply(st.diffeo(-1), tr.psi_minus, tol=1e-12) / p.hbar_minus
    assert np.max(np.abs(gp - gm)) < 1e-8 * max(1.0, np.max(np.abs(gp)))


def test_transmission_flat_traces(grid64):
    st = make_state(grid64, np.zeros(64), np.cos(2 * grid64.nodes), eps=0.0, mu=0.8,
                    n_z=192)
    p = st.params
    tr = transmission_solve(st, tol=1e-12)
    k = 2.0
    j0 = float(j_flat_symbol(p, np.array([k]))[0])
    smu_p = math.sqrt(p.mu_plus)
    w_expected = (
        (1.0 / p.hbar_plus) * smu_p * k * math.tanh(smu_p * k) / j0
    ) * np.cos(2 * grid64.nodes)
    assert np.max(np.abs(tr.psi_plus - np.cos(2 * grid64.nodes) / j0)) < 5e-5
    assert np.max(np.abs(tr.w_plus - w_expected)) < 5e-5
    assert np.max(np.abs(tr.v_plus - deriv(grid64, tr.psi_plus))) < 1e-10


def test_transmission_water_waves_reduction(grid64, rng):
    zeta = 0.3 * np.cos(grid64.nodes)
    psi = smooth_field(rng, grid64)
    st = make_state(grid64, zeta, psi, rbm=0.0, ratio=1.0)
    tr = transmission_solve(st)
    assert np.allclose(tr.psi_plus, psi, atol=1e-12)
    p = st.params
    zx = deriv(grid64, zeta)
    g = dn_apply(st.diffeo(+1), psi) / p.hbar_plus
    w_expected = (g + p.eps * p.mu * zx * deriv(grid64, psi)) / (
        1.0 + p.eps**2 * p.mu * zx**2
    )
    assert np.allclose(tr.w_plus, w_expected, atol=1e-10)
    assert np.allclose(
        tr.v_plus, deriv(grid64, psi) - p.eps * w_expected * zx, atol=1e-10
    )


def test_g_tilde_flat_symbol_and_positivity(grid64, rng):
    st = make_state(grid64, np.zeros(64), np.zeros(64), eps=0.0, mu=0.6, n_z=192)
    p = st.params
    k = 3.0
    u = np.sin(3 * grid64.nodes)
    expected = float(dn_mix_flat_symbol(p, np.array([k]))[0]) * u
    assert np.max(np.abs(apply_g_tilde(st, u) - expected)) < 5e-5
    st2 = make_state(grid64, smooth_field(rng, grid64, 3, 0.8), np.zeros(64))
    for _ in range(5):
        v = smooth_field(rng, grid64)
        assert inner(grid64, v, apply_g_tilde(st2, v)) >= -1e-12


def test_g_tilde_invert_round_trip(grid64, rng):
    st = make_state(grid64, 0.3 * np.cos(grid64.nodes), np.zeros(64))
    f = smooth_field(rng, grid64)
    f -= np.mean(f)
    u = invert_g_tilde(st, f)
    back = apply_g_tilde(st, u, tol=1e-12)
    assert np.linalg.norm(back - f) <= 1e-8 * np.linalg.norm(f)
    assert abs(np.mean(u)) < 1e-13
    with pytest.raises(IncompatibleDataError):
        invert_g_tilde(st, f + 1.0)


def test_apply_e_constant_field(grid64):
    st = make_state(grid64, 0.2 * np.cos(grid64.nodes), np.zeros(64))
    assert np.allclose(apply_e(st, 2.0 * np.ones(64)), 0.0, atol=1e-12)


def test_apply_e_flat_diagonal(grid64):
    st = make_state(grid64, np.zeros(64), np.zeros(64), eps=0.0, mu=0.5, n_z=192)
    p = st.params
    k = 2.0
    v = np.cos(2 * grid64.nodes)
    expected = (k**2 / float(dn_mix_flat_symbol(p, np.array([k]))[0])) * v
    assert np.max(np.abs(apply_e(st, v) - expected)) < 1e-4


def test_apply_e_positivity_and_bound(grid64, rng):
    from twofluid import e_coeff

    zeta = smooth_field(rng, grid64, 3, 0.9)
    st = make_state(grid64, zeta, np.zeros(64), eps=0.25, mu=0.4)
    e_val = e_coeff(st).value
    smu = math.sqrt(st.params.mu)
    for _ in range(20):
        v = smooth_field(rng, grid64)
        q = e_quadratic_form(st, v)
        assert q >= -1e-12
        weight = norm_hdot_mu(grid64, v, 0.0, 0.0)  # placeholder, replaced below
        uh = np.abs(np.fft.fft(v)) ** 2
        k = np.abs(grid64.wavenumbers)
        bnorm2 = grid64.length / grid64.n**2 * float(np.sum((1.0 + smu * k) * uh))
        assert st.params.mu * q <= e_val * bnorm2 * (1.0 + 1e-6)


def test_workspace_warm_start_consistency(grid64, rng):
    zeta = 0.2 * np.cos(grid64.nodes)
    psi = smooth_field(rng, grid64)
    st = make_state(grid64, zeta, psi)
    cold = transmission_solve(st)
    ws = Workspace()
    transmission_solve(st, workspace=ws)
    warm = transmission_solve(st, workspace=ws)
    assert np.max(np.abs(cold.psi_plus - warm.psi_plus)) < 1e-9
    assert np.max(np.abs(cold.w_minus - warm.w_minus)) < 1e-9
