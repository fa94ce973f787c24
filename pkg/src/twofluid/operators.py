"""Composed two-layer operators built from the single-layer DN maps.

With G± the unit-depth layer operators of :mod:`twofluid.strip`, the package
exposes

  * the coupling map  J u = ρ̄⁺u − ρ̄⁻(H̄⁻/H̄⁺)(G⁻)⁻¹G⁺u  and its inverse,
  * the coupled interface operator  𝒢 = (1/H̄⁺) G⁺ ∘ J⁻¹,
  * the transmission solve producing both layer traces ψ± and the interface
    velocities (V±, w±) from the single unknown ψ = ρ̄⁺ψ⁺ − ρ̄⁻ψ⁻,
  * the density-weighted DN sum  𝒢̃ = ρ̄⁻(1/H̄⁺)G⁺ − ρ̄⁺(1/H̄⁻)G⁻  (positive
    on zero-mean data) and its gauged inverse,
  * the shear operator  ℰ = −∂x ∘ 𝒢̃⁻¹ ∘ ∂x  whose quadratic form measures
    the destabilizing inertia of a velocity jump.

All inverses are gauged by zero spatial mean.  Sign conventions are pinned by
the positivity of the associated quadratic forms, which the tests check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import (
    DegenerateGeometryError,
    IncompatibleDataError,
    NumericalError,
)
from .params import DimensionlessParams
from .spectral import PeriodicGrid, apply_multiplier, deriv, inner
from .strip import DiffeoData, build_trivial_diffeo, dn_apply, solve_neumann

DEFAULT_TOL = 1e-10


@dataclass
class InterfaceState:
    """Interface elevation and reduced potential with their parameters."""

    grid: PeriodicGrid
    zeta: np.ndarray
    psi: np.ndarray
    params: DimensionlessParams
    n_z: int = 32
    _diffeos: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        for name, arr in (("zeta", self.zeta), ("psi", self.psi)):
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} must have shape ({self.grid.n},)")
            if not np.all(np.isfinite(arr)):
                raise NumericalError(f"{name} contains non-finite values")
        p = self.params
        for sign, eps_l in ((+1, p.eps_plus), (-1, p.eps_minus)):
            depth = 1.0 + sign * eps_l * self.zeta
            if np.min(depth) <= 0.0:
                raise DegenerateGeometryError(
                    f"layer {'+' if sign > 0 else '-'} depth vanishes: "
                    f"min = {float(np.min(depth)):.3e}"
                )

    def diffeo(self, sign: int) -> DiffeoData:
        if sign not in self._diffeos:
            p = self.params
            eps_l = p.eps_plus if sign > 0 else p.eps_minus
            mu_l = p.mu_plus if sign > 0 else p.mu_minus
            self._diffeos[sign] = build_trivial_diffeo(
                self.grid, self.zeta, eps_l, mu_l, sign, n_z=self.n_z
            )
        return self._diffeos[sign]

    def replace_fields(self, zeta, psi) -> "InterfaceState":
        return InterfaceState(
            grid=self.grid, zeta=zeta, psi=psi, params=self.params, n_z=self.n_z
        )


@dataclass
class TraceBundle:
    """Layer traces and interface velocities from the transmission solve."""

    psi_plus: np.ndarray
    psi_minus: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray

    def jump_v(self) -> np.ndarray:
        return self.v_plus - self.v_minus

    def mean_v(self) -> np.ndarray:
        return 0.5 * (self.v_plus + self.v_minus)


class Workspace:
    """Warm-start cache for repeated solves on slowly varying states."""

    def __init__(self):
        self.invert_j_guess = None
        self.neumann_phi = None
        self.tilde_guess = None


# -- flat multipliers ------------------------------------------------------------


def j_flat_symbol(params: DimensionlessParams, k) -> np.ndarray:
    """Multiplier of the flat coupling map J (value ρ̄⁺ at ξ = 0 by the gauge)."""
    k = np.abs(np.asarray(k, dtype=float))
    tp = np.tanh(math.sqrt(params.mu_plus) * k)
    tm = np.tanh(math.sqrt(params.mu_minus) * k)
    out = np.full_like(k, params.rhobar_plus)
    nz = k > 0.0
    out[nz] = params.rhobar_plus + params.rhobar_minus * tp[nz] / tm[nz]
    return out


def coupled_dn_flat_symbol(params: DimensionlessParams, k) -> np.ndarray:
    """Multiplier of the flat coupled operator 𝒢:

    √μ|ξ| tanh(√μ⁺|ξ|) tanh(√μ⁻|ξ|) / (ρ̄⁺tanh(√μ⁻|ξ|) + ρ̄⁻tanh(√μ⁺|ξ|)).
    """
    k = np.abs(np.asarray(k, dtype=float))
    tp = np.tanh(math.sqrt(params.mu_plus) * k)
    tm = np.tanh(math.sqrt(params.mu_minus) * k)
    den = params.rhobar_plus * tm + params.rhobar_minus * tp
    out = np.zeros_like(k)
    nz = k > 0.0
    out[nz] = math.sqrt(params.mu) * k[nz] * tp[nz] * tm[nz] / den[nz]
    return out


def dn_mix_flat_symbol(params: DimensionlessParams, k) -> np.ndarray:
    """Multiplier of the flat weighted DN sum 𝒢̃:

    √μ|ξ|(ρ̄⁻tanh(√μ⁺|ξ|) + ρ̄⁺tanh(√μ⁻|ξ|)).
    """
    k = np.abs(np.asarray(k, dtype=float))
    tp = np.tanh(math.sqrt(params.mu_plus) * k)
    tm = np.tanh(math.sqrt(params.mu_minus) * k)
    return math.sqrt(params.mu) * k * (
        params.rhobar_minus * tp + params.rhobar_plus * tm
    )


# -- composed operators -----------------------------------------------------------


def apply_j(state: InterfaceState, u, tol=DEFAULT_TOL) -> np.ndarray:
    """Apply J = ρ̄⁺ − ρ̄⁻(H̄⁻/H̄⁺)(G⁻)⁻¹G⁺ (the lower-trace coupling map)."""
    p = state.params
    u = np.asarray(u, dtype=float)
    if p.rhobar_minus == 0.0:
        return p.rhobar_plus * u
    f = dn_apply(state.diffeo(+1), u, tol=tol)
    sol = solve_neumann(state.diffeo(-1), f, tol=tol)
    tr = sol.interface_trace(state.diffeo(-1))
    return p.rhobar_plus * u - p.rhobar_minus * (p.hbar_minus / p.hbar_plus) * tr


def invert_j(
    state: InterfaceState,
    psi,
    tol=1e-11,
    maxiter=200,
    workspace: Workspace | None = None,
    verify: bool = True,
) -> np.ndarray:
    """Solve J ψ⁺ = ψ for the lower-layer trace ψ⁺.

    GMRES preconditioned by the inverse flat multiplier of J; when the
    interface steepness ε‖ζ‖∞ exceeds 0.5 the preconditioner switches to
    the variable-coefficient zeroth-order symbol 1/S_J.
    """
    p = state.params
    psi = np.asarray(psi, dtype=float)
    if p.rhobar_minus == 0.0:
        return psi / p.rhobar_plus
    n = state.grid.n

    def matvec(v):
        return apply_j(state, v, tol=0.1 * tol)

    steep = p.eps * float(np.max(np.abs(state.zeta)))
    if steep > 0.5:
        from .symbols import TailSymbolSet
        from .spectral import apply_symbol

        ts = TailSymbolSet(state.grid, state.zeta, p)

        def prec(v):
            return apply_symbol(state.grid, lambda x, k: 1.0 / ts.j_symbol(x, k), v)

    else:

        def prec(v):
            return apply_multiplier(state.grid, lambda k: 1.0 / j_flat_symbol(p, k), v)

    a_op = LinearOperator((n, n), matvec=matvec)
    m_op = LinearOperator((n, n), matvec=prec)
    x0 = workspace.invert_j_guess if workspace is not None else None
    history = []
    x, info = gmres(
        a_op,
        psi,
        x0=x0,
        M=m_op,
        rtol=tol,
        atol=0.0,
        restart=40,
        maxiter=maxiter,
        callback=lambda r: history.append(float(r)),
        callback_type="pr_norm",
    )
    if verify or info != 0:
        res = float(np.linalg.norm(apply_j(state, x, tol=0.1 * tol) - psi))
        scale = float(np.linalg.norm(psi)) or 1.0
        if res > 1e-9 * scale:
            raise NumericalError(
                f"coupling-map inversion stagnated: relative residual {res/scale:.3e}",
                residual_history=history,
            )
    if workspace is not None:
        workspace.invert_j_guess = x.copy()
    return x


def apply_g(state: InterfaceState, psi, tol=DEFAULT_TOL, workspace=None) -> np.ndarray:
    """Coupled interface DN operator 𝒢 = (1/H̄⁺) G⁺ ∘ J⁻¹ (zero-mean output)."""
    psi_plus = invert_j(state, psi, workspace=workspace)
    return dn_apply(state.diffeo(+1), psi_plus, tol=tol) / state.params.hbar_plus


def transmission_solve(
    state: InterfaceState, tol=DEFAULT_TOL, workspace: Workspace | None = None
) -> TraceBundle:
    """Recover both layer traces and interface velocities from (ζ, ψ).

    Solves J ψ⁺ = ψ, sets ψ⁻ = (H̄⁻/H̄⁺)(G⁻)⁻¹G⁺ψ⁺ (gauged to zero mean),
    then evaluates

        w± = ((1/H̄±) G±ψ± + εμ ζₓ ∂xψ±) / (1 + ε²μ ζₓ²),
        V± = ∂xψ± − ε w± ζₓ.
    """
    p = state.params
    grid = state.grid
    # the inverse layer operator amplifies low-mode solver noise by ~1/mu,
    # so shallow configurations need proportionally tighter inner solves
    tol_eff = tol * min(1.0, p.mu / 0.1)
    psi_plus = invert_j(state, state.psi, workspace=workspace, verify=False)
    g_plus = dn_apply(state.diffeo(+1), psi_plus, tol=tol_eff)
    x0 = workspace.neumann_phi if workspace is not None else None
    sol_minus = solve_neumann(state.diffeo(-1), g_plus, tol=tol_eff, x0=x0)
    if workspace is not None:
        workspace.neumann_phi = sol_minus.phi.copy()
    psi_minus = (p.hbar_minus / p.hbar_plus) * sol_minus.interface_trace(
        state.diffeo(-1)
    )
    # the reconstruction identity doubles as the inversion residual check
    recon = p.rhobar_plus * psi_plus - p.rhobar_minus * psi_minus
    scale = float(np.linalg.norm(state.psi)) or 1.0
    if float(np.linalg.norm(recon - state.psi)) > 3e-8 * scale:
        raise NumericalError("transmission solve lost the trace reconstruction")
    # flux continuity (1/H̄⁺)G⁺ψ⁺ = (1/H̄⁻)G⁻ψ⁻ holds by construction
    g_over_h = g_plus / p.hbar_plus
    zx = deriv(grid, state.zeta)
    denom = 1.0 + p.eps**2 * p.mu * zx**2
    out = {}
    for tag, psi_l in (("plus", psi_plus), ("minus", psi_minus)):
        dpsi = deriv(grid, psi_l)
        w = (g_over_h + p.eps * p.mu * zx * dpsi) / denom
        v = dpsi - p.eps * w * zx
        out[f"w_{tag}"] = w
        out[f"v_{tag}"] = v
    return TraceBundle(
        psi_plus=psi_plus,
        psi_minus=psi_minus,
        v_plus=out["v_plus"],
        v_minus=out["v_minus"],
        w_plus=out["w_plus"],
        w_minus=out["w_minus"],
    )


def apply_g_tilde(state: InterfaceState, u, tol=DEFAULT_TOL) -> np.ndarray:
    """Weighted DN sum 𝒢̃ u = ρ̄⁻(1/H̄⁺)G⁺u − ρ̄⁺(1/H̄⁻)G⁻u (positive operator)."""
    p = state.params
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    if p.rhobar_minus > 0.0:
        out += p.rhobar_minus / p.hbar_plus * dn_apply(state.diffeo(+1), u, tol=tol)
    out -= p.rhobar_plus / p.hbar_minus * dn_apply(state.diffeo(-1), u, tol=tol)
    return out


def invert_g_tilde(
    state: InterfaceState,
    f,
    tol=1e-9,
    maxiter=400,
    workspace: Workspace | None = None,
) -> np.ndarray:
    """Solve 𝒢̃ u = f on zero-mean data; the result is gauged to zero mean.

    Conjugate gradients on the symmetric positive operator, preconditioned
    by the inverse flat multiplier.
    """
    f = np.asarray(f, dtype=float)
    fmean = abs(float(np.mean(f)))
    if fmean > 1e-8 * max(float(np.max(np.abs(f))), 1.0):
        raise IncompatibleDataError(
            f"inverse of the weighted DN sum needs zero-mean data, got mean {fmean:.3e}"
        )
    grid = state.grid

    def inv_mix(k):
        mf = dn_mix_flat_symbol(state.params, k)
        return np.where(mf > 0.0, 1.0 / np.where(mf > 0.0, mf, 1.0), 0.0)

    def prec(r):
        z = apply_multiplier(grid, inv_mix, r)
        return z - np.mean(z)

    x = np.zeros_like(f)
    if workspace is not None and workspace.tilde_guess is not None:
        x = workspace.tilde_guess.copy()
        x -= np.mean(x)
    r = f - apply_g_tilde(state, x, tol=0.02 * tol)
    r -= np.mean(r)
    nb = float(np.linalg.norm(f)) or 1.0
    z = prec(r)
    p_dir = z.copy()
    rz = float(np.dot(r, z))
    history = []
    for it in range(maxiter):
        nr = float(np.linalg.norm(r))
        history.append(nr)
        if nr <= tol * nb:
            break
        ap = apply_g_tilde(state, p_dir, tol=0.02 * tol)
        ap -= np.mean(ap)
        alpha = rz / float(np.dot(p_dir, ap))
        x += alpha * p_dir
        r -= alpha * ap
        r -= np.mean(r)
        z = prec(r)
        rz_new = float(np.dot(r, z))
        p_dir = z + (rz_new / rz) * p_dir
        rz = rz_new
    else:
        raise NumericalError(
            f"weighted-DN-sum inversion stagnated at residual {nr/nb:.3e}",
            residual_history=history,
        )
    x -= np.mean(x)
    if workspace is not None:
        workspace.tilde_guess = x.copy()
    return x


def dense_g_tilde(state: InterfaceState, tol=1e-10) -> np.ndarray:
    """Dense symmetric matrix of 𝒢̃ on the grid (column-by-column assembly).

    Cached on the state.  The matrix has a two-dimensional null space
    (constants and the Nyquist column annihilated by the spectral
    derivative); use :func:`pinv_g_tilde` to invert on its range.
    """
    key = "dense_mix"
    if key not in state._diffeos:
        n = state.grid.n
        cols = np.empty((n, n))
        eye = np.eye(n)
        for j in range(n):
            cols[:, j] = apply_g_tilde(state, eye[:, j], tol=tol)
        state._diffeos[key] = 0.5 * (cols + cols.T)
    return state._diffeos[key]


def pinv_g_tilde(state: InterfaceState, tol=1e-10, cutoff=1e-11) -> np.ndarray:
    """Pseudo-inverse of the dense 𝒢̃ matrix on its range (cached)."""
    key = "dense_mix_pinv"
    if key not in state._diffeos:
        mat = dense_g_tilde(state, tol=tol)
        vals, vecs = np.linalg.eigh(mat)
        scale = float(np.max(np.abs(vals))) or 1.0
        inv = np.where(np.abs(vals) > cutoff * scale, 1.0 / vals, 0.0)
        state._diffeos[key] = (vecs * inv) @ vecs.T
    return state._diffeos[key]


def apply_e(state: InterfaceState, v, tol=1e-9, workspace=None) -> np.ndarray:
    """Shear operator ℰ v = −∂x 𝒢̃⁻¹ ∂x v; (ℰv, v) = (𝒢̃⁻¹∂xv, ∂xv) ≥ 0."""
    g = deriv(state.grid, np.asarray(v, dtype=float))
    u = invert_g_tilde(state, g, tol=tol, workspace=workspace)
    return -deriv(state.grid, u)


def e_quadratic_form(state: InterfaceState, v, tol=1e-9) -> float:
    """Quadratic form (ℰ v, v) evaluated without the outer derivative."""
    g = deriv(state.grid, np.asarray(v, dtype=float))
    u = invert_g_tilde(state, g, tol=tol)
    return inner(state.grid, u, g)
