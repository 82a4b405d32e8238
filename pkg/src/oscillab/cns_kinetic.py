"""Kinetic homogenization objects for the compressible Navier-Stokes system.

The density oscillations of a sequence rho^n are encoded by the weighted
distribution function H(t, y, xi), the weak limit of rho^n 1_{rho^n < xi}:
nondecreasing in xi, zero below the support, and equal to the mean density
at the top of the grid.  H satisfies a transport equation in (y, xi) whose
xi-drift is set by the pressure mismatch against the mean pressure and by
the dilation rate; along its characteristics H picks up the integrating
factor of the local compression, which the 1-d solver applies as a
multiplicative weight.

Residual certification of the effective equations is done by pairing the
finite-frequency kinetic identity and the limit (Young measure) identity
against separable test functions, with all interface crossings handled by
splitting the quadrature domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .constitutive import PressureLaw
from .exact_solutions import (CnsShellFamily, TIME_WINDOW, bump,
                              bump_derivative, _midpoints,
                              _piecewise_midpoints)

__all__ = [
    "DensityKineticField",
    "two_phase_H",
    "solve_H_transport_1d",
    "renormalized_residual",
    "ResidualReport",
]


@dataclass
class DensityKineticField:
    """H(t, y, xi) on a tensor grid with the viscosity combination lam + 2 mu."""

    times: np.ndarray
    y: np.ndarray
    xi: np.ndarray
    H: np.ndarray               # (nt, ny, nxi)
    lam2mu: float = 1.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.xi = np.asarray(self.xi, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        if self.H.shape != (len(self.times), len(self.y), len(self.xi)):
            raise ValueError("H shape does not match grids")
        if self.lam2mu <= 0:
            raise ValueError("lam + 2 mu must be positive")

    @property
    def rho_bar(self) -> np.ndarray:
        """Mean density: the top-of-grid value of H."""
        return self.H[..., -1]

    def validate(self, tol: float = 0.0) -> None:
        if np.any(self.H < -tol):
            raise ValueError("H must be nonnegative")
        if np.any(np.diff(self.H, axis=-1) < -tol):
            raise ValueError("H must be nondecreasing in xi")
        if np.any(np.abs(self.H[..., 0]) > tol):
            raise ValueError("H must vanish at the bottom of the xi grid")

    def mean_pressure(self, pressure: PressureLaw) -> np.ndarray:
        """Mean pressure int p dnu of the density statistics.

        dH(xi) = xi dnu(xi), so the moment is the Stieltjes sum of
        p(xi)/xi against the increments of H.
        """
        mid_xi = 0.5 * (self.xi[1:] + self.xi[:-1])
        mid_p = pressure(mid_xi)
        dH = np.diff(self.H, axis=-1)
        return np.sum(dH * (mid_p / mid_xi)[None, None, :], axis=-1)


def two_phase_H(theta: float, rho1: float, rho2: float,
                xi: np.ndarray) -> np.ndarray:
    """H slice of the two-phase density measure theta delta_rho1 + (1-theta) delta_rho2.

    H(xi) = theta rho1 1_{rho1 < xi} + (1 - theta) rho2 1_{rho2 < xi}.
    """
    if not 0.0 < rho1 < rho2:
        raise ValueError("need 0 < rho1 < rho2")
    if rho1 <= xi[0] or rho2 >= xi[-1]:
        raise ValueError("atoms must lie strictly inside the xi grid")
    return theta * rho1 * (xi > rho1) + (1.0 - theta) * rho2 * (xi > rho2)


def _interp_columns(H: np.ndarray, y: np.ndarray, y_feet: np.ndarray) -> np.ndarray:
    """Linear interpolation of each xi-level of H to the y-feet (nearest
    extension outside the y range)."""
    out = np.empty_like(H)
    yf = np.clip(y_feet, y[0], y[-1])
    idx = np.clip(np.searchsorted(y, yf) - 1, 0, len(y) - 2)
    w = (yf - y[idx]) / (y[idx + 1] - y[idx])
    out = H[idx] * (1.0 - w)[:, None] + H[idx + 1] * w[:, None]
    return out


def solve_H_transport_1d(H0: np.ndarray, y: np.ndarray, xi: np.ndarray,
                         u: Callable, u_y: Callable, pressure: PressureLaw,
                         p_bar: Callable, lam2mu: float,
                         t0: float, T: float, dt: float,
                         n_outputs: int = 11,
                         char_rtol: float = 1e-9) -> DensityKineticField:
    """Semi-Lagrangian transport of H with a prescribed velocity field.

    Backward characteristics per step:  dy/dt = u(t, y)  and
    d xi/dt = -xi (p(xi) - p_bar(t, y) + lam2mu * u_y(t, y)) / lam2mu,
    with the compression weight exp(-int u_y dt) multiplying the pulled-back
    values, so the top-of-grid mass obeys the continuity equation.
    """
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    H = np.array(H0, dtype=float)
    ny, nxi = len(y), len(xi)
    if H.shape != (ny, nxi):
        raise ValueError("H0 must be (ny, nxi)")
    n_steps = max(1, int(np.ceil((T - t0) / dt)))
    dt = (T - t0) / n_steps
    out_idx = np.unique(np.round(np.linspace(0, n_steps, n_outputs)).astype(int))

    lo, hi = xi[0], xi[-1]
    margin = 0.5 * (hi - lo)

    def rhs(s, z):
        Y = z[:ny]
        I = z[ny:2 * ny]
        Xi = z[2 * ny:].reshape(ny, nxi)
        uy = np.asarray(u_y(s, Y), dtype=float) * np.ones(ny)
        pb = np.asarray(p_bar(s, Y), dtype=float) * np.ones(ny)
        Xic = np.clip(Xi, max(lo - margin, 0.0), hi + margin)
        dXi = -Xic * (pressure(Xic) - pb[:, None]
                      + lam2mu * uy[:, None]) / lam2mu
        return np.concatenate([np.asarray(u(s, Y), dtype=float) * np.ones(ny),
                               uy, dXi.ravel()])

    snaps, times = [], []
    if 0 in out_idx:
        snaps.append(H.copy())
        times.append(t0)
    t = t0
    for k in range(1, n_steps + 1):
        t_next = t0 + k * dt
        z0 = np.concatenate([y, np.zeros(ny),
                             np.tile(xi, ny)])
        sol = solve_ivp(rhs, (t_next, t), z0, method="RK45",
                        rtol=char_rtol, atol=1e-12)
        if not sol.success:
            raise RuntimeError(f"characteristic solve failed: {sol.message}")
        zf = sol.y[:, -1]
        y_feet = zf[:ny]
        # integral of u_y backward in time carries a minus sign
        weight = np.exp(zf[ny:2 * ny])
        xi_feet = zf[2 * ny:].reshape(ny, nxi)

        H_at_feet_y = _interp_columns(H, y, y_feet)
        H_new = np.empty_like(H)
        for j in range(ny):
            with np.errstate(divide="ignore", over="ignore"):
                col = PchipInterpolator(xi, H_at_feet_y[j], extrapolate=False)
            vals = col(np.clip(xi_feet[j], lo, hi))
            vals[xi_feet[j] < lo] = 0.0
            vals[xi_feet[j] > hi] = H_at_feet_y[j, -1]
            H_new[j] = vals * weight[j]
        H_new = np.maximum(H_new, 0.0)
        H_new = np.maximum.accumulate(H_new, axis=-1)
        if np.any(~np.isfinite(H_new)):
            raise RuntimeError("H transport produced non-finite values")
        H = H_new
        t = t_next
        if k in out_idx:
            snaps.append(H.copy())
            times.append(t)

    out = DensityKineticField(times=np.array(times), y=y, xi=xi,
                              H=np.array(snaps), lam2mu=lam2mu)
    out.validate(tol=1e-12)
    return out


# -- residual certification ---------------------------------------------------


@dataclass
class ResidualReport:
    """Pairing defects for the finite-n kinetic identity and the limit one."""

    approx: np.ndarray         # (n_phi, n_theta) finite-frequency residuals
    renorm: np.ndarray         # (n_phi, n_theta) Young-measure residuals

    @property
    def max_approx(self) -> float:
        return float(np.max(np.abs(self.approx)))

    @property
    def max_renorm(self) -> float:
        return float(np.max(np.abs(self.renorm)))


def _xi_test_functions(xi_lo: float, xi_hi: float, n: int):
    """Smooth compactly supported test profiles on the density range."""
    centers = np.linspace(xi_lo, xi_hi, n + 2)[1:-1]
    half = 0.9 * (centers[1] - centers[0]) if n > 1 else 0.45 * (xi_hi - xi_lo)
    return [(float(c), float(half)) for c in centers]


def renormalized_residual(family: CnsShellFamily, n_phi: int = 4,
                          n_theta: int = 2, n_t: int = 96, n_s: int = 384,
                          n_xi: int = 2048) -> ResidualReport:
    """Weak residuals of the kinetic identities on an explicit shell family.

    The finite-n identity is paired against phi(t, y) theta(xi); all
    xi-integrals reduce to antiderivatives of theta evaluated at the local
    density, and the (t, y) quadrature is split at the moving interfaces
    through similarity coordinates.  The limit identity is evaluated on the
    two-atom Young measure of the rescaled family; its right side vanishes
    identically exactly when the pressure is matched.
    """
    d = family.d
    lam2mu = 2.0 * family.mu + family.lam
    spec = family.spec
    p = family.pressure
    t_lo, t_hi = TIME_WINDOW
    s_lo, s_hi = 0.25, 1.75

    # space-time bumps in (t, s = |y|/t) similarity coordinates
    tc = np.linspace(t_lo, t_hi, max(2, n_phi // 2) + 2)[1:-1]
    th = 0.8 * (tc[1] - tc[0]) if len(tc) > 1 else 0.4 * (t_hi - t_lo)
    sc = np.linspace(s_lo, s_hi, 4)[1:-1]
    sh = 0.8 * (sc[1] - sc[0])
    bumps = [(float(a), float(th), float(b), float(sh))
             for a in tc for b in sc][:n_phi]

    rng_lo = min(spec.a, spec.b) / t_hi**d
    rng_hi = max(spec.a, spec.b) / t_lo**d
    pad = 0.3 * (rng_hi - rng_lo)
    thetas = _xi_test_functions(rng_lo - pad, rng_hi + pad, n_theta)
    xi_dense = np.linspace(rng_lo - pad, rng_hi + pad, n_xi)
    dxi = xi_dense[1] - xi_dense[0]
    omega = {1: 1.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[d]

    def theta_profile(c, h):
        th_vals = bump((xi_dense - c) / h)
        thp_vals = bump_derivative((xi_dense - c) / h) / h
        A = np.concatenate([[0.0], np.cumsum(
            0.5 * (th_vals[1:] + th_vals[:-1]) * dxi)])        # int theta
        B = np.concatenate([[0.0], np.cumsum(
            0.5 * ((thp_vals * xi_dense)[1:] + (thp_vals * xi_dense)[:-1]) * dxi)])
        return th_vals, A, B

    approx = np.empty((len(bumps), len(thetas)))
    renorm = np.empty((len(bumps), len(thetas)))

    for jt, (c, h) in enumerate(thetas):
        _tv, A_anti, B_anti = theta_profile(c, h)
        A_of = lambda rho: np.interp(rho, xi_dense, A_anti)
        B_of = lambda rho: np.interp(rho, xi_dense, B_anti)
        for jb, (tcen, thal, scen, shal) in enumerate(bumps):
            ta, tb = max(t_lo, tcen - thal), min(t_hi, tcen + thal)
            Tn, wT = _midpoints(ta, tb, n_t)
            sa, sb = max(scen - shal, 1e-6), scen + shal
            Sn, wS = _piecewise_midpoints(
                sa, sb, family.interface_speeds_in(sa, sb), n_s)
            tt, ss = Tn[:, None], Sn[None, :]
            rr = ss * tt
            w2 = (wT[:, None] * wS[None, :]) * tt * omega * rr ** (d - 1)

            def phi(t_, r_):
                return bump((t_ - tcen) / thal) * bump((r_ / t_ - scen) / shal)

            def phi_t(t_, r_):
                base = bump_derivative((t_ - tcen) / thal) / thal \
                    * bump((r_ / t_ - scen) / shal)
                chain = bump((t_ - tcen) / thal) \
                    * bump_derivative((r_ / t_ - scen) / shal) / shal \
                    * (-r_ / t_**2)
                return base + chain

            def phi_r(t_, r_):
                return bump((t_ - tcen) / thal) \
                    * bump_derivative((r_ / t_ - scen) / shal) / (shal * t_)

            rho = family.rho_radial(tt, rr)
            un = ss
            divu = d / tt
            z = p(rho) - lam2mu * divu
            bval = A_of(rho)             # b(rho) = int theta up to rho
            lbpb = B_of(rho)             # rho b'(rho) - b(rho) = int xi theta'

            # finite-n kinetic identity, derivatives on the test pair
            conv = -(phi_t(tt, rr) + un * phi_r(tt, rr)) * bval
            zterm = -phi(tt, rr) * lbpb * z / lam2mu
            pterm = phi(tt, rr) * lbpb * p(rho) / lam2mu
            approx[jb, jt] = float(np.sum((conv + zterm + pterm) * w2))

            # limit Young measure: atoms a/t^d, b/t^d with weights theta,1-theta
            r1 = spec.a / tt**d
            r2 = spec.b / tt**d
            w_at = (spec.theta, 1.0 - spec.theta)
            nb = w_at[0] * A_of(r1) + w_at[1] * A_of(r2)
            nlb = w_at[0] * B_of(r1) + w_at[1] * B_of(r2)
            pbar = w_at[0] * p(r1) + w_at[1] * p(r2)
            rhs_ym = (nlb * pbar
                      - (w_at[0] * B_of(r1) * p(r1) + w_at[1] * B_of(r2) * p(r2))
                      ) / lam2mu
            lhs = -(phi_t(tt, rr) + un * phi_r(tt, rr)) * nb \
                + phi(tt, rr) * nlb * divu
            renorm[jb, jt] = float(np.sum((lhs - phi(tt, rr) * rhs_ym) * w2))

    return ResidualReport(approx=approx, renorm=renorm)
