"""Effective (homogenized) dynamics for oscillating viscoelastic media.

The oscillation statistics F(t, x, xi) obey a kinetic transport equation in
the state variable xi coupled to one macroscopic parabolic equation, in two
equivalent formulations: velocity form (macro unknown v, total stress
S = sigma-moment + v_x) and stress form (macro unknown S directly).  The
kinetic step is semi-Lagrangian: F is constant along the characteristics
d xi/dt = S - sigma(xi), so the field is pulled back along exactly
integrated characteristics and re-sampled with monotone interpolation,
which preserves every CDF invariant by construction.

With the stress frozen, the characteristics decouple per xi: stable zeros
of S0 - sigma attract, the unstable zero splits the basins, and the
long-time field is a staircase whose weights are read off the initial CDF
at the unstable equilibria.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.sparse import diags_array
from scipy.sparse.linalg import splu

from .constitutive import ConstitutiveLaw
from .exact_solutions import BumpTest
from .young_measure import KineticField, moment_slice, snap_cdf

__all__ = [
    "EquilibriaReport",
    "find_equilibria",
    "FrozenResult",
    "frozen_kinetics",
    "EffectiveTrajectory",
    "solve_effective",
    "generalized_kinetic_sign_test",
    "tartar_spread",
    "SpreadReport",
    "default_sign_catalogue",
]


@dataclass
class EquilibriaReport:
    """Zeros of S0 - sigma with stability read from the sign of sigma'."""

    s0: float
    roots: np.ndarray
    stable: np.ndarray           # sigma'(root) > 0
    residuals: np.ndarray        # |sigma(root) - s0|

    @property
    def stable_roots(self) -> np.ndarray:
        return self.roots[self.stable]

    @property
    def unstable_roots(self) -> np.ndarray:
        return self.roots[~self.stable]


def find_equilibria(law: ConstitutiveLaw, s0: float,
                    window: tuple[float, float], samples: int = 4096,
                    ) -> EquilibriaReport:
    xs = np.linspace(window[0], window[1], samples)
    g = law(xs) - s0
    roots = []
    for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
        roots.append(brentq(lambda z: law(z) - s0, xs[i], xs[i + 1],
                            xtol=1e-14, rtol=8.9e-16))
    for i in np.flatnonzero(g == 0.0):
        roots.append(float(xs[i]))
    roots = np.array(sorted(set(np.round(roots, 13))))
    stable = law.derivative(roots) > 0 if len(roots) else np.array([], bool)
    res = np.abs(law(roots) - s0) if len(roots) else np.array([])
    return EquilibriaReport(s0=s0, roots=roots, stable=stable, residuals=res)


def _backward_feet(xi: np.ndarray, drive, law: ConstitutiveLaw, dt: float,
                   rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Feet of the backward characteristics of d xi/dt = drive - sigma(xi).

    `drive` is a scalar or an array broadcast against xi.  The vector field
    is evaluated on states clamped to a margin around the grid so outward
    runaway trajectories grow linearly instead of blowing up; their feet
    land outside the grid, where the field is extended by 0/1 anyway.
    """
    lo, hi = xi[0], xi[-1]
    margin = 0.5 * (hi - lo)
    start = np.broadcast_to(xi, np.shape(drive * np.ones_like(xi))).astype(float)
    shape = start.shape

    def rhs(_s, z):
        zc = np.clip(z.reshape(shape), lo - margin, hi + margin)
        return (law(zc) - np.asarray(drive)).ravel()

    sol = solve_ivp(rhs, (0.0, dt), start.ravel(), method="RK45",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"characteristic integration failed: {sol.message}")
    return sol.y[:, -1].reshape(shape)


def _monotone_resample(F_col: np.ndarray, xi: np.ndarray,
                       feet: np.ndarray) -> np.ndarray:
    """Pull back a CDF column along monotone feet; 0/1 beyond the grid."""
    with np.errstate(divide="ignore", over="ignore"):
        # pchip's slope weighting divides by tiny secants on flat plateaus
        interp = PchipInterpolator(xi, F_col, extrapolate=False)
    out = interp(np.clip(feet, xi[0], xi[-1]))
    out[feet < xi[0]] = 0.0
    out[feet > xi[-1]] = 1.0
    return out


@dataclass
class FrozenResult:
    xi: np.ndarray
    F0: np.ndarray
    F_T: np.ndarray
    report: EquilibriaReport
    weights_predicted: np.ndarray    # basin masses from F0 at unstable roots
    weights_measured: np.ndarray     # plateau heights of F_T
    stable_roots: np.ndarray


def frozen_kinetics(F0, xi: np.ndarray, law: ConstitutiveLaw, s0: float,
                    T: float, rtol: float = 1e-10) -> FrozenResult:
    """Transport a one-point CDF under the frozen-stress characteristics.

    `F0` may be an array on the xi grid or a callable.  Returns the field
    at time T together with the equilibria report and the phase weights:
    for the stable-unstable-stable pattern these are (F0(b), 1 - F0(b))
    with b the unstable equilibrium; more equilibria generalize per basin.
    """
    xi = np.asarray(xi, dtype=float)
    F0_arr = np.asarray(F0(xi) if callable(F0) else F0, dtype=float)
    if F0_arr.shape != xi.shape:
        raise ValueError("F0 must live on the xi grid")
    feet = _backward_feet(xi, s0, law, T, rtol=rtol)
    F_T = snap_cdf(_monotone_resample(F0_arr, xi, feet))

    rep = find_equilibria(law, s0, (xi[0], xi[-1]))
    stable = rep.stable_roots
    unstable = rep.unstable_roots
    F0_interp = PchipInterpolator(xi, F0_arr)
    cuts = np.concatenate([[0.0], np.sort(F0_interp(unstable)), [1.0]]) \
        if len(unstable) else np.array([0.0, 1.0])
    predicted = np.diff(cuts)

    # plateau levels probed between consecutive stable roots give one
    # weight increment per attracting phase
    if len(stable):
        pts = np.concatenate([[xi[0]], np.sort(stable), [xi[-1]]])
        mids = 0.5 * (pts[:-1] + pts[1:])
        F_T_interp = PchipInterpolator(xi, F_T)
        measured = np.diff(F_T_interp(mids))
    else:
        measured = np.array([1.0])
    return FrozenResult(xi=xi, F0=F0_arr, F_T=F_T, report=rep,
                        weights_predicted=predicted,
                        weights_measured=np.asarray(measured),
                        stable_roots=np.sort(stable))


# -- coupled effective system -------------------------------------------------


@dataclass
class EffectiveTrajectory:
    form: str
    times: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    F: np.ndarray                    # (nt, nx, nxi)
    macro: np.ndarray                # (nt, nx): v (effs1) or S (effs2)
    stress: np.ndarray               # (nt, nx) total stress field
    ubar: np.ndarray                 # (nt, nx) first moment of F
    sigbar: np.ndarray               # (nt, nx) sigma moment
    zeroth_drift: float              # max |moment(F,1) - 1| seen at any step
    momentum_series: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def kinetic_field(self) -> KineticField:
        return KineticField(self.times, self.x, self.xi, self.F,
                            provenance="kinetic-solver")


def _sigma_moment(F: np.ndarray, xi: np.ndarray, law: ConstitutiveLaw) -> np.ndarray:
    return moment_slice(F, xi, law, law.derivative)


def _dx_center(f: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * dx)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * dx)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * dx)
    return out


def solve_effective(F0: np.ndarray, law: ConstitutiveLaw, x: np.ndarray,
                    xi: np.ndarray, T: float, dt: float,
                    v0: np.ndarray | None = None, S0: np.ndarray | None = None,
                    form: str = "effs1", n_outputs: int = 11,
                    strang: bool = False, char_rtol: float = 1e-8,
                    overflow_tol: float = 0.05) -> EffectiveTrajectory:
    """Operator-split solve of the coupled effective system.

    Per step: (i) semi-Lagrangian xi-transport of every x-column of F along
    d xi/dt = S - sigma(xi) with the stress frozen at the step value;
    (ii) Crank-Nicolson update of the macroscopic field, velocity form
    (v_t = v_xx + d/dx sigma-moment, traction-free stress boundary) or
    stress form (S_t = S_xx + relaxation moment, S = 0 at the boundary);
    (iii) moment refresh.  With `strang`, the transport is split
    symmetrically around the macro step.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    F = snap_cdf(np.array(F0, dtype=float))
    nx = len(x)
    dx = x[1] - x[0]
    if form == "effs1":
        if v0 is None:
            raise ValueError("effs1 needs the initial velocity v0")
        macro = np.array(v0, dtype=float)
    elif form == "effs2":
        if S0 is None:
            raise ValueError("effs2 needs the initial stress S0")
        macro = np.array(S0, dtype=float)
    else:
        raise ValueError("form must be 'effs1' or 'effs2'")

    blocks = max(1, n_outputs - 1)
    n_steps = int(np.ceil(np.ceil(T / dt) / blocks)) * blocks
    dt = T / n_steps
    out_idx = np.unique(np.round(np.linspace(0, n_steps, n_outputs)).astype(int))

    r = 0.5 * dt / dx**2
    if form == "effs1":
        main = np.full(nx, 1.0 + 2.0 * r)
        lower = np.full(nx - 1, -r)
        upper = np.full(nx - 1, -r)
        upper[0] = -2.0 * r   # ghost from v_x = -sigbar at the free boundary
        lower[-1] = -2.0 * r
        lu = splu(diags_array([lower, main, upper], offsets=[-1, 0, 1]).tocsc())
    else:
        main = np.full(nx - 2, 1.0 + 2.0 * r)
        off = np.full(nx - 3, -r)
        lu = splu(diags_array([off, main, off], offsets=[-1, 0, 1]).tocsc())

    def stress_of(Fc, mac):
        sigbar = _sigma_moment(Fc, xi, law)
        if form == "effs1":
            vx = _dx_center(mac, dx)
            S = sigbar + vx
            S[0] = 0.0   # boundary condition S = 0 (ghost-consistent)
            S[-1] = 0.0
            return S, sigbar
        return mac, sigbar

    def transport(Fc, S, dt_sub):
        feet = _backward_feet(xi[None, :], S[:, None], law, dt_sub,
                              rtol=char_rtol)
        out = np.empty_like(Fc)
        for j in range(nx):
            out[j] = _monotone_resample(Fc[j], xi, feet[j])
        out = snap_cdf(out)
        edge = max(float(out[:, 1].max()), float((1.0 - out[:, -2]).max()))
        if edge > overflow_tol:
            raise RuntimeError(
                f"xi-grid support overflow: edge mass {edge:.3g} exceeds "
                f"{overflow_tol:.3g}; widen the xi grid")
        return out

    def macro_step(Fc, mac):
        sigbar = _sigma_moment(Fc, xi, law)
        if form == "effs1":
            dsig = _dx_center(sigbar, dx)
            rhs = mac + 0.5 * dt / dx**2 * np.concatenate((
                [2.0 * (mac[1] - mac[0])],
                mac[2:] - 2.0 * mac[1:-1] + mac[:-2],
                [2.0 * (mac[-2] - mac[-1])])) + dt * dsig
            # ghost closure v_{-1} = v_1 + 2 dx sigbar_0 on both CN levels
            rhs[0] += (2.0 * dt / dx) * sigbar[0]
            rhs[-1] -= (2.0 * dt / dx) * sigbar[-1]
            return lu.solve(rhs)
        m1 = moment_slice(Fc, xi, law.derivative, law.second_derivative)
        m2 = moment_slice(Fc, xi,
                          lambda z: law(z) * law.derivative(z),
                          lambda z: law.derivative(z)**2 + law(z) * law.second_derivative(z))
        source = mac * m1 - m2
        interior = mac[1:-1] + 0.5 * dt / dx**2 * (
            mac[2:] - 2.0 * mac[1:-1] + mac[:-2]) + dt * source[1:-1]
        out = np.zeros_like(mac)
        out[1:-1] = lu.solve(interior)
        return out

    times_out, F_out, macro_out, S_out, ubar_out, sig_out = [], [], [], [], [], []
    momentum = []
    zdrift = 0.0

    def record(t):
        S, sigbar = stress_of(F, macro)
        times_out.append(t)
        F_out.append(F.copy())
        macro_out.append(macro.copy())
        S_out.append(S)
        sig_out.append(sigbar)
        ubar_out.append(moment_slice(F, xi, lambda z: z,
                                     lambda z: np.ones_like(np.asarray(z, float))))

    if 0 in out_idx:
        record(0.0)
    momentum.append(float(np.trapezoid(macro, x)) if form == "effs1" else np.nan)

    F_work, mac = F, macro
    for k in range(1, n_steps + 1):
        S, _ = stress_of(F, macro)
        if strang:
            F = transport(F, S, 0.5 * dt)
            macro = macro_step(F, macro)
            S_half, _ = stress_of(F, macro)
            F = transport(F, S_half, 0.5 * dt)
        else:
            F = transport(F, S, dt)
            macro = macro_step(F, macro)
        z = moment_slice(F, xi, lambda _: 1.0,
                         lambda zz: np.zeros_like(np.asarray(zz, float)))
        zdrift = max(zdrift, float(np.max(np.abs(z - 1.0))))
        momentum.append(float(np.trapezoid(macro, x)) if form == "effs1" else np.nan)
        if k in out_idx:
            record(k * dt)

    return EffectiveTrajectory(
        form=form, times=np.array(times_out), x=x, xi=xi,
        F=np.array(F_out), macro=np.array(macro_out), stress=np.array(S_out),
        ubar=np.array(ubar_out), sigbar=np.array(sig_out),
        zeroth_drift=zdrift,
        momentum_series=np.array(momentum),
        meta={"dt": dt, "strang": strang, "n_steps": n_steps})


# -- kinetic diagnostics ------------------------------------------------------


def default_sign_catalogue(field: KineticField,
                           n_bumps: int = 6, n_eta: int = 4):
    """6 space-time bumps x 4 convex quadratic entropies on the grid."""
    t_lo, t_hi = field.times[0], field.times[-1]
    x_lo, x_hi = field.x[0], field.x[-1]
    tc = np.linspace(t_lo, t_hi, 4)[1:-1]
    th = 0.8 * (tc[1] - tc[0])
    xc = np.linspace(x_lo, x_hi, n_bumps // 2 + 2)[1:-1]
    xh = 0.8 * (xc[1] - xc[0])
    bumps = [BumpTest(tc=float(a), th=float(th), xc=float(b), xh=float(xh))
             for a in tc for b in xc]
    centers = np.quantile(field.xi, np.linspace(0.2, 0.8, n_eta))
    etas = [(float(c), lambda z, c=c: 2.0 * (np.asarray(z, float) - c))
            for c in centers]
    return bumps, etas


def generalized_kinetic_sign_test(field: KineticField, wave_speed: Callable,
                                  catalogue=None) -> np.ndarray:
    """Entropy-defect pairings of the generalized kinetic equation.

    For each nonnegative space-time bump phi and convex entropy eta the
    value of < d_t(1-F) + d_x lambda(xi)(1-F), phi eta' > is computed with
    the derivatives moved onto phi; for a field extracted from an entropy-
    dissipating run every value is nonpositive up to discretization.
    """
    if catalogue is None:
        catalogue = default_sign_catalogue(field)
    bumps, etas = catalogue
    t, x, xi = field.times, field.x, field.xi
    G = 1.0 - field.F
    lam = np.asarray(wave_speed(xi), dtype=float)
    tt = t[:, None]
    xx = x[None, :]
    values = np.empty((len(bumps), len(etas)))
    for i, bp in enumerate(bumps):
        pt = bp.phi_t(tt, xx)
        px = bp.phi_x(tt, xx)
        for j, (_c, eta_p) in enumerate(etas):
            w = eta_p(xi)
            inner_t = np.trapezoid(G * w[None, None, :], xi, axis=-1)
            inner_x = np.trapezoid(G * (lam * w)[None, None, :], xi, axis=-1)
            integrand = -(pt * inner_t + px * inner_x)
            values[i, j] = float(np.trapezoid(
                np.trapezoid(integrand, x, axis=1), t, axis=0))
    return values


@dataclass
class SpreadReport:
    s: np.ndarray                      # (nt, nx) spread field
    max_per_time: np.ndarray
    speed_oscillation: float | None   # max lambda oscillation on active sets


def tartar_spread(field: KineticField, wave_speed: Callable | None = None,
                  threshold: float = 0.01, delta: float = 0.05) -> SpreadReport:
    """Spread s = int F (1 - F) dxi and wave-speed oscillation report.

    s vanishes exactly when the local statistics are a single point mass;
    where it does not, the oscillation of the wave speed over the active
    set {delta < F < 1 - delta} is reported (it must vanish for admissible
    limits of entropy solutions with strictly monotone speed).
    """
    F = field.F
    s = np.trapezoid(F * (1.0 - F), field.xi, axis=-1)
    osc = None
    if wave_speed is not None:
        lam = np.asarray(wave_speed(field.xi), dtype=float)
        osc = 0.0
        for it in range(F.shape[0]):
            for ix in range(F.shape[1]):
                if s[it, ix] <= threshold:
                    continue
                sel = (F[it, ix] > delta) & (F[it, ix] < 1.0 - delta)
                if np.any(sel):
                    osc = max(osc, float(lam[sel].max() - lam[sel].min()))
    return SpreadReport(s=s, max_per_time=np.max(s, axis=1),
                        speed_oscillation=osc)
