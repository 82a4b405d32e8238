"""Direct fine-scale solvers: 1-d viscoelastic shear and viscous scalar laws.

The shear system  u_t = v_x,  v_t = (sigma(u) + v_x)_x  is discretized on a
staggered grid (strain on cells, velocity on nodes) so the kinematic
relation holds exactly at the discrete level.  The viscous term is implicit
(tridiagonal solve), the elastic flux explicit with a wave-speed time-step
cap; traction-free boundaries enter through a ghost total stress that is
antisymmetric about each boundary node, which is the second-order statement
S = 0 there and keeps the summation-by-parts energy estimate intact.

The scalar law  u_t + f(u)_x = eps u_xx  on the periodic cell uses a local
Lax-Friedrichs flux plus implicit diffusion, conservative to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import diags_array
from scipy.sparse.linalg import splu

from .constitutive import ConstitutiveLaw
from .exact_solutions import TwoPhaseSpec

__all__ = [
    "ShearState",
    "Trajectory",
    "DiagnosticsReport",
    "two_phase_ic",
    "solve_viscoelastic",
    "solve_viscous_scalar",
    "diagnostics",
    "SolverAbort",
]


class SolverAbort(RuntimeError):
    """Raised on a failed step; carries the state at the failure time."""

    def __init__(self, message: str, t: float, state: dict):
        super().__init__(f"{message} (t = {t:.6g})")
        self.t = t
        self.state = state


@dataclass
class ShearState:
    """Staggered shear state: strain on cells, velocity on nodes of (0, 1)."""

    u: np.ndarray            # (N,) cell centers
    v: np.ndarray            # (N+1,) nodes
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape[0] != self.u.shape[0] + 1:
            raise ValueError("need len(v) == len(u) + 1 on the staggered grid")

    @property
    def n_cells(self) -> int:
        return self.u.shape[0]

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def x_cells(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.dx

    def cell_stress(self, law: ConstitutiveLaw) -> np.ndarray:
        return law(self.u) + np.diff(self.v) / self.dx

    def node_stress(self, law: ConstitutiveLaw) -> np.ndarray:
        """Total stress at nodes; boundary values realize S = 0 exactly
        through the antisymmetric ghost convention."""
        sc = self.cell_stress(law)
        s = np.empty(self.n_cells + 1)
        s[1:-1] = 0.5 * (sc[:-1] + sc[1:])
        s[0] = 0.0
        s[-1] = 0.0
        return s


@dataclass
class Trajectory:
    """Output snapshots plus per-step diagnostic series."""

    kind: str
    times: np.ndarray
    x_cells: np.ndarray
    u: np.ndarray                     # (nt, N)
    v: np.ndarray | None = None       # (nt, N+1) for shear runs
    S: np.ndarray | None = None       # (nt, N+1) total stress at nodes
    x_nodes: np.ndarray | None = None
    dt: float = 0.0
    step_times: np.ndarray | None = None
    energy: np.ndarray | None = None  # per accepted step
    mass: np.ndarray | None = None
    sup_u: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def max_energy_increase(self) -> float:
        """Largest single-step energy gain relative to the initial energy."""
        if self.energy is None or len(self.energy) < 2:
            return 0.0
        e0 = abs(self.energy[0]) + 1e-300
        return float(max(np.max(np.diff(self.energy)), 0.0) / e0)


def two_phase_ic(spec: TwoPhaseSpec, v_profile: Callable | None = None,
                 cells_per_wavelength: int = 16) -> ShearState:
    """Oscillatory strain alternating a / b with fraction theta at scale 1/n.

    The velocity profile is independent of n, so the data satisfy uniform
    L-infinity / W^{1,infinity} bounds across the frequency sweep.
    """
    n = spec.n
    N = n * cells_per_wavelength
    x_c = (np.arange(N) + 0.5) / N
    frac = (x_c * n) % 1.0
    u0 = np.where(frac < spec.theta, spec.a, spec.b)
    x_n = np.arange(N + 1) / N
    v0 = np.zeros(N + 1) if v_profile is None else np.asarray(v_profile(x_n), float)
    return ShearState(u=u0, v=v0)


def _shear_energy(state: ShearState, law: ConstitutiveLaw) -> float:
    w = np.ones(state.n_cells + 1)
    w[0] = w[-1] = 0.5
    dx = state.dx
    return float(dx * np.sum(0.5 * w * state.v**2) + dx * np.sum(law.energy(state.u)))


def _stable_dt(law: ConstitutiveLaw, u: np.ndarray, dx: float, cfl: float) -> float:
    lo, hi = np.min(u), np.max(u)
    pad = 0.1 * (hi - lo) + 1e-12
    smax = float(np.max(np.abs(law.derivative(np.linspace(lo - pad, hi + pad, 257)))))
    smax = max(smax, 1e-12)
    return min(cfl * dx / np.sqrt(smax), 0.5 / smax)


def solve_viscoelastic(ic: ShearState, law: ConstitutiveLaw, T: float,
                       dt: float | None = None, cfl: float = 0.4,
                       n_outputs: int = 11) -> Trajectory:
    """IMEX evolution of the shear system with traction-free boundaries.

    Viscosity is implicit (constant tridiagonal factorization), the elastic
    flux explicit under the wave-speed cap dt <= cfl dx / sqrt(max sigma');
    the step halves and refactors when the strain range grows beyond the
    range the cap was computed for.
    """
    N = ic.n_cells
    dx = ic.dx
    if not (np.all(np.isfinite(ic.u)) and np.all(np.isfinite(ic.v))):
        raise SolverAbort("viscoelastic state is non-finite", ic.t,
                          {"u": ic.u, "v": ic.v})
    if dt is None:
        dt = _stable_dt(law, ic.u, dx, cfl)
    blocks = max(1, n_outputs - 1)
    n_steps = int(np.ceil(np.ceil(T / dt) / blocks)) * blocks
    dt = T / n_steps

    def factor(dt_):
        r = dt_ / dx**2
        main = np.full(N + 1, 1.0 + 2.0 * r)
        lower = np.full(N, -r)
        upper = np.full(N, -r)
        upper[0] = -2.0 * r    # ghost stress rows at the free boundaries
        lower[-1] = -2.0 * r
        return splu(diags_array([lower, main, upper], offsets=[-1, 0, 1]).tocsc())

    lu = factor(dt)
    u = ic.u.copy()
    v = ic.v.copy()
    t = 0.0

    out_idx = np.unique(np.round(np.linspace(0, n_steps, n_outputs)).astype(int))
    energies = [_shear_energy(ShearState(u, v, t), law)]
    step_times = [0.0]
    snaps_u, snaps_v, snaps_S, out_times = [], [], [], []

    def snapshot():
        st = ShearState(u.copy(), v.copy(), t)
        snaps_u.append(st.u)
        snaps_v.append(st.v)
        snaps_S.append(st.node_stress(law))
        out_times.append(t)

    if 0 in out_idx:
        snapshot()
    k = 0
    while k < n_steps:
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise SolverAbort("viscoelastic state is non-finite",
                              t, {"u": u, "v": v})
        cap = _stable_dt(law, u, dx, cfl)
        if dt > cap * 1.0000001:
            # reject: halve the step (keeping the output times reachable)
            sub = int(np.ceil(dt / cap))
            dt_new = dt / sub
            n_steps = n_steps * sub
            out_idx = out_idx * sub
            k = k * sub
            dt = dt_new
            lu = factor(dt)
            continue
        sig = law(u)
        rhs = v.copy()
        rhs[1:-1] += (dt / dx) * np.diff(sig)
        rhs[0] += (2.0 * dt / dx) * sig[0]
        rhs[-1] -= (2.0 * dt / dx) * sig[-1]
        v_new = lu.solve(rhs)
        u_new = u + (dt / dx) * np.diff(v_new)
        if not (np.all(np.isfinite(v_new)) and np.all(np.isfinite(u_new))):
            raise SolverAbort("viscoelastic step produced non-finite values",
                              t, {"u": u, "v": v})
        u, v = u_new, v_new
        k += 1
        t = k * dt * 1.0
        energies.append(_shear_energy(ShearState(u, v, t), law))
        step_times.append(t)
        if k in out_idx:
            snapshot()

    return Trajectory(
        kind="shear", times=np.array(out_times), x_cells=ic.x_cells,
        u=np.array(snaps_u), v=np.array(snaps_v), S=np.array(snaps_S),
        x_nodes=ic.x_nodes, dt=dt,
        step_times=np.array(step_times), energy=np.array(energies),
        sup_u=np.array([np.max(np.abs(su)) for su in snaps_u]),
        meta={"law_kind": law.kind, "N": N, "T": T, "cfl": cfl})


def solve_viscous_scalar(u0: np.ndarray, flux: Callable, flux_prime: Callable,
                         eps: float, T: float, dt: float | None = None,
                         cfl: float = 0.4, n_outputs: int = 11) -> Trajectory:
    """Conservative LLF + implicit-diffusion solve on the periodic cell (0,1).

    Total mass is conserved to round-off; under the CFL cap the update is
    monotone so the solution obeys the discrete maximum principle.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = np.asarray(u0, dtype=float).copy()
    N = u.shape[0]
    dx = 1.0 / N

    def cap_dt(u_):
        a = float(np.max(np.abs(flux_prime(u_)))) + 1e-12
        return cfl * dx / a

    if dt is None:
        dt = cap_dt(u)
    blocks = max(1, n_outputs - 1)
    n_steps = int(np.ceil(np.ceil(T / dt) / blocks)) * blocks
    dt = T / n_steps

    def factor(dt_):
        r = eps * dt_ / dx**2
        main = np.full(N, 1.0 + 2.0 * r)
        off = np.full(N - 1, -r)
        corner = np.array([-r])
        mat = diags_array([corner, off, main, off, corner],
                          offsets=[-(N - 1), -1, 0, 1, N - 1]).tocsc()
        return splu(mat)

    lu = factor(dt)
    out_idx = np.unique(np.round(np.linspace(0, n_steps, n_outputs)).astype(int))
    snaps, out_times = [], []
    mass = []
    sup = []
    t = 0.0
    if 0 in out_idx:
        snaps.append(u.copy())
        out_times.append(0.0)
    mass.append(float(np.sum(u) * dx))
    sup.append(float(np.max(np.abs(u))))
    k = 0
    while k < n_steps:
        cap = cap_dt(u)
        if dt > cap * 1.0000001:
            sub = int(np.ceil(dt / cap))
            dt = dt / sub
            n_steps *= sub
            out_idx = out_idx * sub
            k = k * sub
            lu = factor(dt)
            continue
        up = np.roll(u, -1)
        alpha = np.maximum(np.abs(flux_prime(u)), np.abs(flux_prime(up)))
        fhat = 0.5 * (flux(u) + flux(up)) - 0.5 * alpha * (up - u)
        rhs = u - (dt / dx) * (fhat - np.roll(fhat, 1))
        u = lu.solve(rhs)
        if not np.all(np.isfinite(u)):
            raise SolverAbort("scalar step produced non-finite values", t, {"u": u})
        k += 1
        t = k * dt
        mass.append(float(np.sum(u) * dx))
        sup.append(float(np.max(np.abs(u))))
        if k in out_idx:
            snaps.append(u.copy())
            out_times.append(t)

    return Trajectory(kind="scalar", times=np.array(out_times),
                      x_cells=(np.arange(N) + 0.5) * dx, u=np.array(snaps),
                      dt=dt, mass=np.array(mass), sup_u=np.array(sup),
                      meta={"eps": eps, "N": N, "T": T, "cfl": cfl})


@dataclass
class DiagnosticsReport:
    energy: np.ndarray
    max_energy_increase: float
    sup_u: np.ndarray
    A_max: float                 # max |int_0^x v|
    A_bound: float               # sqrt(2 E(0))
    A_bound_ok: bool
    g: np.ndarray                # (nt, N) strain minus velocity potential
    K_window: float | None = None
    within_K_window: bool | None = None


def diagnostics(traj: Trajectory, law: ConstitutiveLaw,
                K_window: float | None = None) -> DiagnosticsReport:
    """Energy, sup-norm, and strain-transport diagnostics of a shear run.

    g(x, t) = u - int_0^x v dy obeys a pointwise ODE that keeps it (and
    hence u) confined; its ingredients are reported so the confinement can
    be asserted against a configured window.
    """
    if traj.kind != "shear":
        raise ValueError("diagnostics expects a shear trajectory")
    dx = traj.x_cells[1] - traj.x_cells[0]
    A_nodes = np.concatenate([
        np.zeros((traj.v.shape[0], 1)),
        np.cumsum(0.5 * (traj.v[:, 1:] + traj.v[:, :-1]) * dx, axis=1)], axis=1)
    A_cells = 0.5 * (A_nodes[:, 1:] + A_nodes[:, :-1])
    g = traj.u - A_cells
    # shift the stored energy to be nonnegative over the visited range so
    # the velocity-potential bound sqrt(2 E) is valid for double wells
    probe = np.linspace(traj.u.min() - 0.5, traj.u.max() + 0.5, 257)
    w_min = min(float(np.min(law.energy(probe))), 0.0)
    e0 = traj.energy[0] - w_min
    a_bound = float(np.sqrt(2.0 * e0))
    a_max = float(np.max(np.abs(A_nodes)))
    sup_series = np.max(np.abs(traj.u), axis=1)
    report = DiagnosticsReport(
        energy=traj.energy, max_energy_increase=traj.max_energy_increase,
        sup_u=sup_series, A_max=a_max, A_bound=a_bound,
        A_bound_ok=bool(a_max <= a_bound + 1e-10), g=g,
        K_window=K_window,
        within_K_window=None if K_window is None
        else bool(np.max(sup_series) <= K_window))
    return report
