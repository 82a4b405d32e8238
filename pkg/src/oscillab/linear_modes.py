"""Oscillatory modes of the linear viscoelastic and thermoviscoelastic systems.

Covers the single-equation amplitude ODE (quadratic characteristic roots with
a cancellation-safe branch), the thermomechanical 3x3 amplitude system (cubic
roots via the companion matrix), the acoustic tensor eigenproblem with a
sampled rank-one-convexity certificate, and exact amplitude histories used to
validate decay-rate predictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinearParams",
    "ElasticTensorSet",
    "AmplitudeRoots",
    "ModeSolution",
    "amplitude_roots_1d",
    "thermo_roots",
    "thermo_amplitude_matrix",
    "acoustic_spectrum",
    "mode_field",
    "mode_field_multid",
    "fit_decay_rate",
    "isotropic_elasticity",
    "icosphere_directions",
]


@dataclass(frozen=True)
class LinearParams:
    """Parameters of the 1-d thermoviscoelastic system."""

    lam: float          # elastic modulus > 0
    mu: float           # viscosity > 0
    m: float = 0.0      # thermoelastic coupling
    kappa: float = 0.0  # heat diffusivity >= 0
    n: int = 1          # integer frequency >= 1

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0 or self.kappa < 0 or self.n < 1:
            raise ValueError("need lam > 0, mu > 0, kappa >= 0, n >= 1")


@dataclass(frozen=True)
class AmplitudeRoots:
    rho_plus: complex   # slow root
    rho_minus: complex  # fast root
    is_real: bool
    asymptotic: float   # -lam/mu - lam^2/(mu^3 n^2)


def amplitude_roots_1d(lam: float, mu: float, n: float) -> AmplitudeRoots:
    """Roots of rho^2 + mu n^2 rho + lam n^2 = 0.

    The large root is computed from the stable branch of the quadratic
    formula and the small root from the product lam n^2, which avoids the
    catastrophic cancellation the small root suffers for large n.
    """
    if mu <= 0 or n <= 0 or lam < 0:
        raise ValueError("need mu > 0, n > 0, lam >= 0")
    asym = -lam / mu - lam**2 / (mu**3 * n**2)
    if lam == 0.0:
        return AmplitudeRoots(0.0, -mu * n**2, True, 0.0)
    disc = (mu * n**2) ** 2 - 4.0 * lam * n**2
    if disc < 0:
        root = (-mu * n**2 + 1j * np.sqrt(-disc)) / 2.0
        return AmplitudeRoots(root, np.conj(root), False, asym)
    rho_minus = -(mu * n**2 + np.sqrt(disc)) / 2.0
    rho_plus = lam * n**2 / rho_minus
    return AmplitudeRoots(rho_plus, rho_minus, True, asym)


def thermo_coefficients(p: LinearParams) -> np.ndarray:
    """Coefficients of the amplitude cubic, leading coefficient first."""
    n2 = float(p.n) ** 2
    return np.array([
        1.0,
        (p.kappa + p.mu) * n2,
        p.kappa * p.mu * n2 * n2 + p.lam * n2 + p.m**2 * n2,
        p.kappa * p.lam * n2 * n2,
    ])


def thermo_roots(p: LinearParams) -> np.ndarray:
    """Three roots of the amplitude cubic, sorted by real part descending.

    Computed as companion-matrix eigenvalues; conjugate pairs come back
    as exact conjugates.
    """
    roots = np.roots(thermo_coefficients(p))
    order = np.argsort(-roots.real)
    return roots[order]


def thermo_amplitude_matrix(p: LinearParams) -> np.ndarray:
    """System matrix for d/dt (a, a', b)."""
    n2 = float(p.n) ** 2
    return np.array([
        [0.0, 1.0, 0.0],
        [-p.lam * n2, -p.mu * n2, p.m * n2],
        [0.0, -p.m, -p.kappa * n2],
    ])


# -- acoustic tensor --------------------------------------------------------


def isotropic_elasticity(lam_lame: float, mu_lame: float, d: int) -> np.ndarray:
    """A[k,l,alpha,beta] for isotropic elasticity with Lame moduli.

    The full index symmetries required here hold only for lam_lame == mu_lame;
    the builder does not check, acoustic_spectrum will.
    """
    I = np.eye(d)
    A = (lam_lame * np.einsum("ka,lb->klab", I, I)
         + mu_lame * (np.einsum("kl,ab->klab", I, I)
                      + np.einsum("kb,la->klab", I, I)))
    return A


def icosphere_directions(subdivisions: int = 2) -> np.ndarray:
    """Unit directions from a subdivided icosahedron (162 at 2 levels)."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = []
    for s1 in (-1.0, 1.0):
        for s2 in (-phi, phi):
            verts += [(0.0, s1, s2), (s1, s2, 0.0), (s2, 0.0, s1)]
    verts = [np.array(v) / np.linalg.norm(v) for v in verts]
    faces = []
    for i in range(12):
        for j in range(i + 1, 12):
            for k in range(j + 1, 12):
                dij = np.linalg.norm(verts[i] - verts[j])
                djk = np.linalg.norm(verts[j] - verts[k])
                dik = np.linalg.norm(verts[i] - verts[k])
                if max(dij, djk, dik) < 1.2:
                    faces.append((i, j, k))
    points = {tuple(np.round(v, 12)) for v in verts}
    tris = [(verts[i], verts[j], verts[k]) for i, j, k in faces]
    for _ in range(subdivisions):
        new_tris = []
        for a, b, c in tris:
            ab = (a + b) / np.linalg.norm(a + b)
            bc = (b + c) / np.linalg.norm(b + c)
            ca = (c + a) / np.linalg.norm(c + a)
            for v in (ab, bc, ca):
                points.add(tuple(np.round(v, 12)))
            new_tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        tris = new_tris
    return np.array(sorted(points))


@dataclass
class ElasticTensorSet:
    """Elasticity tensor, coupling tensor, and a propagation direction."""

    A: np.ndarray          # (d, d, d, d)
    M: np.ndarray          # (d, d)
    nu: np.ndarray         # unit direction (d,)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.M = np.asarray(self.M, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float)
        if abs(np.linalg.norm(self.nu) - 1.0) > 1e-12:
            raise ValueError("nu must be a unit vector")

    @property
    def d(self) -> int:
        return self.A.shape[0]

    def check_symmetries(self, tol: float = 1e-12) -> None:
        err = max(np.max(np.abs(self.A - self.A.transpose(1, 0, 2, 3))),
                  np.max(np.abs(self.A - self.A.transpose(0, 1, 3, 2))))
        if err > tol * max(1.0, np.max(np.abs(self.A))):
            raise ValueError(f"elasticity tensor violates index symmetries (defect {err:.2e})")

    def acoustic_tensor(self, nu: np.ndarray | None = None) -> np.ndarray:
        nu = self.nu if nu is None else nu
        return np.einsum("klab,a,b->kl", self.A, nu, nu)

    def modified_acoustic_tensor(self) -> np.ndarray:
        mn = self.M @ self.nu
        return self.acoustic_tensor() + np.outer(mn, mn)


@dataclass
class AcousticSpectrum:
    eigenvalues: np.ndarray        # ascending
    eigenvectors: np.ndarray       # columns, unit norm
    rank_one_convex: bool
    min_directional_eigenvalue: float
    directions_sampled: int
    coupling: list                 # per eigenpair: m_r or None on (H3) failure
    modified_eigenvalues: np.ndarray
    modified_eigenvectors: np.ndarray


def acoustic_spectrum(t: ElasticTensorSet, angular_tol: float = 1e-8,
                      ) -> AcousticSpectrum:
    """Eigenpairs of the acoustic tensor plus convexity and coupling checks.

    Rank-one convexity is certified by sampling directions (icosphere in 3-d,
    a uniform circle in 2-d) and checking the minimum acoustic eigenvalue;
    a sampled certificate, not a proof.
    """
    t.check_symmetries()
    Q = t.acoustic_tensor()
    lam, xi = np.linalg.eigh(Q)

    if t.d == 2:
        ang = np.linspace(0.0, np.pi, 256, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif t.d == 3:
        dirs = icosphere_directions(2)
    else:
        raise ValueError("only d = 2 or 3 supported")
    min_eig = np.inf
    for nu in dirs:
        w = np.linalg.eigvalsh(t.acoustic_tensor(nu))
        min_eig = min(min_eig, w[0])

    mn = t.M @ t.nu
    coupling = []
    for r in range(t.d):
        m_r = float(xi[:, r] @ mn)
        defect = np.linalg.norm(mn - m_r * xi[:, r])
        scale = max(np.linalg.norm(mn), 1e-300)
        coupling.append(m_r if defect <= angular_tol * scale else None)

    sig, zeta = np.linalg.eigh(t.modified_acoustic_tensor())
    return AcousticSpectrum(
        eigenvalues=lam, eigenvectors=xi,
        rank_one_convex=bool(min_eig > 0.0),
        min_directional_eigenvalue=float(min_eig),
        directions_sampled=len(dirs),
        coupling=coupling,
        modified_eigenvalues=sig, modified_eigenvectors=zeta,
    )


# -- exact mode solutions ---------------------------------------------------


@dataclass
class ModeSolution:
    t: np.ndarray
    x: np.ndarray
    a: np.ndarray            # amplitude histories (complex)
    v: np.ndarray
    b: np.ndarray
    u: np.ndarray            # fields (nt, nx) complex: u, du/dt, theta
    ut: np.ndarray
    theta: np.ndarray
    n: int
    params: LinearParams
    roots: np.ndarray = field(default=None)

    def strain(self) -> np.ndarray:
        """du/dx on the grid, exact for the separable ansatz."""
        return 1j * self.a[:, None] * np.exp(1j * self.n * self.x[None, :])


def _propagate(A: np.ndarray, y0: np.ndarray, t: np.ndarray) -> np.ndarray:
    """exp(A t) y0 for all t via the eigendecomposition of A (exact)."""
    w, P = np.linalg.eig(A)
    c = np.linalg.solve(P, y0.astype(complex))
    return (P @ (np.exp(np.outer(w, t)) * c[:, None])).T  # (nt, dim)


def slow_mode_ic(A: np.ndarray) -> np.ndarray:
    """Eigenvector of the slowest-decaying mechanical eigenvalue.

    Modes with no displacement content (zero first component, e.g. the
    decoupled temperature mode at m = 0) are skipped; the result is
    normalized to unit displacement amplitude.
    """
    w, P = np.linalg.eig(A)
    order = np.argsort(-w.real)
    for k in order:
        if abs(P[0, k]) > 1e-9 * np.linalg.norm(P[:, k]):
            return P[:, k] / P[0, k]
    raise ValueError("no mechanical mode found")


def mode_field(p: LinearParams, t_grid: np.ndarray, x_grid: np.ndarray,
               ic: np.ndarray | str = "slow") -> ModeSolution:
    """Exact oscillatory solution (1/n) a(t) e^{inx} of the 1-d system.

    `ic` selects the amplitude initial condition: the slow eigenvector, or an
    explicit (a0, v0, b0) triple.
    """
    A = thermo_amplitude_matrix(p)
    y0 = slow_mode_ic(A) if isinstance(ic, str) else np.asarray(ic, dtype=complex)
    hist = _propagate(A, y0, np.asarray(t_grid, dtype=float))
    a, v, b = hist[:, 0], hist[:, 1], hist[:, 2]
    phase = np.exp(1j * p.n * np.asarray(x_grid, dtype=float))
    u = (a / p.n)[:, None] * phase[None, :]
    ut = (v / p.n)[:, None] * phase[None, :]
    theta = (-1j * b)[:, None] * phase[None, :]
    return ModeSolution(t=np.asarray(t_grid, float), x=np.asarray(x_grid, float),
                        a=a, v=v, b=b, u=u, ut=ut, theta=theta, n=p.n, params=p,
                        roots=thermo_roots(p))


def mode_field_multid(t: ElasticTensorSet, r: int, mu: float, kappa: float,
                      n: int, t_grid: np.ndarray, s_grid: np.ndarray,
                      ic: np.ndarray | str = "slow") -> tuple[ModeSolution, np.ndarray]:
    """Mode along eigenvector r of the acoustic tensor; (H3) must hold for r.

    Fields are functions of the coordinate s = nu . x; returns the scalar
    mode solution for (alpha, b) plus the unit polarization vector.
    """
    spec = acoustic_spectrum(t)
    m_r = spec.coupling[r]
    if m_r is None:
        raise ValueError(f"(H3) fails for eigenpair {r}: M nu is not parallel to xi^{r}")
    lam_r = float(spec.eigenvalues[r])
    p = LinearParams(lam=lam_r, mu=mu, m=m_r, kappa=kappa, n=n)
    sol = mode_field(p, t_grid, s_grid, ic=ic)
    return sol, spec.eigenvectors[:, r]


def pde_residual_1d(sol: ModeSolution) -> float:
    """Finite-difference residual of the thermoviscoelastic system.

    Second-order central differences on the interior of the grid; for an
    exact mode the result decreases as O(dt^2 + dx^2) relative to the
    largest term in the balance.
    """
    p = sol.params
    t, x = sol.t, sol.x
    dt, dx = t[1] - t[0], x[1] - x[0]

    def d_t(f):
        return np.gradient(f, dt, axis=0, edge_order=2)

    def d_x(f):
        return np.gradient(f, dx, axis=1, edge_order=2)

    u, theta = sol.u, sol.theta
    utt = d_t(d_t(u))
    elastic = p.lam * d_x(d_x(u))
    viscous = p.mu * d_x(d_x(d_t(u)))
    r1 = utt - elastic - p.m * d_x(theta) - viscous
    r2 = d_t(theta) - p.kappa * d_x(d_x(theta)) - p.m * d_x(d_t(u))
    # one-sided stencils pollute the frame; measure on the interior
    core = (slice(2, -2), slice(2, -2))
    scale = max(np.max(np.abs(elastic[core])), np.max(np.abs(viscous[core])),
                np.max(np.abs(d_t(theta)[core])), 1e-300)
    return float(max(np.max(np.abs(r1[core])), np.max(np.abs(r2[core]))) / scale)


def fit_decay_rate(t: np.ndarray, amplitude: np.ndarray,
                   skip_fraction: float = 0.1) -> float:
    """Least-squares slope of log|amplitude|, skipping the initial transient."""
    t = np.asarray(t, dtype=float)
    amp = np.abs(np.asarray(amplitude))
    k = int(len(t) * skip_fraction)
    sl = slice(k, None)
    coef = np.polyfit(t[sl], np.log(amp[sl]), 1)
    return float(coef[0])
