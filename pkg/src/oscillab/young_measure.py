"""Distribution functions of Young measures extracted from fine-scale fields.

The oscillation statistics of a sequence u^eps are carried by the field
F(t, x, xi): the local fraction of states below level xi, a CDF in xi at
every (t, x).  Weak limits of nonlinear functions are recovered from F by
the moment formula, and fields are compared in the L1(xi) (Wasserstein-1)
metric.  The right-continuous convention F(xi) = measure((-inf, xi]) is
used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "KineticField",
    "empirical_cdf_field",
    "two_point_cdf",
    "moment",
    "moment_slice",
    "cdf_distance",
    "default_xi_grid",
]


@dataclass
class KineticField:
    """F(t, x, xi) on a tensor grid; a monotone-in-xi CDF at each (t, x)."""

    times: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    F: np.ndarray             # (nt, nx, nxi)
    provenance: str = "synthetic"
    window_clipped: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.xi = np.asarray(self.xi, dtype=float)
        self.F = np.asarray(self.F, dtype=float)
        if self.F.shape != (len(self.times), len(self.x), len(self.xi)):
            raise ValueError("F shape does not match grids")

    def validate(self) -> None:
        """CDF invariants: bounds, xi-monotonicity, pinned endpoints."""
        F = self.F
        if np.any(F < 0.0) or np.any(F > 1.0):
            raise ValueError("F out of [0, 1]")
        if np.any(np.diff(F, axis=-1) < 0.0):
            raise ValueError("F not nondecreasing in xi")
        if np.any(F[..., 0] != 0.0) or np.any(F[..., -1] != 1.0):
            raise ValueError("support not contained in the xi grid")

    def slice_at(self, it: int, ix: int) -> np.ndarray:
        return self.F[it, ix]

    @staticmethod
    def from_slice(Fxi: np.ndarray, xi: np.ndarray, times=None, x=None,
                   provenance: str = "synthetic") -> "KineticField":
        times = np.array([0.0]) if times is None else np.asarray(times, float)
        x = np.array([0.0]) if x is None else np.asarray(x, float)
        F = np.broadcast_to(np.asarray(Fxi, float),
                            (len(times), len(x), len(xi))).copy()
        return KineticField(times, x, xi, F, provenance=provenance)


def default_xi_grid(values: np.ndarray, n_xi: int = 512,
                    margin: float = 0.1) -> np.ndarray:
    """Uniform xi grid spanning the data range widened by the margin."""
    lo, hi = float(np.min(values)), float(np.max(values))
    span = max(hi - lo, 1e-12)
    return np.linspace(lo - margin * span, hi + margin * span, n_xi)


def snap_cdf(F: np.ndarray) -> np.ndarray:
    """Remove floating-point dust: clip to [0,1] and restore monotonicity."""
    F = np.clip(F, 0.0, 1.0)
    return np.maximum.accumulate(F, axis=-1)


def empirical_cdf_field(u: np.ndarray, x: np.ndarray, times: np.ndarray,
                        w: float, xi: np.ndarray,
                        x_out: np.ndarray | None = None,
                        periodic: bool = False) -> KineticField:
    """Windowed empirical CDF of a sampled field u(t, x).

    F(t, x0, xi) is the fraction of cells within |x - x0| <= w whose value
    is <= xi.  The window should cover at least one oscillation wavelength.
    Windows reaching past a non-periodic boundary are clipped and flagged.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    x_out = x if x_out is None else np.asarray(x_out, dtype=float)
    nt = u.shape[0]
    F = np.empty((nt, len(x_out), len(xi)))
    clipped = False
    L = x[-1] - x[0] + (x[1] - x[0])
    for j, x0 in enumerate(x_out):
        if periodic:
            dist = np.abs((x - x0 + L / 2) % L - L / 2)
            sel = dist <= w
        else:
            sel = np.abs(x - x0) <= w
            if x0 - w < x[0] or x0 + w > x[-1]:
                clipped = True
        idx = np.flatnonzero(sel)
        m = len(idx)
        if m == 0:
            raise ValueError("empty window; widen w or refine the grid")
        for it in range(nt):
            vals = np.sort(u[it, idx])
            F[it, j] = np.searchsorted(vals, xi, side="right") / m
    out = KineticField(times, x_out, xi, snap_cdf(F),
                       provenance=f"empirical window w={w:g}",
                       window_clipped=clipped)
    out.validate()
    return out


def two_point_cdf(theta: float, a: float, b: float, xi: np.ndarray) -> np.ndarray:
    """CDF of theta * delta_a + (1 - theta) * delta_b on the xi grid."""
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    if a > b or a <= xi[0] or b >= xi[-1]:
        raise ValueError("atoms must satisfy a <= b strictly inside the grid")
    F = np.where(xi < a, 0.0, np.where(xi < b, theta, 1.0))
    if theta == 1.0:
        F = np.where(xi < a, 0.0, 1.0)
    return F


def moment_slice(F: np.ndarray, xi: np.ndarray, f: Callable,
                 fprime: Callable, form: str = "anchored") -> np.ndarray:
    """Weak limit of f(u) from a CDF slice by the moment formula.

    anchored form:  f(xi_min) + int f'(xi) (1 - F) dxi
    zero form:      f(0) - int_{xi<0} f' F + int_{xi>0} f' (1 - F)

    Both agree analytically when the support is inside the grid.  The zero
    form falls back to the anchored one when 0 lies outside the grid.
    """
    F = np.asarray(F, dtype=float)
    fp = np.asarray(fprime(xi), dtype=float)
    if form == "anchored" or not xi[0] < 0.0 < xi[-1]:
        return np.asarray(f(xi[0])) + np.trapezoid(fp * (1.0 - F), xi, axis=-1)
    if form != "zero":
        raise ValueError("form must be 'anchored' or 'zero'")
    if 0.0 in xi:
        k = int(np.searchsorted(xi, 0.0))
        xin, xip = xi[:k + 1], xi[k:]
        Fn, Fp = F[..., :k + 1], F[..., k:]
        fpn, fpp = fp[:k + 1], fp[k:]
    else:
        k = int(np.searchsorted(xi, 0.0))
        F0 = F[..., k - 1] + (F[..., k] - F[..., k - 1]) * (0.0 - xi[k - 1]) / (xi[k] - xi[k - 1])
        xin = np.append(xi[:k], 0.0)
        xip = np.insert(xi[k:], 0, 0.0)
        Fn = np.concatenate([F[..., :k], F0[..., None]], axis=-1)
        Fp = np.concatenate([F0[..., None], F[..., k:]], axis=-1)
        fpn = np.append(fp[:k], np.asarray(fprime(0.0)))
        fpp = np.insert(fp[k:], 0, np.asarray(fprime(0.0)))
    return (np.asarray(f(0.0))
            - np.trapezoid(fpn * Fn, xin, axis=-1)
            + np.trapezoid(fpp * (1.0 - Fp), xip, axis=-1))


def moment(field: KineticField, f: Callable, fprime: Callable,
           form: str = "anchored") -> np.ndarray:
    """Moment field of shape (nt, nx); see moment_slice."""
    return moment_slice(field.F, field.xi, f, fprime, form=form)


def cdf_distance(f1: KineticField | np.ndarray, f2: KineticField | np.ndarray,
                 xi: np.ndarray | None = None) -> np.ndarray:
    """Wasserstein-1 style distance int |F1 - F2| dxi, per (t, x)."""
    if isinstance(f1, KineticField):
        if not isinstance(f2, KineticField):
            raise ValueError("compare two KineticFields or two arrays")
        if f1.F.shape != f2.F.shape or not np.allclose(f1.xi, f2.xi):
            raise ValueError("kinetic fields live on different grids")
        return np.trapezoid(np.abs(f1.F - f2.F), f1.xi, axis=-1)
    if xi is None:
        raise ValueError("xi grid required for raw arrays")
    a1, a2 = np.asarray(f1, float), np.asarray(f2, float)
    if a1.shape != a2.shape:
        raise ValueError("shape mismatch")
    return np.trapezoid(np.abs(a1 - a2), xi, axis=-1)
