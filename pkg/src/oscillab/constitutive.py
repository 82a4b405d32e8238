"""Stress and pressure laws, including the matched non-monotone constructions.

A law is a scalar function sigma(u) (or p(rho)) assembled from monotone
branches with cubic-Hermite interpolation inside each branch and affine
extensions outside the tabulated domain.  The matched builders enforce one
of three two-phase compatibility identities on tau in [1, 2]:

    shear:     a + sigma(tau*a) == b + sigma(tau*b)
    gas:       sigma(tau*a) == sigma(tau*b)
    pressure:  p(a / tau**d) == p(b / tau**d)

Each identity pins the law on one branch interval from its values on the
other, which forces the assembled law to be non-monotone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "MatchSpec",
    "ConstitutiveLaw",
    "PressureLaw",
    "build_matched_shear_stress",
    "build_matched_gas_stress",
    "build_matched_pressure",
    "analytic_cubic_law",
    "matching_residual",
]

# slope floor for the affine tails, keeps sigma -> +-inf off the table
_MIN_TAIL_SLOPE = 1e-3
DEFAULT_KNOTS_PER_BRANCH = 64


@dataclass(frozen=True)
class MatchSpec:
    """Which matching identity a law satisfies, and on which states."""

    a: float
    b: float
    d: int | None = None  # spatial dimension, pressure laws only
    tau_lo: float = 1.0
    tau_hi: float = 2.0

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "d": self.d,
                "tau": [self.tau_lo, self.tau_hi]}

    @staticmethod
    def from_dict(data: dict) -> "MatchSpec":
        tau = data.get("tau", [1.0, 2.0])
        return MatchSpec(a=data["a"], b=data["b"], d=data.get("d"),
                         tau_lo=tau[0], tau_hi=tau[1])


def _smoothstep(s: np.ndarray) -> np.ndarray:
    return s * s * (3.0 - 2.0 * s)


class ConstitutiveLaw:
    """Piecewise-monotone scalar law with derivative and stored energy.

    The tabulated domain is split into branches at `breaks`; each branch is
    interpolated by a monotone piecewise cubic (PCHIP), so evaluation is C1
    inside branches with finite one-sided derivatives at the joints.  Outside
    the table the law continues as an affine function whose slope is the
    one-sided boundary derivative clamped away from zero.
    """

    def __init__(self, kind: str, branch_knots: Sequence[np.ndarray],
                 branch_values: Sequence[np.ndarray],
                 match_spec: MatchSpec | None = None):
        if kind not in ("stress-shear", "stress-gas", "pressure", "analytic-cubic"):
            raise ValueError(f"unknown law kind {kind!r}")
        self.kind = kind
        self.match_spec = match_spec
        self._segments: list[PchipInterpolator] = []
        self._breaks: np.ndarray

        xs, ys = [], []
        last = None
        for bx, by in zip(branch_knots, branch_values):
            bx = np.asarray(bx, dtype=float)
            by = np.asarray(by, dtype=float)
            if bx.size < 2 or np.any(np.diff(bx) <= 0):
                raise ValueError("branch knots must be strictly increasing")
            if last is not None and not np.isclose(bx[0], last, rtol=0, atol=1e-12):
                raise ValueError("branches must be contiguous")
            self._segments.append(PchipInterpolator(bx, by, extrapolate=False))
            xs.append(bx if last is None else bx[1:])
            ys.append(by if last is None else by[1:])
            last = bx[-1]
        self.knots = np.concatenate(xs)
        self.values = np.concatenate(ys)
        self._breaks = np.array([seg.x[0] for seg in self._segments]
                                + [self._segments[-1].x[-1]])

        d_lo = float(self._segments[0].derivative()(self._breaks[0]))
        d_hi = float(self._segments[-1].derivative()(self._breaks[-1]))
        self._lo_slope = max(d_lo, _MIN_TAIL_SLOPE)
        self._hi_slope = max(d_hi, _MIN_TAIL_SLOPE)

        # cumulative antiderivative offsets so that energy() is continuous
        self._anti = [seg.antiderivative() for seg in self._segments]
        offs = [0.0]
        for seg, anti in zip(self._segments[:-1], self._anti[:-1]):
            offs.append(offs[-1] + float(anti(seg.x[-1]) - anti(seg.x[0])))
        self._anti_offsets = np.array(offs)
        self._energy_shift = 0.0
        self._energy_shift = float(self._energy_raw(np.array([0.0]))[0])

    # -- evaluation ----------------------------------------------------

    def _segment_index(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._breaks, u, side="right") - 1
        return np.clip(idx, 0, len(self._segments) - 1)

    def _eval(self, u: np.ndarray, order: int) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "pressure" and np.any(u < 0):
            raise ValueError("pressure law evaluated at negative density")
        out = np.empty_like(u)
        lo, hi = self._breaks[0], self._breaks[-1]
        below = u < lo
        above = u > hi
        inside = ~(below | above)
        if order == 0:
            y_lo = self.values[0]
            y_hi = self.values[-1]
            out[below] = y_lo + self._lo_slope * (u[below] - lo)
            out[above] = y_hi + self._hi_slope * (u[above] - hi)
        elif order == 1:
            out[below] = self._lo_slope
            out[above] = self._hi_slope
        else:
            out[below] = 0.0
            out[above] = 0.0
        if np.any(inside):
            ui = u[inside]
            vals = np.empty_like(ui)
            idx = self._segment_index(ui)
            for k, seg in enumerate(self._segments):
                sel = idx == k
                if not np.any(sel):
                    continue
                f = seg if order == 0 else seg.derivative(order)
                vals[sel] = f(ui[sel])
            out[inside] = vals
        return out

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return float(self._eval(np.atleast_1d(u), 0)[0]) if u.ndim == 0 \
            else self._eval(u, 0)

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        return float(self._eval(np.atleast_1d(u), 1)[0]) if u.ndim == 0 \
            else self._eval(u, 1)

    def second_derivative(self, u):
        u = np.asarray(u, dtype=float)
        return float(self._eval(np.atleast_1d(u), 2)[0]) if u.ndim == 0 \
            else self._eval(u, 2)

    def _energy_raw(self, u: np.ndarray) -> np.ndarray:
        """Antiderivative of the law, zero at the left table edge."""
        out = np.empty_like(u)
        lo, hi = self._breaks[0], self._breaks[-1]
        y_lo, y_hi = self.values[0], self.values[-1]
        below = u < lo
        above = u > hi
        inside = ~(below | above)
        du = u[below] - lo
        out[below] = y_lo * du + 0.5 * self._lo_slope * du * du
        total = self._anti_offsets[-1] + float(
            self._anti[-1](hi) - self._anti[-1](self._segments[-1].x[0]))
        du = u[above] - hi
        out[above] = total + y_hi * du + 0.5 * self._hi_slope * du * du
        if np.any(inside):
            ui = u[inside]
            vals = np.empty_like(ui)
            idx = self._segment_index(ui)
            for k, (seg, anti) in enumerate(zip(self._segments, self._anti)):
                sel = idx == k
                if not np.any(sel):
                    continue
                vals[sel] = self._anti_offsets[k] + anti(ui[sel]) - anti(seg.x[0])
            out[inside] = vals
        return out

    def energy(self, u):
        """Stored energy W(u) = integral of the law from 0 to u, W(0) = 0."""
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        w = self._energy_raw(np.atleast_1d(u)) - self._energy_shift
        return float(w[0]) if scalar else w

    # -- diagnostics ----------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return float(self._breaks[0]), float(self._breaks[-1])

    def is_nonmonotone(self, samples: int = 512) -> bool:
        lo, hi = self.domain
        d = self.derivative(np.linspace(lo, hi, samples))
        return bool(d.min() < 0.0 < d.max())

    def growth_ratio(self, p: float, window: tuple[float, float],
                     samples: int = 512) -> float:
        """max |sigma(u)| / (1 + |u|**(p-1)) over the window."""
        u = np.linspace(window[0], window[1], samples)
        return float(np.max(np.abs(self(u)) / (1.0 + np.abs(u) ** (p - 1))))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "knots": self.knots.tolist(),
            "values": self.values.tolist(),
            "breaks": self._breaks.tolist(),
            "match_spec": None if self.match_spec is None else self.match_spec.to_dict(),
        }

    @staticmethod
    def from_dict(data: dict) -> "ConstitutiveLaw":
        if data["kind"] == "analytic-cubic":
            return analytic_cubic_law(float(data.get("shift", 0.0)))
        knots = np.asarray(data["knots"], dtype=float)
        values = np.asarray(data["values"], dtype=float)
        breaks = np.asarray(data.get("breaks", [knots[0], knots[-1]]), dtype=float)
        bx, by = [], []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            sel = (knots >= lo - 1e-12) & (knots <= hi + 1e-12)
            bx.append(knots[sel])
            by.append(values[sel])
        cls = PressureLaw if data["kind"] == "pressure" else ConstitutiveLaw
        match = None if data.get("match_spec") is None else MatchSpec.from_dict(data["match_spec"])
        if cls is PressureLaw:
            return PressureLaw(bx, by, match_spec=match)
        return ConstitutiveLaw(data["kind"], bx, by, match_spec=match)


class _AnalyticCubicLaw(ConstitutiveLaw):
    """sigma(xi) = xi**3 - xi + shift with exact derivatives and energy."""

    def __init__(self, shift: float):
        self.shift = float(shift)
        x = np.linspace(-3.0, 3.0, 241)
        super().__init__("analytic-cubic", [x], [x**3 - x + shift])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return u**3 - u + self.shift if u.ndim else float(u**3 - u + self.shift)

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        return 3.0 * u**2 - 1.0 if u.ndim else float(3.0 * u**2 - 1.0)

    def second_derivative(self, u):
        u = np.asarray(u, dtype=float)
        return 6.0 * u if u.ndim else float(6.0 * u)

    def energy(self, u):
        u = np.asarray(u, dtype=float)
        w = u**4 / 4.0 - u**2 / 2.0 + self.shift * u
        return w if u.ndim else float(w)

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["shift"] = self.shift
        return data


class PressureLaw(ConstitutiveLaw):
    """Pressure p(rho) on rho >= 0 with p(0) = 0 and barotropic internal energy."""

    def __init__(self, branch_knots, branch_values,
                 match_spec: MatchSpec | None = None, rho_ref: float | None = None):
        super().__init__("pressure", branch_knots, branch_values, match_spec)
        if abs(self(0.0)) > 1e-12:
            raise ValueError("pressure law must satisfy p(0) = 0")
        self.d = None if match_spec is None else match_spec.d
        lo = self.domain[0]
        self._rho_ref = rho_ref if rho_ref is not None else max(lo, 1e-8) + 1e-8

    def internal_energy(self, rho, samples: int = 2049):
        """h(rho) = integral of p(s)/s**2 from the reference density."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.empty_like(rho)
        for i, r in enumerate(rho):
            if r <= 0:
                raise ValueError("internal energy needs rho > 0")
            s = np.linspace(self._rho_ref, r, samples)
            out[i] = np.trapezoid(self(s) / s**2, s)
        return out if out.size > 1 else float(out[0])


def _sample_branch(fn: Callable, lo: float, hi: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(lo, hi, k)
    y = np.asarray(fn(x), dtype=float)
    if np.any(np.diff(y) <= 0):
        raise ValueError("branch must be strictly increasing on its interval")
    return x, y


def _middle_fill(x_lo: float, y_lo: float, x_hi: float, y_hi: float,
                 k: int) -> tuple[np.ndarray, np.ndarray]:
    # strictly decreasing smooth transition; joint slopes stay one-sided
    if y_lo <= y_hi:
        raise ValueError("middle branch would not be decreasing")
    x = np.linspace(x_lo, x_hi, k)
    s = (x - x_lo) / (x_hi - x_lo)
    y = y_lo + (y_hi - y_lo) * _smoothstep(s)
    return x, y


def build_matched_shear_stress(a: float, b: float, right_branch: Callable,
                               knots_per_branch: int = DEFAULT_KNOTS_PER_BRANCH,
                               ) -> ConstitutiveLaw:
    """Assemble sigma with a + sigma(tau*a) = b + sigma(tau*b) on tau in [1,2].

    `right_branch` prescribes sigma on [b, 2b] and must be strictly
    increasing there; the identity then determines sigma on [a, 2a], and a
    decreasing fill joins the two branches across (2a, b).
    """
    if not (0 < a < 2 * a < b):
        raise ValueError("states must satisfy 0 < a < 2a < b")
    k = knots_per_branch
    xr, yr = _sample_branch(right_branch, b, 2 * b, k)
    xl = np.linspace(a, 2 * a, k)
    yl = (b - a) + np.asarray(right_branch(xl * (b / a)), dtype=float)
    xm, ym = _middle_fill(2 * a, yl[-1], b, yr[0], k)
    law = ConstitutiveLaw("stress-shear", [xl, xm, xr], [yl, ym, yr],
                          match_spec=MatchSpec(a=a, b=b))
    return law


def build_matched_gas_stress(a: float, b: float, right_branch: Callable,
                             knots_per_branch: int = DEFAULT_KNOTS_PER_BRANCH,
                             ) -> ConstitutiveLaw:
    """Assemble sigma with sigma(tau*a) = sigma(tau*b) on tau in [1,2]."""
    if not (0 < a < 2 * a < b):
        raise ValueError("states must satisfy 0 < a < 2a < b")
    k = knots_per_branch
    xr, yr = _sample_branch(right_branch, b, 2 * b, k)
    xl = np.linspace(a, 2 * a, k)
    yl = np.asarray(right_branch(xl * (b / a)), dtype=float)
    xm, ym = _middle_fill(2 * a, yl[-1], b, yr[0], k)
    return ConstitutiveLaw("stress-gas", [xl, xm, xr], [yl, ym, yr],
                           match_spec=MatchSpec(a=a, b=b))


def build_matched_pressure(a: float, b: float, d: int, branch: Callable,
                           knots_per_branch: int = DEFAULT_KNOTS_PER_BRANCH,
                           ) -> PressureLaw:
    """Assemble p with p(a/t**d) = p(b/t**d) on t in [1,2] and p(0) = 0.

    `branch` prescribes p on [b/2**d, b] (strictly increasing); the identity
    determines p on [a/2**d, a].  Below a/2**d the law rises monotonically
    from p(0)=0, and a decreasing fill bridges (a, b/2**d).
    """
    scale = 2.0 ** d
    if not (0 < a / scale < a < b / scale < b):
        raise ValueError("states must satisfy 0 < a/2^d < a < b/2^d < b")
    k = knots_per_branch
    xr, yr = _sample_branch(branch, b / scale, b, k)
    xl = np.linspace(a / scale, a, k)
    yl = np.asarray(branch(xl * (b / a)), dtype=float)
    if np.any(yl <= 0):
        raise ValueError("matched branch values must be positive for p(0) = 0")
    # monotone rise from vacuum
    x0 = np.linspace(0.0, a / scale, k)
    y0 = yl[0] * _smoothstep(x0 / (a / scale))
    xm, ym = _middle_fill(a, yl[-1], b / scale, yr[0], k)
    return PressureLaw([x0, xl, xm, xr], [y0, yl, ym, yr],
                       match_spec=MatchSpec(a=a, b=b, d=d))


def analytic_cubic_law(shift: float = 0.0) -> ConstitutiveLaw:
    """Canonical non-monotone cubic sigma(xi) = xi**3 - xi + shift."""
    return _AnalyticCubicLaw(shift)


def matching_residual(law: ConstitutiveLaw, kind: str | None = None,
                      a: float | None = None, b: float | None = None,
                      d: int | None = None, grid_size: int = 1001) -> float:
    """Max defect of the relevant matching identity over a tau-grid."""
    spec = law.match_spec
    kind = kind or law.kind
    if a is None or b is None:
        if spec is None:
            raise ValueError("law carries no match_spec; pass a and b")
        a, b = spec.a, spec.b
        if d is None:
            d = spec.d
    lo, hi = (1.0, 2.0) if spec is None else (spec.tau_lo, spec.tau_hi)
    tau = np.linspace(lo, hi, grid_size)
    if kind == "stress-shear":
        res = (a + law(tau * a)) - (b + law(tau * b))
    elif kind == "stress-gas":
        res = law(tau * a) - law(tau * b)
    elif kind == "pressure":
        if d is None:
            raise ValueError("pressure matching needs the dimension d")
        res = law(a / tau**d) - law(b / tau**d)
    else:
        raise ValueError(f"no matching identity for kind {kind!r}")
    return float(np.max(np.abs(res)))
