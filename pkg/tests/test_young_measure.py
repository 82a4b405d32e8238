from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscillab.young_measure import (KineticField, cdf_distance,
                                    default_xi_grid, empirical_cdf_field,
                                    moment_slice, two_point_cdf)


def _id(z):
    return np.asarray(z, dtype=float)


def _one(z):
    return np.ones_like(np.asarray(z, dtype=float))


def _zero(z):
    return np.zeros_like(np.asarray(z, dtype=float))


class TestEmpiricalCdf:
    def test_constant_field_is_step(self):
        x = np.linspace(0, 1, 64, endpoint=False)
        u = np.full((1, 64), 0.7)
        xi = np.linspace(0.0, 1.4, 141)
        fld = empirical_cdf_field(u, x, np.array([0.0]), w=0.2, xi=xi,
                                  periodic=True)
        i = np.searchsorted(xi, 0.7)
        assert np.all(fld.F[0, :, :i] == 0.0)
        assert np.all(fld.F[0, :, i:] == 1.0)

    def test_two_phase_fraction(self):
        n, theta = 20, 0.3
        x = (np.arange(3200) + 0.5) / 3200   # cell centers avoid fp edges
        u = np.where((x * n) % 1.0 < theta, 1.0, 2.0)[None, :]
        xi = np.linspace(0.5, 2.5, 201)
        fld = empirical_cdf_field(u, x, np.array([0.0]), w=10.0 / n, xi=xi,
                                  x_out=np.array([0.5]), periodic=True)
        cells = int(2 * (10.0 / n) * 3200)
        assert fld.F[0, 0, np.searchsorted(xi, 1.5)] == \
            pytest.approx(theta, abs=1.0 / cells + 1e-12)

    def test_alternating_signs_half(self):
        x = (np.arange(256) + 0.5) / 256    # even cell count in the window
        u = np.where((x * 8) % 1.0 < 0.5, -1.0, 1.0)[None, :]
        xi = np.linspace(-1.5, 1.5, 301)
        fld = empirical_cdf_field(u, x, np.array([0.0]), w=0.25, xi=xi,
                                  x_out=np.array([0.5]), periodic=True)
        assert fld.F[0, 0, np.searchsorted(xi, 0.0)] == 0.5

    def test_clipped_window_flagged(self):
        x = np.linspace(0, 1, 64, endpoint=False)
        u = np.ones((1, 64))
        xi = np.linspace(0.0, 2.0, 65)
        fld = empirical_cdf_field(u, x, np.array([0.0]), w=0.3, xi=xi,
                                  x_out=np.array([0.05]))
        assert fld.window_clipped

    def test_invariants_validated(self):
        x = np.linspace(0, 1, 128, endpoint=False)
        rng = np.random.default_rng(7)
        u = rng.uniform(0.5, 2.0, size=(3, 128))
        xi = default_xi_grid(u, 129)
        fld = empirical_cdf_field(u, x, np.arange(3.0), w=0.1, xi=xi,
                                  periodic=True)
        fld.validate()


class TestTwoPointCdf:
    def test_value_between_atoms(self):
        xi = np.linspace(0.0, 3.0, 301)
        F = two_point_cdf(0.3, 1.0, 2.0, xi)
        assert F[np.searchsorted(xi, 1.5)] == 0.3

    def test_theta_one_single_step(self):
        xi = np.linspace(0.0, 3.0, 301)
        F = two_point_cdf(1.0, 1.0, 2.0, xi)
        i = np.searchsorted(xi, 1.0)
        assert np.all(F[:i] == 0.0) and np.all(F[i:] == 1.0)

    def test_moment_recovers_mean(self):
        xi = np.linspace(0.0, 3.0, 1201)
        F = two_point_cdf(0.3, 1.0, 2.0, xi)
        m = moment_slice(F, xi, _id, _one)
        assert m == pytest.approx(0.3 * 1.0 + 0.7 * 2.0, abs=3e-3)


class TestMoment:
    def test_step_identity(self):
        xi = np.linspace(-1.0, 2.0, 601)
        F = np.where(xi < 0.7, 0.0, 1.0)
        assert moment_slice(F, xi, _id, _one) == pytest.approx(0.7, abs=3e-3)

    def test_two_point_identity(self):
        xi = np.linspace(-0.5, 3.0, 701)
        F = two_point_cdf(0.5, 1.0, 2.0, xi)
        assert moment_slice(F, xi, _id, _one) == pytest.approx(1.5, abs=3e-3)

    def test_two_point_cubic(self, cubic_law):
        xi = np.linspace(-0.5, 3.0, 1401)
        F = two_point_cdf(0.5, 1.0, 2.0, xi)
        m = moment_slice(F, xi, cubic_law, cubic_law.derivative)
        assert m == pytest.approx(0.5 * 0.0 + 0.5 * 6.0, abs=2e-2)

    def test_normalization(self):
        xi = np.linspace(-0.5, 3.0, 701)
        F = two_point_cdf(0.25, 1.0, 2.0, xi)
        assert moment_slice(F, xi, lambda _: 1.0, _zero) == 1.0

    def test_two_forms_agree(self):
        # quadratic integrand is integrated exactly by the trapezoid rule,
        # so the zero-anchored and min-anchored forms agree to round-off
        xi = np.linspace(-1.0, 3.0, 801)   # contains 0 as a node
        assert 0.0 in xi
        F = two_point_cdf(0.4, 0.5, 2.0, xi)
        f = lambda z: np.asarray(z, float) ** 2
        fp = lambda z: 2.0 * np.asarray(z, float)
        a = moment_slice(F, xi, f, fp, form="anchored")
        z = moment_slice(F, xi, f, fp, form="zero")
        assert abs(a - z) <= 1e-10


class TestCdfDistance:
    def test_identical_zero(self):
        xi = np.linspace(0.0, 3.0, 301)
        F = two_point_cdf(0.5, 1.0, 2.0, xi)
        assert cdf_distance(F[None, None], F[None, None], xi=xi)[0, 0] == 0.0

    def test_two_steps(self):
        xi = np.linspace(0.0, 3.0, 3001)
        F1 = np.where(xi < 1.0, 0.0, 1.0)
        F2 = np.where(xi < 1.4, 0.0, 1.0)
        d = cdf_distance(F1[None, None], F2[None, None], xi=xi)[0, 0]
        assert d == pytest.approx(0.4, abs=2 * (xi[1] - xi[0]))

    def test_two_point_vs_midpoint_step(self):
        xi = np.linspace(0.0, 3.0, 3001)
        F1 = two_point_cdf(0.5, 1.0, 2.0, xi)
        F2 = np.where(xi < 1.5, 0.0, 1.0)
        d = cdf_distance(F1[None, None], F2[None, None], xi=xi)[0, 0]
        assert d == pytest.approx(0.5, abs=2e-3)

    def test_grid_mismatch_raises(self):
        xi1 = np.linspace(0, 3, 100)
        xi2 = np.linspace(0, 3, 101)
        f1 = KineticField(np.array([0.0]), np.array([0.0]), xi1,
                          two_point_cdf(0.5, 1.0, 2.0, xi1)[None, None])
        f2 = KineticField(np.array([0.0]), np.array([0.0]), xi2,
                          two_point_cdf(0.5, 1.0, 2.0, xi2)[None, None])
        with pytest.raises(ValueError):
            cdf_distance(f1, f2)


class TestInvariantValidation:
    def test_bounds_violation_caught(self):
        xi = np.linspace(0, 1, 11)
        F = np.linspace(0, 1.2, 11)[None, None]
        with pytest.raises(ValueError):
            KineticField(np.array([0.0]), np.array([0.0]), xi, F).validate()

    def test_monotonicity_violation_caught(self):
        xi = np.linspace(0, 1, 11)
        F = np.linspace(0, 1, 11)[None, None].copy()
        F[0, 0, 5] = 0.2
        with pytest.raises(ValueError):
            KineticField(np.array([0.0]), np.array([0.0]), xi, F).validate()

    def test_endpoint_violation_caught(self):
        xi = np.linspace(0, 1, 11)
        F = np.linspace(0.1, 1.0, 11)[None, None]
        with pytest.raises(ValueError):
            KineticField(np.array([0.0]), np.array([0.0]), xi, F).validate()


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=40),
       theta=st.floats(0.05, 0.95))
def test_cdf_properties(vals, theta):
    xi = np.linspace(-0.5, 1.5, 201)
    F = np.sort(np.clip(np.array(vals + [0.0, 1.0]), 0.0, 1.0))
    F = np.interp(xi, np.linspace(-0.5, 1.5, len(F)), F)
    F[0], F[-1] = 0.0, 1.0
    F = np.maximum.accumulate(np.clip(F, 0, 1))
    fld = KineticField(np.array([0.0]), np.array([0.0]), xi, F[None, None])
    fld.validate()
    m = moment_slice(F, xi, _id, _one)
    assert xi[0] - 1e-9 <= m <= xi[-1] + 1e-9
    F2 = two_point_cdf(theta, 0.2, 0.8, xi)
    d = cdf_distance(F[None, None], F2[None, None], xi=xi)[0, 0]
    assert 0.0 <= d <= xi[-1] - xi[0]
