from __future__ import annotations

import numpy as np
import pytest

from oscillab.constitutive import ConstitutiveLaw, analytic_cubic_law
from oscillab.exact_solutions import TwoPhaseSpec
from oscillab.linear_modes import amplitude_roots_1d, fit_decay_rate
from oscillab.pde_direct import (ShearState, diagnostics, solve_viscoelastic,
                                 solve_viscous_scalar, two_phase_ic)


def _linear_law(lam=1.0):
    x = np.linspace(-6.0, 6.0, 97)
    return ConstitutiveLaw("stress-shear", [x], [lam * x])


class TestTwoPhaseIC:
    def test_exact_cell_split(self):
        ic = two_phase_ic(TwoPhaseSpec(a=1.0, b=2.0, theta=0.5, n=8))
        assert np.sum(ic.u == 1.0) == ic.n_cells // 2

    def test_cell_average(self):
        ic = two_phase_ic(TwoPhaseSpec(a=1.0, b=2.0, theta=0.5, n=64))
        assert abs(ic.u.mean() - 1.5) <= 1.0 / 64

    def test_velocity_bound_independent_of_n(self):
        prof = lambda x: 0.3 * np.sin(2 * np.pi * x)
        norms = []
        for n in (8, 16, 32, 64, 128):
            ic = two_phase_ic(TwoPhaseSpec(a=1.0, b=2.0, theta=0.5, n=n),
                              v_profile=prof)
            grad = np.max(np.abs(np.diff(ic.v))) / ic.dx
            norms.append((np.max(np.abs(ic.v)), round(grad, 3)))
        assert max(v for v, _ in norms) == pytest.approx(0.3, rel=1e-3)
        grads = [g for _, g in norms]
        assert max(grads) - min(grads) <= 0.02 * max(grads)


class TestViscoelasticSolver:
    def test_equilibrium_constant_state(self, cubic_law):
        # traction-free boundaries require zero stress: sigma(1) = 0
        st = ShearState(u=np.full(64, 1.0), v=np.zeros(65))
        traj = solve_viscoelastic(st, cubic_law, T=0.5, n_outputs=3)
        assert np.max(np.abs(traj.u[-1] - 1.0)) == 0.0
        assert np.max(np.abs(traj.v[-1])) == 0.0

    def test_linear_decay_against_root_oracle(self):
        m = 32
        k = m * np.pi
        N = int(np.ceil(16 * k / (2 * np.pi)))
        x_c = (np.arange(N) + 0.5) / N
        ic = ShearState(u=0.01 * np.cos(k * x_c), v=np.zeros(N + 1))
        traj = solve_viscoelastic(ic, _linear_law(), T=2.0, n_outputs=41)
        amp = np.max(np.abs(traj.u), axis=1)
        rate = fit_decay_rate(traj.times, amp, skip_fraction=0.25)
        oracle = amplitude_roots_1d(1.0, 1.0, k).rho_plus.real
        assert rate == pytest.approx(oracle, rel=0.01)

    def test_energy_never_increases(self, shear_law):
        ic = two_phase_ic(TwoPhaseSpec(a=0.5, b=2.0, theta=0.5, n=16),
                          v_profile=lambda x: 0.1 * np.sin(2 * np.pi * x))
        traj = solve_viscoelastic(ic, shear_law, T=0.5)
        assert traj.max_energy_increase <= 1e-8

    def test_stress_boundary_condition(self, shear_law):
        ic = two_phase_ic(TwoPhaseSpec(a=0.5, b=2.0, theta=0.5, n=8),
                          v_profile=lambda x: 0.1 * np.sin(2 * np.pi * x))
        traj = solve_viscoelastic(ic, shear_law, T=0.25, n_outputs=6)
        assert np.max(np.abs(traj.S[:, [0, -1]])) <= 1e-8

    def test_output_schedule_exact(self, cubic_law):
        st = ShearState(u=np.full(32, 1.0), v=np.zeros(33))
        traj = solve_viscoelastic(st, cubic_law, T=0.5, n_outputs=6)
        assert np.allclose(traj.times, np.linspace(0, 0.5, 6), atol=1e-14)

    def test_oversized_dt_is_rejected_and_subdivided(self, cubic_law):
        x_c = (np.arange(64) + 0.5) / 64
        st = ShearState(u=1.0 + 0.3 * np.sin(2 * np.pi * x_c), v=np.zeros(65))
        traj = solve_viscoelastic(st, cubic_law, T=0.2, dt=0.1, n_outputs=3)
        assert traj.dt < 0.1
        assert traj.max_energy_increase <= 1e-8
        assert np.allclose(traj.times, [0.0, 0.1, 0.2], atol=1e-14)

    def test_second_order_self_convergence(self, cubic_law):
        # smooth data away from law corners; fixed small dt isolates space error
        sols = {}
        for N in (64, 128, 256):
            x_c = (np.arange(N) + 0.5) / N
            ic = ShearState(u=1.3 + 0.1 * np.sin(2 * np.pi * x_c),
                            v=np.zeros(N + 1))
            traj = solve_viscoelastic(ic, cubic_law, T=0.1, dt=2e-5,
                                      n_outputs=2)
            sols[N] = traj.u[-1]

        def restrict(u):
            return 0.5 * (u[0::2] + u[1::2])

        def rms(v):
            return np.linalg.norm(v) / np.sqrt(len(v))

        e1 = rms(restrict(sols[128]) - sols[64])
        e2 = rms(restrict(sols[256]) - sols[128])
        assert 3.5 <= e1 / e2 <= 4.5


class TestScalarSolver:
    def test_heat_mode_decay(self):
        N = 128
        x = (np.arange(N) + 0.5) / N
        traj = solve_viscous_scalar(np.sin(2 * np.pi * x),
                                    lambda u: 0.0 * u, lambda u: 0.0 * u,
                                    eps=0.05, T=1.0, dt=2e-4, n_outputs=21)
        amp = np.max(np.abs(traj.u), axis=1)
        rate = fit_decay_rate(traj.times, amp)
        assert rate == pytest.approx(-0.05 * (2 * np.pi) ** 2, rel=0.01)

    def test_burgers_constant_state(self):
        u0 = np.full(64, 0.8)
        traj = solve_viscous_scalar(u0, lambda u: 0.5 * u * u, lambda u: u,
                                    eps=1e-3, T=0.5, n_outputs=3)
        assert np.max(np.abs(traj.u[-1] - 0.8)) <= 1e-13

    def test_mass_conserved(self):
        N = 256
        x = (np.arange(N) + 0.5) / N
        u0 = np.where(x < 0.5, 1.5, -0.5)
        traj = solve_viscous_scalar(u0, lambda u: 0.5 * u * u, lambda u: u,
                                    eps=1e-3, T=0.5)
        assert np.max(np.abs(traj.mass - traj.mass[0])) \
            <= 1e-12 * max(abs(traj.mass[0]), 1.0)

    def test_max_principle(self):
        N = 256
        x = (np.arange(N) + 0.5) / N
        u0 = np.where(x < 0.5, 1.5, -0.5)
        traj = solve_viscous_scalar(u0, lambda u: 0.5 * u * u, lambda u: u,
                                    eps=1e-3, T=0.5)
        assert traj.sup_u.max() <= np.max(np.abs(u0)) + 1e-8

    def test_eps_positive_required(self):
        with pytest.raises(ValueError):
            solve_viscous_scalar(np.ones(16), lambda u: u, lambda u: u,
                                 eps=0.0, T=0.1)


class TestDiagnostics:
    def test_g_equals_u_when_velocity_zero(self, cubic_law):
        st = ShearState(u=np.full(64, 1.0), v=np.zeros(65))
        traj = solve_viscoelastic(st, cubic_law, T=0.2, n_outputs=3)
        rep = diagnostics(traj, cubic_law)
        assert np.max(np.abs(rep.g - traj.u)) == 0.0

    def test_velocity_potential_bound(self, shear_law):
        ic = two_phase_ic(TwoPhaseSpec(a=0.5, b=2.0, theta=0.5, n=16),
                          v_profile=lambda x: 0.2 * np.sin(2 * np.pi * x))
        traj = solve_viscoelastic(ic, shear_law, T=0.5)
        rep = diagnostics(traj, shear_law)
        assert rep.A_bound_ok
        assert rep.A_max <= np.sqrt(2.0 * traj.energy[0]) + 1e-10

    def test_strain_stays_confined(self, cubic_law):
        # bounded data, cubic law: no growth beyond twice the initial window
        x_c = (np.arange(256) + 0.5) / 256
        ic = ShearState(u=np.where((x_c * 8) % 1.0 < 0.5, -0.5, 0.5),
                        v=0.1 * np.sin(2 * np.pi * np.arange(257) / 256))
        traj = solve_viscoelastic(ic, cubic_law, T=2.0)
        rep = diagnostics(traj, cubic_law, K_window=1.0)
        assert rep.within_K_window
        assert rep.sup_u.max() <= 2.0 * 0.5


class TestAborts:
    def test_non_finite_state_aborts_with_dump(self, cubic_law):
        from oscillab.pde_direct import SolverAbort
        u0 = np.full(32, 1.0)
        u0[3] = np.nan
        st = ShearState(u=u0, v=np.zeros(33))
        with pytest.raises(SolverAbort) as err:
            solve_viscoelastic(st, cubic_law, T=0.1, n_outputs=2)
        assert "u" in err.value.state
