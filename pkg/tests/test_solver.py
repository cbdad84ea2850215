"""Time integration of the inverted system with bottom forcing."""

import numpy as np
import numpy.testing as npt
import pytest

from abcdsim import (
    AbcdParams,
    BlowUp,
    CflViolation,
    Grid,
    NonFinite,
    SimConfig,
    State,
    decaying_bump,
    flat_bottom,
    gaussian_pair,
    max_group_speed,
    random_bandlimited_pair,
    rhs,
    run,
    state_h1_norm,
    static_bump,
    step_rk4,
    zero_pair,
)
from abcdsim.diagnostics import hamiltonian_h
from abcdsim.bathymetry import BathymetrySamples


@pytest.fixture(scope="module")
def grid():
    return Grid(np.pi, 64)


def _flat_samples(g, t=0.0):
    return flat_bottom().sample(g, t)


class TestRhsOracles:
    def test_zero_state_flat_bottom_is_stationary(self, grid):
        s = State(grid, *zero_pair(grid), 0.0)
        de, du = rhs(s, _flat_samples(grid), AbcdParams(a=-1.0, c=-1.0))
        assert not np.any(de) and not np.any(du)

    def test_zero_state_static_bottom_is_stationary(self, grid):
        # a motionless bottom exerts no forcing
        b = static_bump(1e-2, width=1.0)
        s = State(grid, *zero_pair(grid), 0.0)
        de, du = rhs(s, b.sample(grid, 0.0), AbcdParams(a=-1.0, c=-1.0, a1=0.3, c1=0.6))
        assert not np.any(de) and not np.any(du)

    def test_single_cosine_against_hand_computed_rates(self, grid):
        # a = -1 makes the dispersive symbol collapse: surface rate is
        # -dx u; velocity rate reduces to the quadratic transport term
        p = AbcdParams(a=-1.0, c=-1.0)
        u = np.cos(grid.x)
        s = State(grid, np.zeros(grid.N), u, 0.0)
        de, du = rhs(s, _flat_samples(grid), p)
        npt.assert_allclose(de, np.sin(grid.x), atol=1e-13)
        npt.assert_allclose(du, np.sin(2.0 * grid.x) / 10.0, atol=1e-13)

    def test_linear_rates_for_general_parameters(self, grid):
        # tiny amplitude: quadratic terms are below round-off, leaving
        # the symbol k (1 - a k^2)/(1 + k^2) acting mode by mode
        a, c = -0.6, -0.25
        p = AbcdParams(a=a, c=c)
        amp = 1e-9
        k = 3.0
        eta = amp * np.cos(k * grid.x)
        u = amp * np.sin(k * grid.x)
        s = State(grid, eta, u, 0.0)
        de, du = rhs(s, _flat_samples(grid), p)
        sig_a = k * (1.0 - a * k * k) / (1.0 + k * k)
        sig_c = k * (1.0 - c * k * k) / (1.0 + k * k)
        npt.assert_allclose(de, -sig_a * amp * np.cos(k * grid.x), atol=1e-17)
        npt.assert_allclose(du, sig_c * amp * np.sin(k * grid.x), atol=1e-17)

    def test_bottom_forcing_from_quiescent_water(self):
        # zero fields over a decaying bump: the rates are pure forcing,
        # reproducible by direct symbol arithmetic on the transforms
        # the profile tail must sit below round-off at the mode cutoff,
        # since the oracle differentiates spectrally while the rates use
        # the closed-form profile derivatives
        g = Grid(20 * np.pi, 512)
        b = decaying_bump(2e-3, width=2.0)
        p = AbcdParams(a=-1.0, c=-1.0, a1=0.3135, c1=0.5635)
        s = State(g, *zero_pair(g), 0.0)
        bs = b.sample(g, 0.0)
        de, du = rhs(s, bs, p)
        # surface forcing (1 - a1 dxx) applied to -dt h, smoothed
        want_eta = np.fft.irfft(
            (1.0 + p.a1 * g.k2) / (1.0 + g.k2) * np.fft.rfft(-bs.dt_h), g.N
        )
        # velocity forcing c1 dx dtt h, smoothed
        want_u = np.fft.irfft(
            p.c1 * (1j * g.k) / (1.0 + g.k2) * np.fft.rfft(bs.dtt_h), g.N
        )
        npt.assert_allclose(de, want_eta, atol=1e-14)
        npt.assert_allclose(du, want_u, atol=1e-14)

    def test_grid_mismatch_rejected(self, grid):
        other = Grid(np.pi, 128)
        s = State(grid, *zero_pair(grid), 0.0)
        with pytest.raises(ValueError):
            rhs(s, _flat_samples(other), AbcdParams(a=-1.0, c=-1.0))


class TestGroupSpeed:
    def test_nondispersive_corner(self, grid):
        # at a = c = -1 the phase speed is exactly 1 for every mode
        npt.assert_allclose(max_group_speed(AbcdParams(a=-1.0, c=-1.0), grid), 1.0, rtol=1e-9)

    def test_matches_dense_numerical_scan(self, grid):
        a, c = -0.5, -0.2
        p = AbcdParams(a=a, c=c)
        ks = np.linspace(1e-6, grid.k[-1], 20001)
        om = ks * np.sqrt((1.0 - a * ks**2) * (1.0 - c * ks**2)) / (1.0 + ks**2)
        vg = np.gradient(om, ks)
        want = np.max(np.abs(vg))
        got = max_group_speed(p, grid)
        npt.assert_allclose(got, want, rtol=1e-3)


class TestSingleModeEvolution:
    def test_matches_exact_linear_solution(self):
        # small amplitude single mode: the semidiscrete system is a 2x2
        # oscillator per mode with an explicit solution
        g = Grid(np.pi, 64)
        a, c = -0.8, -0.45
        p = AbcdParams(a=a, c=c)
        k = 4.0
        amp = 1e-8
        eta0 = amp * np.cos(k * g.x)
        u0 = np.zeros(g.N)
        sig_a = k * (1.0 - a * k * k) / (1.0 + k * k)
        sig_c = k * (1.0 - c * k * k) / (1.0 + k * k)
        om = np.sqrt(sig_a * sig_c)
        T = 1.0
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=g,
                        eta0=eta0, u0=u0, dt=1e-3, t_end=T)
        res = run(cfg)
        s = res.final_state
        # eta(t) = amp cos(om t) cos(kx); u(t) = amp (sig_c/om) sin(om t) sin(kx)
        npt.assert_allclose(s.eta, amp * np.cos(om * T) * np.cos(k * g.x),
                            atol=amp * 1e-6)
        npt.assert_allclose(s.u, amp * (sig_c / om) * np.sin(om * T) * np.sin(k * g.x),
                            atol=amp * 1e-6)


class TestAccuracy:
    def _final_state(self, g, p, b, dt, t_end=0.5):
        eta0, u0 = gaussian_pair(g, eps=5e-2, width=2.0)
        cfg = SimConfig(params=p, bathymetry=b, grid=g, eta0=eta0, u0=u0,
                        dt=dt, t_end=t_end)
        return run(cfg).final_state

    def test_fourth_order_self_convergence(self):
        g = Grid(10 * np.pi, 128)
        p = AbcdParams(a=-1.0, c=-0.5, a1=0.2, c1=0.4)
        b = decaying_bump(1e-3, width=2.0)
        ref = self._final_state(g, p, b, 6.25e-4)
        errs = []
        for dt in (5e-3, 2.5e-3):
            s = self._final_state(g, p, b, dt)
            errs.append(np.max(np.abs(s.eta - ref.eta)) + np.max(np.abs(s.u - ref.u)))
        ratio = errs[0] / errs[1]
        assert 10.0 < ratio < 22.0, f"halving dt changed the error by {ratio}"

    def test_time_reversal_returns_to_initial_data(self):
        g = Grid(10 * np.pi, 128)
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = gaussian_pair(g, eps=1e-2, width=2.0)
        fwd = run(SimConfig(params=p, bathymetry=flat_bottom(), grid=g,
                            eta0=eta0, u0=u0, dt=2e-3, t_end=0.5))
        s = fwd.final_state
        back = run(SimConfig(params=p, bathymetry=flat_bottom(), grid=g,
                             eta0=s.eta, u0=s.u, dt=-2e-3, t_end=0.0, t_start=0.5))
        r = back.final_state
        err = np.max(np.abs(r.eta - eta0)) + np.max(np.abs(r.u - u0))
        assert err < 1e-11

    def test_flat_bottom_energy_drift_is_tiny(self):
        g = Grid(10 * np.pi, 128)
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = random_bandlimited_pair(g, seed=2, eps=1e-2)
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=g,
                        eta0=eta0, u0=u0, dt=1e-3, t_end=2.0)
        res = run(cfg)
        bs = _flat_samples(g)
        h0 = hamiltonian_h(State(g, eta0, u0, 0.0), bs, p)
        h1 = hamiltonian_h(res.final_state, bs, p)
        assert abs(h1 - h0) / abs(h0) < 1e-12


class TestRunPlumbing:
    def test_exact_snapshot_times_and_counts(self, grid):
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = gaussian_pair(grid, eps=1e-3, width=0.5)
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=grid,
                        eta0=eta0, u0=u0, dt=1e-2, t_end=0.1, snapshot_every=2)
        res = run(cfg)
        ts = [s.t for s in res.snapshots]
        npt.assert_allclose(ts, [0.0, 0.02, 0.04, 0.06, 0.08, 0.1], rtol=0, atol=1e-15)
        assert res.n_steps == 10
        assert res.final_state.t == 0.1

    def test_observer_replaces_snapshot_collection(self, grid):
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = gaussian_pair(grid, eps=1e-3, width=0.5)
        seen = []
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=grid,
                        eta0=eta0, u0=u0, dt=1e-2, t_end=0.05)
        res = run(cfg, observer=lambda s: seen.append(s.t))
        assert res.snapshots == []
        npt.assert_allclose(seen, [0.0, 0.01, 0.02, 0.03, 0.04, 0.05], atol=1e-15)

    def test_cfl_violation_raised_before_stepping(self, grid):
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = gaussian_pair(grid, eps=1e-3, width=0.5)
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=grid,
                        eta0=eta0, u0=u0, dt=1.0, t_end=10.0, cfl_factor=0.5)
        with pytest.raises(CflViolation):
            run(cfg)

    def test_blowup_guard_trips_on_norm_growth(self, grid):
        # a conserved run trips immediately once the allowed growth
        # factor is below 1
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = gaussian_pair(grid, eps=1e-3, width=0.5)
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=grid,
                        eta0=eta0, u0=u0, dt=1e-2, t_end=0.5, blowup_factor=0.99)
        with pytest.raises(BlowUp):
            run(cfg)

    def test_nonfinite_fields_detected(self, grid):
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = gaussian_pair(grid, eps=1e-3, width=0.5)
        eta0 = eta0.copy()
        eta0[3] = np.nan
        cfg = SimConfig(params=p, bathymetry=flat_bottom(), grid=grid,
                        eta0=eta0, u0=u0, dt=1e-2, t_end=0.5)
        with pytest.raises(NonFinite):
            run(cfg)

    def test_abort_reasons_are_subclasses_of_the_common_base(self):
        from abcdsim import SimulationAbort
        assert issubclass(CflViolation, SimulationAbort)
        assert issubclass(BlowUp, SimulationAbort)
        assert issubclass(NonFinite, SimulationAbort)

    @pytest.mark.parametrize("kw", [
        dict(dt=0.0), dict(dt=np.nan), dict(cfl_factor=0.0), dict(cfl_factor=1.5),
        dict(snapshot_every=0),
    ])
    def test_config_validation(self, grid, kw):
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = zero_pair(grid)
        base = dict(params=p, bathymetry=flat_bottom(), grid=grid,
                    eta0=eta0, u0=u0, dt=1e-2, t_end=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            SimConfig(**base)

    def test_backward_run_needs_negative_dt(self, grid):
        p = AbcdParams(a=-1.0, c=-1.0)
        eta0, u0 = zero_pair(grid)
        with pytest.raises(ValueError):
            SimConfig(params=p, bathymetry=flat_bottom(), grid=grid,
                      eta0=eta0, u0=u0, dt=1e-2, t_end=0.0, t_start=1.0)

    def test_single_step_matches_run_of_one_step(self, grid):
        p = AbcdParams(a=-1.0, c=-0.5)
        b = decaying_bump(1e-3, width=1.0)
        eta0, u0 = gaussian_pair(grid, eps=1e-3, width=0.5)
        s0 = State(grid, eta0, u0, 0.0)
        s1 = step_rk4(s0, 1e-2, b, p)
        res = run(SimConfig(params=p, bathymetry=b, grid=grid,
                            eta0=eta0, u0=u0, dt=1e-2, t_end=1e-2))
        npt.assert_allclose(s1.eta, res.final_state.eta, atol=1e-17)
        npt.assert_allclose(s1.u, res.final_state.u, atol=1e-17)


class TestStateNorm:
    def test_h1_norm_of_single_modes(self, grid):
        # eta = sin(3x): integral of eta^2 + (deta)^2 = pi + 9 pi
        eta = np.sin(3.0 * grid.x)
        s = State(grid, eta, np.zeros(grid.N), 0.0)
        npt.assert_allclose(state_h1_norm(s), np.sqrt(10.0 * np.pi), rtol=1e-12)
