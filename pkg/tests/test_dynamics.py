"""Integrator behavior, attractor classification, basins and monitors."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from harvestdyn import (
    SysState,
    Trajectory,
    integrate,
    classify_attractor,
    basin_sample,
    boundedness_monitor,
    persistence_witness,
    vector_field,
)
from harvestdyn.dynamics import IntegrationMeta

E0 = np.zeros(3)
E1 = np.array([1.0, 0.0, 0.0])
E3_FIG4 = np.array([0.44, 0.385, 0.1925])


def reference_solution(params, s0, t_end):
    """Independent high-accuracy solution on a smooth segment (different
    method, different code path)."""
    sol = solve_ivp(
        lambda t, s: vector_field(params, SysState(*s)),
        (0.0, t_end), list(s0), method="DOP853", rtol=1e-12, atol=1e-14,
    )
    return sol.y[:, -1]


class TestIntegrate:
    def test_extinction_scenario_reaches_origin(self, fig1):
        traj = integrate(fig1, SysState(0.7, 0.6, 0.7), 500.0)
        assert np.linalg.norm(np.asarray(traj.final_state) - E0) < 1e-3
        # the run stops at the singular guard band around the origin
        assert traj.meta.terminated_early
        assert "singular" in traj.meta.termination_reason

    def test_prey_only_scenario(self, fig2):
        traj = integrate(fig2, SysState(0.01, 0.01, 0.01), 500.0)
        assert np.linalg.norm(np.asarray(traj.final_state) - E1) < 1e-3

    def test_accuracy_tracks_tolerance(self, fig4):
        # tightening the tolerance by 100x must gain at least a factor 16
        s0 = SysState(0.5, 0.4, 0.3)
        ref = reference_solution(fig4, s0, 10.0)
        errs = []
        for rtol in (1e-4, 1e-6):
            traj = integrate(fig4, s0, 10.0, rel_tol=rtol, abs_tol=1e-12)
            errs.append(np.linalg.norm(np.asarray(traj.final_state) - ref))
        assert errs[0] / errs[1] >= 16.0

    def test_self_consistency_under_tightening(self, fig4):
        s0 = SysState(0.3, 0.2, 0.2)
        loose = integrate(fig4, s0, 50.0, rel_tol=1e-6, abs_tol=1e-9)
        tight = integrate(fig4, s0, 50.0, rel_tol=1e-7, abs_tol=1e-10)
        diff = np.linalg.norm(np.asarray(loose.final_state) - np.asarray(tight.final_state))
        assert diff < 10.0 * 1e-6

    def test_times_strictly_increasing(self, fig4):
        traj = integrate(fig4, SysState(0.3, 0.2, 0.2), 100.0)
        assert np.all(np.diff(traj.times) > 0.0)

    def test_states_never_negative(self, fig1, fig2, fig4):
        for params, ic in ((fig1, (0.7, 0.6, 0.7)), (fig2, (0.01,) * 3), (fig4, (0.3, 0.2, 0.2))):
            traj = integrate(params, SysState(*ic), 300.0)
            assert traj.states.min() >= 0.0
            assert not traj.meta.positivity_violation

    def test_axis_initial_state_stays_on_axis(self, fig4):
        traj = integrate(fig4, SysState(0.25, 0.0, 0.0), 50.0)
        assert np.all(traj.states[:, 1] == 0.0)
        assert np.all(traj.states[:, 2] == 0.0)
        assert traj.final_state.x == pytest.approx(1.0, abs=1e-6)

    def test_fixed_step_mode(self, fig4):
        traj = integrate(fig4, SysState(0.3, 0.2, 0.2), 10.0, fixed_step=0.01)
        ref = reference_solution(fig4, SysState(0.3, 0.2, 0.2), 10.0)
        assert np.linalg.norm(np.asarray(traj.final_state) - ref) < 1e-7
        assert traj.meta.n_accepted == 1000

    def test_rejects_negative_initial_state(self, fig4):
        with pytest.raises(ValueError, match="nonnegative"):
            integrate(fig4, SysState(-0.1, 0.2, 0.2), 10.0)

    def test_rejects_guard_band_initial_state(self, fig4):
        with pytest.raises(ValueError, match="singular"):
            integrate(fig4, SysState(1e-14, 1e-14, 0.5), 10.0)

    def test_rejects_nonpositive_horizon(self, fig4):
        with pytest.raises(ValueError, match="t_end"):
            integrate(fig4, SysState(0.3, 0.2, 0.2), 0.0)

    def test_step_counters_populated(self, fig4):
        traj = integrate(fig4, SysState(0.3, 0.2, 0.2), 100.0)
        assert traj.meta.n_accepted == len(traj.times) - 1
        assert traj.meta.n_rejected >= 0


class TestClassifyAttractor:
    def test_fig4_interior_attractor(self, fig4):
        traj = integrate(fig4, SysState(0.3, 0.2, 0.2), 2000.0)
        verdict = classify_attractor(fig4, traj)
        assert verdict.kind == "E3"
        assert verdict.distance < 1e-6

    def test_fig5_limit_cycle(self, fig5):
        traj = integrate(fig5, SysState(0.3, 0.2, 0.2), 2000.0, max_step=1.0)
        verdict = classify_attractor(fig5, traj)
        assert verdict.kind == "limit_cycle"
        assert verdict.cycle_stats.period > 0.0
        assert verdict.cycle_stats.amplitudes[0] > 1e-2

    def test_constant_trajectory_matches_exactly(self, fig2):
        times = np.linspace(0.0, 100.0, 50)
        states = np.tile(E1, (50, 1))
        traj = Trajectory(times, states, IntegrationMeta(1e-11, 1e-8, np.inf))
        verdict = classify_attractor(fig2, traj)
        assert verdict.kind == "E1"
        assert verdict.distance == 0.0

    def test_invariant_to_appended_settled_time(self, fig4):
        short = integrate(fig4, SysState(0.3, 0.2, 0.2), 1000.0)
        long = integrate(fig4, SysState(0.3, 0.2, 0.2), 3000.0)
        assert classify_attractor(fig4, short).kind == classify_attractor(fig4, long).kind

    def test_transient_is_undecided(self, fig4):
        traj = integrate(fig4, SysState(0.3, 0.2, 0.2), 5.0)
        assert classify_attractor(fig4, traj).kind == "undecided"


class TestBasinSample:
    def test_fig7_exhibits_bistability(self, fig7):
        result = basin_sample(fig7, ((0.01, 1.0),) * 3, 32, 1000.0, seed=0)
        assert result.counts.get("E0", 0) >= 1
        assert result.counts.get("E3", 0) >= 1

    def test_fig8_exhibits_bistability(self, fig8):
        result = basin_sample(fig8, ((0.01, 1.0),) * 3, 32, 1000.0, seed=0)
        assert result.counts.get("E0", 0) >= 1
        assert result.counts.get("E2", 0) >= 1

    def test_fig4_single_attractor(self, fig4):
        result = basin_sample(fig4, ((0.01, 1.0),) * 3, 16, 1500.0, seed=0)
        assert result.counts == {"E3": 16}

    def test_bit_reproducible_for_same_seed(self, fig7):
        a = basin_sample(fig7, ((0.01, 1.0),) * 3, 8, 400.0, seed=3)
        b = basin_sample(fig7, ((0.01, 1.0),) * 3, 8, 400.0, seed=3)
        assert [s for s, _ in a.samples] == [s for s, _ in b.samples]
        assert [v.kind for _, v in a.samples] == [v.kind for _, v in b.samples]

    def test_seed_changes_points(self, fig7):
        a = basin_sample(fig7, ((0.01, 1.0),) * 3, 8, 200.0, seed=3)
        b = basin_sample(fig7, ((0.01, 1.0),) * 3, 8, 200.0, seed=4)
        assert [s for s, _ in a.samples] != [s for s, _ in b.samples]

    def test_rejects_box_touching_axes(self, fig7):
        with pytest.raises(ValueError, match="positive orthant"):
            basin_sample(fig7, ((0.0, 1.0), (0.01, 1.0), (0.01, 1.0)), 4, 10.0)


class TestBoundednessMonitor:
    def test_holds_along_extinction_trajectory(self, fig1):
        traj = integrate(fig1, SysState(0.7, 0.6, 0.7), 500.0)
        report = boundedness_monitor(fig1, traj)
        assert report.satisfied
        assert not traj.meta.bound_violation

    def test_large_start_decays_toward_envelope(self, fig4):
        traj = integrate(fig4, SysState(4.0, 4.0, 4.0), 400.0)
        report = boundedness_monitor(fig4, traj)
        assert report.satisfied
        assert report.w_max == pytest.approx(report.w_initial)
        final_w = (
            traj.final_state.x
            + fig4.a * traj.final_state.y / fig4.e
            + fig4.a * traj.final_state.E / (fig4.rho * fig4.e * fig4.p)
        )
        assert final_w < report.w_initial
        assert final_w < report.M / report.mu

    def test_zero_trajectory_trivially_bounded(self, fig4):
        times = np.linspace(0.0, 10.0, 5)
        states = np.zeros((5, 3))
        traj = Trajectory(times, states, IntegrationMeta(1e-11, 1e-8, np.inf))
        report = boundedness_monitor(fig4, traj)
        assert report.satisfied
        assert report.w_max == 0.0

    def test_holds_along_suite_trajectories(self, fig2, fig4, fig5):
        for params, ic, t_end in (
            (fig2, (0.5, 0.4, 0.3), 300.0),
            (fig4, (0.99, 0.01, 0.01), 1000.0),
            (fig5, (0.3, 0.2, 0.2), 1000.0),
        ):
            traj = integrate(params, SysState(*ic), t_end)
            assert boundedness_monitor(params, traj).satisfied


class TestPersistenceWitness:
    def test_persistent_fraction_witnessed(self, fig3):
        witness = persistence_witness(fig3, SysState(0.5, 0.4, 0.3), 2000.0)
        assert witness.applicable
        assert witness.witnessed
        assert all(v > 0.0 for v in witness.tail_minima)

    def test_below_threshold_not_applicable(self, fig3):
        witness = persistence_witness(fig3.replace(m=0.3), SysState(0.5, 0.4, 0.3), 100.0)
        assert not witness.applicable
        assert "persistence conditions fail" in witness.reason

    def test_axis_start_fails_trivially(self, fig3):
        witness = persistence_witness(fig3, SysState(0.5, 0.0, 0.0), 100.0)
        assert witness.applicable
        assert not witness.witnessed
        assert witness.tail_minima[1] == 0.0
        assert witness.tail_minima[2] == 0.0
