"""Fluid-limit integration: construction, conservation, closed forms the
right-hand sides must obey, and frozen end-to-end values.

The closed forms (linear drain of the point pools, the power law for the
untouched class) were derived by hand and cross-checked with a separate
single-file integrator before being asserted here.
"""

import math

import numpy as np
import pytest

from vbisect import dem
from vbisect.integrate import Event

NEVER = [Event(lambda t, y: 1.0, direction=0, name="never")]

# Adaptive-mode end values at default settings, frozen from the first
# verified build. Tight pins so numerical drift in any refactor shows up.
ALPHA_PINNED = {
    3: 0.03741881480412821,
    4: 0.5133528331351576,
    5: 0.616805732859657,
    6: 0.6506734034488786,
    7: 1.0894871074956175e-09,
    8: 1.5141080265022355e-09,
    9: 1.1263708260211482e-09,
    10: 1.3414770554410314e-09,
}
PHASES_PINNED = {3: 16, 4: 10, 5: 8, 6: 7, 7: 7, 8: 6, 9: 5, 10: 6}
FLAGS_PINNED = {
    3: [],
    4: ["l_exhausted"],
    5: ["l_exhausted"],
    6: ["l_exhausted"],
    7: ["l_exhausted", "stage2_clamp", "guard_red_points", "no_balance"],
    8: ["l_exhausted", "stage2_clamp", "guard_red_points", "no_balance"],
    9: ["l_exhausted", "stage2_clamp", "guard_red_points", "no_balance"],
    10: ["l_exhausted", "guard_red_points", "no_balance"],
}


# -- construction -----------------------------------------------------------


def test_init_state_profile_d4():
    s = dem.init_state(4, 1e-5)
    assert s.r.tolist() == [1e-5 / 3, 0.0, 0.0, 1e-5]
    assert s.z[:4].tolist() == [0.0] * 4
    assert s.z[4] == 1.0 - 1e-5 - 1e-5 / 3
    assert s.mass == pytest.approx(1.0, abs=1e-15)


def test_init_state_profile_d9():
    s = dem.init_state(9, 1e-4)
    assert s.r[0] == 1e-4 / 8
    assert s.r[8] == 1e-4
    assert s.points_red == pytest.approx(8e-4, rel=1e-12)


def test_init_state_rejects_bad_eps():
    with pytest.raises(ValueError):
        dem.init_state(4, 0.0)
    with pytest.raises(ValueError):
        dem.init_state(4, 0.75)
    with pytest.raises(ValueError):
        dem.init_state(4, -1e-6)


def test_state_point_accounting():
    s = dem.DemState(4, np.array([0.1, 0.2, 0.0, 0.1]),
                     np.array([0.0, 0.1, 0.0, 0.2, 0.3]))
    assert s.points_red == pytest.approx(0.2 + 0.3)
    assert s.points_white == pytest.approx(0.1 + 0.6 + 1.2)
    assert s.red_mass == pytest.approx(0.4)
    assert s.low_points == pytest.approx(0.2 + 2 * 0.0)  # classes 0..2 of r


# -- right-hand sides -------------------------------------------------------


@pytest.mark.parametrize("d", range(3, 11))
def test_rhs_sums_vanish_on_random_states(d):
    rng = np.random.default_rng(d)
    f1 = dem.rhs_phase1(d)
    f2 = dem.rhs_phase2(d)
    f2b = dem.rhs_phase2_fallback(d)
    for _ in range(200):
        y1 = rng.uniform(0.01, 1.0, 2 * d + 1)
        y2 = rng.uniform(0.01, 1.0, d + 1)
        assert abs(float(f1(0.0, y1).sum())) <= 1e-12
        assert abs(float(f2(0.0, y2).sum())) <= 1e-12
        assert abs(float(f2b(0.0, y2).sum())) <= 1e-12


def test_untouched_class_drains_at_unit_rate_initially():
    # with almost all points in the untouched class, its loss rate is ~1
    s = dem.init_state(4, 1e-5)
    dy = dem.rhs_phase1(4)(0.0, np.concatenate([s.r, s.z]))
    assert dy[4 + 4] == pytest.approx(-1.0, abs=1e-3)
    assert abs(float(dy.sum())) <= 1e-12


def test_stage_one_pools_drain_linearly():
    r0 = np.array([0.05, 0.1, 0.05, 0.02])
    z0 = np.array([0.01, 0.02, 0.03, 0.04, 0.6])
    s0 = dem.DemState(4, r0, z0)
    A = s0.points_all
    T = 0.4 * s0.points_red
    end, fired, raw = dem.integrate_phase(dem.rhs_phase1(4), s0, NEVER, t_max=T)
    assert fired is None and raw.status == "t_end"
    assert end.points_all == pytest.approx(A - 2 * T, abs=1e-12)
    # the untouched class sees only the all-points draw, d times per vertex
    assert end.z[4] == pytest.approx(z0[4] * ((A - 2 * T) / A) ** 2, abs=1e-12)


@pytest.mark.parametrize("family", ["draw_low", "draw_any"])
def test_stage_two_red_pool_drains_at_rate_two(family):
    y0 = np.array([0.05, 0.1, 0.05, 0.02, 0.3])
    f = dem.rhs_phase2(4) if family == "draw_low" else dem.rhs_phase2_fallback(4)
    T = 0.05
    end, fired, raw = dem.integrate_phase(f, dem.DemState(4, y0.copy()), NEVER, t_max=T)
    assert raw.status == "t_end"
    p0 = float(np.arange(5) @ y0)
    assert float(np.arange(5) @ end.r) == pytest.approx(p0 - 2 * T, abs=1e-12)


# -- transitions ------------------------------------------------------------


# dyadic values so the sums below are exact in binary floats
def test_rollover_moves_shells_to_red():
    s = dem.DemState(4, np.full(4, 0.125), np.array([0.0625] * 4 + [0.25]))
    rolled = dem.rollover(s)
    assert rolled.r.tolist() == [0.1875] * 4
    assert rolled.z.tolist() == [0.0, 0.0, 0.0, 0.0, 0.25]


def test_rollover_literal_variant_keeps_class_zero():
    s = dem.DemState(4, np.full(4, 0.125), np.array([0.0625] * 4 + [0.25]))
    rolled = dem.rollover(s, promote_fully_paired=False)
    assert rolled.r.tolist() == [0.125, 0.1875, 0.1875, 0.1875]
    assert rolled.z[0] == 0.0625


def test_rollover_clamps_event_slack_only():
    s = dem.DemState(
        4,
        np.array([0.1, -1e-10, 0.1, 0.1]),
        np.array([0.0, 0.0, 0.0, -5e-10, 0.5]),
    )
    rolled = dem.rollover(s)
    assert rolled.r[1] == 0.0
    assert rolled.r[3] == pytest.approx(0.1 - 5e-10)
    # entries at or below the clamp width are left alone: they mean a bug
    s2 = dem.DemState(4, np.array([0.1, -1e-8, 0.1, 0.1]), np.zeros(5))
    assert dem.rollover(s2).r[1] == -1e-8


def test_stage_two_relabel_drops_open_shells():
    s = dem.DemState(4, np.array([0.2, 0.1, 0.0, 0.05]),
                     np.array([0.01, 0.02, 0.0, 0.0, 0.4]))
    s2 = dem.phase2_init(s)
    assert s2.z is None
    assert s2.r.tolist() == [0.2, 0.1, 0.0, 0.05, 0.4]


# -- single legs ------------------------------------------------------------


def test_first_round_ends_when_red_points_run_out():
    s0 = dem.init_state(4, 1e-5)
    events = [dem._ev_negativity()] + dem._guard_events_phase1(4)
    end, fired, raw = dem.integrate_phase(dem.rhs_phase1(4), s0, events)
    assert fired == "guard_red_points"
    # the seed holds 3e-5 red points and they drain at rate just above 1
    assert 2.9e-5 < raw.t < 3.01e-5
    # crossing time is bisected to 1e-10, so the pool sits at the guard
    assert end.points_red == pytest.approx(dem.DELTA_STOP, abs=1e-9)


def test_fixed_grid_matches_adaptive_on_first_round():
    s0 = dem.init_state(4, 1e-5)
    events = [dem._ev_negativity()] + dem._guard_events_phase1(4)
    end_a, _, _ = dem.integrate_phase(dem.rhs_phase1(4), s0, events)
    leg_steps = max(dem.FIXED_MIN_LEG_STEPS, 10**6 // dem.FIXED_LEG_SHARE)
    h, t_cap = dem._fixed_leg_grid(leg_steps, s0.points_red, 1.0)
    end_f, fired, _ = dem.integrate_phase(
        dem.rhs_phase1(4), s0, events, mode="fixed", h_fixed=h, t_max=t_cap
    )
    assert fired == "guard_red_points"
    diff = max(
        float(np.abs(end_a.r - end_f.r).max()),
        float(np.abs(end_a.z - end_f.z).max()),
    )
    assert diff <= 1e-8


def test_fixed_leg_grid_spans_the_drain_time():
    h, t_cap = dem._fixed_leg_grid(1000, 0.4, 2.0)
    assert t_cap == pytest.approx((17 / 16) * 0.4 / 2.0)
    assert h == pytest.approx(t_cap / 1000)
    # dead pool: the span falls back to the guard width, not zero
    h0, t0 = dem._fixed_leg_grid(1000, 0.0, 1.0)
    assert t0 == pytest.approx((17 / 16) * dem.DELTA_STOP)
    assert h0 > 0
    # huge pool: capped by the hard ceiling
    _, t_big = dem._fixed_leg_grid(1000, 1e9, 1.0)
    assert t_big == dem.MAX_LEG_TIME


def test_integrate_phase_validation():
    s0 = dem.init_state(4, 1e-5)
    with pytest.raises(ValueError):
        dem.integrate_phase(dem.rhs_phase1(4), s0, [])
    with pytest.raises(ValueError):
        dem.integrate_phase(dem.rhs_phase1(4), s0, NEVER, mode="fixed")
    with pytest.raises(ValueError):
        dem.integrate_phase(dem.rhs_phase1(4), s0, NEVER, mode="bogus")


# -- full runs --------------------------------------------------------------


@pytest.mark.parametrize("d", range(3, 11))
def test_full_run_end_values_are_stable(d, dem_adaptive):
    res = dem_adaptive[d]
    assert res.alpha_upper == pytest.approx(ALPHA_PINNED[d], abs=1e-6)
    assert res.phase_count == PHASES_PINNED[d]
    assert res.flags == FLAGS_PINNED[d]


@pytest.mark.parametrize("d", [7, 8, 9, 10])
def test_high_degrees_fail_to_balance(d, dem_adaptive):
    res = dem_adaptive[d]
    assert "no_balance" in res.flags
    assert res.alpha_upper < 1e-6


def test_handoff_precedes_the_crossing_promotion(dem_adaptive):
    res = dem_adaptive[4]
    assert res.handoff_state.red_mass < res.stop_fraction
    assert dem.rollover(res.handoff_state).red_mass >= res.stop_fraction


def test_run_rejects_bad_params():
    with pytest.raises(ValueError):
        dem.run_dem(2)
    with pytest.raises(ValueError):
        dem.run_dem(4, stop_fraction=0.0)
    with pytest.raises(ValueError):
        dem.run_dem(4, stop_fraction=0.6)


def test_default_seed_mass_is_degree_aware():
    assert dem.run_dem(4).eps == 1e-5
    assert dem.run_dem(9).eps == 1e-4


def test_literal_promotion_variant_completes():
    res = dem.run_dem(4, promote_fully_paired=False)
    assert math.isfinite(res.alpha_upper)
    assert 0.0 < res.alpha_upper <= 1.0


def test_partial_stop_fraction_run():
    res = dem.run_dem(4, 1e-3, stop_fraction=0.25)
    assert res.final_state.red_mass - res.final_state.r[1] >= 0.25 - 1e-8


def test_trajectory_csv(tmp_path):
    res = dem.run_dem(4, 1e-3, stop_fraction=0.05, keep_trajectory=True)
    assert res.trajectory
    path = tmp_path / "traj.csv"
    dem.trajectory_to_csv(res, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "phase,t,var_name,value"
    names = {line.split(",")[2] for line in lines[1:]}
    assert {"r0", "z0", "z4"} <= names
    stage2 = {line.split(",")[2] for line in lines[1:]
              if int(line.split(",")[0]) >= res.phase_count}
    assert "r4" in stage2 and "z0" not in stage2
