"""Driver-level checks against problems with known closed-form answers."""

import math

import numpy as np
import pytest

from vbisect.integrate import Event, solve_adaptive, solve_fixed


def _harmonic(t, y):
    return np.array([y[1], -y[0]])


def test_adaptive_exponential_decay():
    res = solve_adaptive(lambda t, y: -y, 0.0, np.array([1.0]), 2.0)
    assert res.status == "t_end"
    assert res.t == 2.0
    assert abs(res.y[0] - math.exp(-2)) < 1e-9


def test_adaptive_harmonic_half_period():
    res = solve_adaptive(_harmonic, 0.0, np.array([0.0, 1.0]), math.pi)
    assert abs(res.y[0]) < 1e-8
    assert abs(res.y[1] + 1.0) < 1e-8


def test_fixed_grid_is_fourth_order():
    # halving h on the logistic problem should cut the error ~16x
    exact = 1.0 / (1.0 + 4.0 * math.exp(-2.0))
    f = lambda t, y: y * (1 - y)
    errs = []
    for h in (0.1, 0.05):
        res = solve_fixed(f, 0.0, np.array([0.2]), 2.0, h)
        errs.append(abs(res.y[0] - exact))
    assert 12.0 < errs[0] / errs[1] < 20.0


def test_fixed_final_step_lands_on_t_end():
    res = solve_fixed(lambda t, y: y * (1 - y), 0.0, np.array([0.2]), 1.0, 0.3)
    assert res.t == 1.0
    assert res.status == "t_end"
    assert res.n_steps == 4


def test_event_location_exponential_doubling():
    ev = Event(lambda t, y: y[0] - 2.0, direction=1, name="doubled")
    res = solve_adaptive(lambda t, y: y, 0.0, np.array([1.0]), 5.0, [ev])
    assert res.status == "event"
    assert res.event == "doubled"
    assert abs(res.t - math.log(2)) < 1e-8


@pytest.mark.parametrize(
    "direction,expected_t",
    [(-1, math.pi), (1, 2 * math.pi)],
)
def test_event_direction_filter(direction, expected_t):
    """sin(t) from t=0.5: the falling zero is at pi, the rising one at 2*pi."""
    y0 = np.array([math.sin(0.5), math.cos(0.5)])
    ev = Event(lambda t, y: y[0], direction=direction, name="zero")
    res = solve_adaptive(_harmonic, 0.5, y0, 10.0, [ev])
    assert res.status == "event"
    assert abs(res.t - expected_t) < 1e-7


def test_earlier_event_wins():
    evs = [
        Event(lambda t, y: t - 0.7, name="late"),
        Event(lambda t, y: t - 0.5, name="early"),
    ]
    res = solve_adaptive(lambda t, y: np.array([1.0]), 0.0, np.array([0.0]), 2.0, evs)
    assert res.event == "early"
    assert abs(res.t - 0.5) < 1e-8


def test_no_event_fires_at_leg_start():
    # g == 0 exactly at t0 and decreasing afterwards; a falling crossing
    # needs g > 0 strictly before the step, so the leg runs to t_end
    ev = Event(lambda t, y: y[0] - 1.0, direction=-1, name="at_start")
    res = solve_adaptive(lambda t, y: -y, 0.0, np.array([1.0]), 1.0, [ev])
    assert res.status == "t_end"
    assert res.event is None


def test_max_steps_reported():
    res = solve_adaptive(lambda t, y: -y, 0.0, np.array([1.0]), 100.0, max_steps=5)
    assert res.status == "max_steps"


def test_keep_every_records_path():
    res = solve_adaptive(lambda t, y: -y, 0.0, np.array([1.0]), 1.0, keep_every=1)
    ts = [t for t, _ in res.path]
    assert ts[0] == 0.0
    assert ts[-1] == res.t
    assert all(a < b for a, b in zip(ts, ts[1:]))


def test_fixed_event_and_path():
    ev = Event(lambda t, y: y[0] - 0.5, direction=1, name="half")
    res = solve_fixed(
        lambda t, y: y * (1 - y), 0.0, np.array([0.2]), 5.0, 0.01, [ev], keep_every=10
    )
    assert res.status == "event"
    # logistic from 0.2 reaches 0.5 at t = ln 4
    assert abs(res.t - math.log(4)) < 1e-6
    assert res.path
