"""Deterministic fluid-limit version of the two-stage coloring process.

The scaled class sizes of the simulation concentrate, as n grows, on the
solution of two ODE systems. Stage one evolves red classes r_0..r_{d-1}
and untouched-side classes z_0..z_d in rounds: integrate until a stopping
event (a class about to go negative, or a point-count normalizer
exhausted), then promote z_0..z_{d-1} into the red block and start the
next round. Once a promotion would push the red vertex mass past the
target fraction, the state just before that promotion seeds stage two,
which drains the low red classes until the balance event and reads off
the boundary fraction.

Both right-hand sides are conservative: component sums vanish identically,
so total mass moves only through the explicit promotions (and the
negativity clamp, which is bounded by the event tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import Event, IntResult, solve_adaptive, solve_fixed

DELTA_STOP = 1e-9  # point-count guard, in fractions of n
EPS_NEG = 1e-12  # negativity tolerance
CLAMP_TOL = 1e-9  # promotion clamps entries in (-CLAMP_TOL, 0); covers the
#                   slack the event bisection leaves past -EPS_NEG
EPS_DEFAULT = 1e-5
EPS_DEFAULT_D9 = 1e-4  # d = 9 needs a larger seed to start cleanly
FIXED_LEG_SHARE = 32  # fixed mode: each leg's grid gets steps/FIXED_LEG_SHARE
FIXED_MIN_LEG_STEPS = 256
MAX_LEG_TIME = 64.0
MAX_ROUNDS = 400
MAX_STAGE2_LEGS = 50


@dataclass
class DemState:
    """Scaled class sizes. Stage one: r has d entries and z has d+1;
    stage two: r has d+1 entries (the last is the untouched pool) and z
    is None."""

    d: int
    r: np.ndarray
    z: np.ndarray | None = None

    @property
    def points_red(self) -> float:
        return float(np.arange(self.r.size) @ self.r)

    @property
    def points_white(self) -> float:
        if self.z is None:
            return 0.0
        return float(np.arange(self.z.size) @ self.z)

    @property
    def points_all(self) -> float:
        return self.points_red + self.points_white

    @property
    def red_mass(self) -> float:
        """Red vertex fraction: classes 0..d-1 (never the untouched pool)."""
        return float(self.r[: self.d].sum())

    @property
    def low_points(self) -> float:
        m = (self.d + 1) // 2
        return float(np.arange(m + 1) @ self.r[: m + 1])

    @property
    def mass(self) -> float:
        total = float(self.r.sum())
        if self.z is not None:
            total += float(self.z.sum())
        return total

    def copy(self) -> "DemState":
        return DemState(
            self.d, self.r.copy(), None if self.z is None else self.z.copy()
        )


@dataclass
class DemRunResult:
    d: int
    eps: float
    stop_fraction: float
    mode: str
    alpha_upper: float
    round_end_states: list = field(default_factory=list)  # stage 1, pre-promotion
    post_roll_states: list = field(default_factory=list)
    handoff_state: DemState | None = None  # seed of stage two
    stage2_states: list = field(default_factory=list)  # end state of each leg
    final_state: DemState | None = None
    flags: list = field(default_factory=list)
    n_steps: int = 0
    n_rejected: int = 0
    trajectory: list = field(default_factory=list)  # (phase, t, y) samples

    @property
    def phase_count(self) -> int:
        return len(self.round_end_states)


# -- state packing ---------------------------------------------------------


def _pack1(s: DemState) -> np.ndarray:
    return np.concatenate([s.r, s.z])


def _unpack1(d: int, y: np.ndarray) -> DemState:
    return DemState(d, y[:d].copy(), y[d:].copy())


# -- right-hand sides ------------------------------------------------------


def rhs_phase1(d: int):
    """Stage-one derivative of [r_0..r_{d-1}, z_0..z_d].

    Each step pairs a red point (uniform among the red unpaired, rate
    1/points_red per point) with a partner uniform among all unpaired
    points (rate 1/points_all per point), so every class flows one step
    down at the combined per-point rate. Written as a telescoping
    difference, which makes the component sum vanish identically.
    """
    i_r = np.arange(d + 1, dtype=float)  # virtual r_d = 0
    i_z = np.arange(d + 2, dtype=float)  # virtual z_{d+1} = 0

    def f(t: float, y: np.ndarray) -> np.ndarray:
        r = y[:d]
        z = y[d:]
        wr = np.zeros(d + 1)
        wr[:d] = i_r[:d] * r
        wz = np.zeros(d + 2)
        wz[: d + 1] = i_z[: d + 1] * z
        p_red = wr.sum()
        p_all = p_red + wz.sum()
        dr = (1.0 / p_red + 1.0 / p_all) * np.diff(wr)
        dz = np.diff(wz) / p_all
        return np.concatenate([dr, dz])

    return f


def rhs_phase2(d: int):
    """Stage-two derivative of [r_0..r_d].

    Second-point flow: every class down one step at rate 1/points_red per
    point (class d included, loss-only). First-point flow: only the low
    classes 1..ceil(d/2) are drawn, so mass moves down within that range
    at rate 1/low_points per point; the top low class gets no gain term,
    which is the only form whose components sum to zero.
    """
    m = (d + 1) // 2
    idx = np.arange(d + 1, dtype=float)

    def f(t: float, y: np.ndarray) -> np.ndarray:
        w = idx * y
        wext = np.append(w, 0.0)  # virtual r_{d+1} = 0
        p_red = w[1:].sum()
        sec = np.diff(wext) / p_red
        wl = np.append(w, 0.0)
        wl[m + 1 :] = 0.0
        fir = np.diff(wl) / wl.sum() if wl.any() else np.zeros(d + 1)
        return sec + fir

    return f


def rhs_phase2_fallback(d: int):
    """Stage-two derivative once the low classes are exhausted: both
    endpoints drawn uniformly from all red unpaired points, so each class
    loses mass downward at twice the single-draw rate."""
    idx = np.arange(d + 1, dtype=float)

    def f(t: float, y: np.ndarray) -> np.ndarray:
        w = idx * y
        wext = np.append(w, 0.0)
        p_red = w.sum()
        return 2.0 * np.diff(wext) / p_red

    return f


# -- construction and round transitions ------------------------------------


def init_state(d: int, eps: float) -> DemState:
    """Seed profile of a small red tree: eps/(d-1) saturated roots, eps
    leaves with d-1 open points each, everything else untouched."""
    if not 0.0 < eps < (d - 1) / d:
        raise ValueError(f"eps must be in (0, {(d - 1) / d}), got {eps}")
    r = np.zeros(d)
    r[0] = eps / (d - 1)
    r[d - 1] = eps
    z = np.zeros(d + 1)
    z[d] = 1.0 - eps - eps / (d - 1)
    return DemState(d, r, z)


def rollover(s: DemState, promote_fully_paired: bool = True) -> DemState:
    """End-of-round promotion: z_0..z_{d-1} accumulate into r_0..r_{d-1}
    (optionally leaving z_0 in place), the untouched pool stays, and
    entries the integrator left just below zero are clamped to 0."""
    d = s.d
    r = s.r.copy()
    z = np.zeros(d + 1)
    lo = 0 if promote_fully_paired else 1
    r[lo:] += s.z[lo:d]
    if not promote_fully_paired:
        z[0] = s.z[0]
    z[d] = s.z[d]
    for arr in (r, z):
        np.copyto(arr, 0.0, where=(arr < 0.0) & (arr > -CLAMP_TOL))
    return DemState(d, r, z)


def phase2_init(s: DemState) -> DemState:
    """Relabel for stage two: carry r_0..r_{d-1}, the untouched pool
    becomes class d, and the z block is dropped (any stranded shell mass
    goes with it)."""
    r = np.empty(s.d + 1)
    r[: s.d] = s.r
    r[s.d] = s.z[s.d]
    return DemState(s.d, r, None)


# -- events ----------------------------------------------------------------


def _ev_negativity() -> Event:
    return Event(lambda t, y: float(y.min()) + EPS_NEG, direction=-1, name="negativity")


def _ev_guard(weights: np.ndarray, name: str) -> Event:
    w = weights
    return Event(lambda t, y: float(w @ y) - DELTA_STOP, direction=-1, name=name)


def _guard_events_phase1(d: int) -> list[Event]:
    w_red = np.concatenate([np.arange(d, dtype=float), np.zeros(d + 1)])
    w_all = np.concatenate(
        [np.arange(d, dtype=float), np.arange(d + 1, dtype=float)]
    )
    return [
        _ev_guard(w_red, "guard_red_points"),
        _ev_guard(w_all, "guard_total_points"),
    ]


def red_mass_event(d: int, frac: float) -> Event:
    """Red vertex mass rising through frac; classes 0..d-1 of either
    stage's layout."""
    return Event(
        lambda t, y: float(y[:d].sum()) - frac, direction=1, name="red_mass_target"
    )


def _ev_balance(d: int, frac: float) -> Event:
    def g(t: float, y: np.ndarray) -> float:
        return float(y[:d].sum()) - float(y[1]) - frac

    return Event(g, direction=1, name="balance")


# -- drivers ---------------------------------------------------------------


def integrate_phase(
    rhs,
    s0: DemState,
    events: list[Event],
    *,
    mode: str = "adaptive",
    h_fixed: float | None = None,
    t_max: float = MAX_LEG_TIME,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    keep_every: int = 0,
) -> tuple[DemState, str | None, IntResult]:
    """One integration leg from s0 to its earliest event.

    Returns (end state, fired event name or None, raw solver result). The
    caller supplies events appropriate to the stage; this function only
    converts between DemState and the flat vector."""
    if not events:
        raise ValueError("events must be nonempty")
    y0 = _pack1(s0) if s0.z is not None else s0.r
    if mode == "adaptive":
        res = solve_adaptive(
            rhs, 0.0, y0, t_max, events, rtol=rtol, atol=atol, keep_every=keep_every
        )
    elif mode == "fixed":
        if h_fixed is None:
            raise ValueError("fixed mode needs h_fixed")
        res = solve_fixed(rhs, 0.0, y0, t_max, h_fixed, events, keep_every=keep_every)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not np.all(np.isfinite(res.y)):
        raise FloatingPointError(f"non-finite state at t={res.t}: {res.y}")
    end = _unpack1(s0.d, res.y) if s0.z is not None else DemState(s0.d, res.y.copy())
    return end, res.event, res


def _fixed_leg_grid(leg_steps: int, p_red: float, drain_rate: float):
    """Uniform RK4 grid for one leg of the fixed mode.

    The red unpaired pool loses at least drain_rate points per unit time
    (exactly 1 + p_red/p_all in stage one, exactly 2 in stage two), so
    every stopping event lands strictly before p_red/drain_rate; a 1/16
    margin keeps the crossing interior to the grid. Early rounds last
    only O(eps), which is why a whole-run step size cannot work here.
    """
    t_cap = min(MAX_LEG_TIME, (17.0 / 16.0) * max(p_red, DELTA_STOP) / drain_rate)
    return t_cap / leg_steps, t_cap


def run_dem(
    d: int,
    eps: float | None = None,
    stop_fraction: float = 0.5,
    *,
    mode: str = "adaptive",
    steps: int = 10**6,
    promote_fully_paired: bool = True,
    keep_trajectory: bool = False,
) -> DemRunResult:
    """Full two-stage run for one degree; returns the bound and the full
    phase history.

    mode "adaptive" uses the embedded 5(4) pair at tight tolerance; mode
    "fixed" uses classical RK4 on uniform per-leg grids, each leg taking
    an equal share of the whole-run step budget over a span sized from
    the red-pool drain bound. alpha_upper is the sum of the
    open red classes 1..d-1 at the final state over stop_fraction. Runs
    whose stage two cannot reach balance (exhausted point pools) read off
    at the stopped state and carry explanatory flags.
    """
    if d < 3:
        raise ValueError("degree must be at least 3")
    if not 0.0 < stop_fraction <= 0.5:
        raise ValueError("stop_fraction must be in (0, 0.5]")
    if eps is None:
        eps = EPS_DEFAULT_D9 if d == 9 else EPS_DEFAULT
    leg_steps = max(FIXED_MIN_LEG_STEPS, steps // FIXED_LEG_SHARE)
    h_fixed: float | None = None
    t_cap = MAX_LEG_TIME
    keep = 0
    if keep_trajectory:
        keep = 1 if mode == "adaptive" else max(1, steps // 2000)

    res = DemRunResult(
        d=d, eps=eps, stop_fraction=stop_fraction, mode=mode, alpha_upper=math.nan
    )
    state = init_state(d, eps)
    f1 = rhs_phase1(d)
    ev1 = [_ev_negativity()] + _guard_events_phase1(d)

    handoff = None
    while True:
        if mode == "fixed":
            h_fixed, t_cap = _fixed_leg_grid(leg_steps, state.points_red, 1.0)
        end, fired, raw = integrate_phase(
            f1, state, ev1, mode=mode, h_fixed=h_fixed, t_max=t_cap, keep_every=keep
        )
        res.n_steps += raw.n_steps
        res.n_rejected += raw.n_rejected
        if keep:
            phase_idx = len(res.round_end_states)
            res.trajectory.extend((phase_idx, t, y) for t, y in raw.path)
        if fired is None:
            res.flags.append(f"round_{len(res.round_end_states)}_{raw.status}")
        res.round_end_states.append(end)
        rolled = rollover(end, promote_fully_paired)
        res.post_roll_states.append(rolled)
        if rolled.red_mass >= stop_fraction:
            handoff = end
            break
        state = rolled
        if len(res.round_end_states) >= MAX_ROUNDS:
            res.flags.append("round_cap")
            handoff = end
            break

    res.handoff_state = handoff.copy()
    state = phase2_init(handoff)
    f2 = rhs_phase2(d)
    f2_fb = rhs_phase2_fallback(d)
    m = (d + 1) // 2
    w_low = np.zeros(d + 1)
    w_low[1 : m + 1] = np.arange(1, m + 1, dtype=float)
    w_red_all = np.arange(d + 1, dtype=float)

    balance = _ev_balance(d, stop_fraction)
    done = False
    in_fallback = False
    for _ in range(MAX_STAGE2_LEGS):
        # entry checks: events cannot fire on a pool that is already dead
        p_red_entry = float(w_red_all @ state.r)
        if p_red_entry <= DELTA_STOP:
            res.flags.append("red_exhausted")
            break
        bal0 = state.red_mass - float(state.r[1]) - stop_fraction
        if bal0 >= 0.0:
            res.flags.append("balance_at_entry")
            done = True
            break
        if not in_fallback and float(w_low @ state.r) <= DELTA_STOP:
            in_fallback = True
        if in_fallback:
            if "l_exhausted" not in res.flags:
                res.flags.append("l_exhausted")
            rhs = f2_fb
            guards = [_ev_guard(w_red_all, "guard_red_points")]
        else:
            rhs = f2
            guards = [_ev_guard(w_low, "guard_low_points"),
                      _ev_guard(w_red_all, "guard_red_points")]
        if mode == "fixed":
            h_fixed, t_cap = _fixed_leg_grid(leg_steps, p_red_entry, 2.0)
        end, fired, raw = integrate_phase(
            rhs,
            state,
            [balance, _ev_negativity()] + guards,
            mode=mode,
            h_fixed=h_fixed,
            t_max=t_cap,
            keep_every=keep,
        )
        res.n_steps += raw.n_steps
        res.n_rejected += raw.n_rejected
        if keep:
            phase_idx = len(res.round_end_states) + len(res.stage2_states)
            res.trajectory.extend((phase_idx, t, y) for t, y in raw.path)
        res.stage2_states.append(end)
        state = end
        if fired == "balance":
            done = True
            break
        if fired == "negativity":
            # a class pinned at zero would re-trip forever under the same
            # rhs; the exhausted-pool dynamics take over after clamping
            if "stage2_clamp" not in res.flags:
                res.flags.append("stage2_clamp")
            r = state.r.copy()
            np.copyto(r, 0.0, where=(r < 0.0) & (r > -CLAMP_TOL))
            state = DemState(d, r)
            in_fallback = True
            continue
        if fired == "guard_low_points":
            in_fallback = True
            continue
        if fired == "guard_red_points":
            res.flags.append(fired)
            break
        res.flags.append(f"stage2_{raw.status}")
        break
    else:
        res.flags.append("stage2_leg_cap")
    if not done:
        res.flags.append("no_balance")

    res.final_state = state.copy()
    res.alpha_upper = float(state.r[1:d].sum()) / stop_fraction
    if not 0.0 < res.alpha_upper <= 1.0:
        res.flags.append("alpha_out_of_range")
    return res


def trajectory_to_csv(result: DemRunResult, path) -> None:
    """Dump sampled trajectories as `phase, t, var_name, value` rows.

    Stage-one rows name r0..r{d-1} and z0..zd; stage-two rows (phase
    index past the round count) name r0..rd."""
    d = result.d
    rounds = result.phase_count
    with open(path, "w") as fh:
        fh.write("phase,t,var_name,value\n")
        for phase, t, y in result.trajectory:
            if phase < rounds or y.size == 2 * d + 1:
                names = [f"r{i}" for i in range(d)] + [f"z{i}" for i in range(d + 1)]
            else:
                names = [f"r{i}" for i in range(d + 1)]
            for name, val in zip(names, y):
                fh.write(f"{phase},{t:.10g},{name},{val:.12g}\n")
