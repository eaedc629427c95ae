"""Explicit Runge-Kutta steppers with sign-change event location.

Two drivers share one event protocol: an adaptive Dormand-Prince 5(4) pair
for accuracy-controlled work and a classical fixed-step RK4 for
budgeted-step-count runs. Events are scalar functions of (t, y); a driver
stops at the first sign change and refines the crossing time by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

RhsFn = Callable[[float, np.ndarray], np.ndarray]
EventFn = Callable[[float, np.ndarray], float]

# Dormand-Prince 5(4) tableau. c nodes, a coefficients, 5th-order weights b,
# and the embedded 4th-order weights bh used for the error estimate.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_BH = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

T_TOL = 1e-10  # absolute tolerance for event crossing times


@dataclass
class Event:
    """Scalar event g(t, y); fires when g changes sign across a step.

    direction: +1 fires only on rising crossings (g < 0 before, >= 0 after),
    -1 only on falling ones, 0 on both. The driver never fires an event at
    the initial point of a leg; callers that need entry checks do them
    before integrating.
    """

    fn: EventFn
    direction: int = 0
    name: str = ""

    def __call__(self, t: float, y: np.ndarray) -> float:
        return self.fn(t, y)

    def fired(self, g0: float, g1: float) -> bool:
        rising = g0 < 0.0 and g1 >= 0.0
        falling = g0 > 0.0 and g1 <= 0.0
        if self.direction > 0:
            return rising
        if self.direction < 0:
            return falling
        return rising or falling


@dataclass
class IntResult:
    t: float
    y: np.ndarray
    status: str  # "event" | "t_end" | "max_steps" | "h_underflow"
    event: str | None = None
    n_steps: int = 0
    n_rejected: int = 0
    path: list[tuple[float, np.ndarray]] = field(default_factory=list)


def _dp54_step(f: RhsFn, t: float, y: np.ndarray, h: float, k1: np.ndarray | None):
    """One DP54 step: returns (y5, error_estimate, k1, k7).

    FSAL pair: k7 is f at y5 and serves as the next step's k1; the returned
    k1 lets a rejected step's caller retry without re-evaluating f(t, y).
    """
    k = np.empty((7, y.size))
    k[0] = f(t, y) if k1 is None else k1
    for i in range(1, 7):
        k[i] = f(t + _DP_C[i] * h, y + h * (_DP_A[i] @ k[:i]))
    y5 = y + h * (_DP_B @ k)
    err = h * ((_DP_B - _DP_BH) @ k)
    return y5, err, k[0].copy(), k[6]


def _rk4_step(f: RhsFn, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _locate_event(step_fn, t0: float, y0: np.ndarray, h: float, ev: Event, g0: float):
    """Bisect the step length until the crossing is bracketed within T_TOL.

    step_fn(h) must integrate from (t0, y0) by exactly h. Returns (t, y) at
    the right end of the final bracket, so the fired condition holds there.
    """
    lo, hi = 0.0, h
    y_hi = step_fn(hi)
    while hi - lo > T_TOL:
        mid = 0.5 * (lo + hi)
        y_mid = step_fn(mid)
        if ev.fired(g0, ev(t0 + mid, y_mid)):
            hi, y_hi = mid, y_mid
        else:
            lo = mid
    return t0 + hi, y_hi


def _first_crossing(step_fn, t0, y0, h, fired_events, g_start):
    """Earliest crossing among the events that fired on this step."""
    best = None
    for idx, ev in fired_events:
        t_ev, y_ev = _locate_event(step_fn, t0, y0, h, ev, g_start[idx])
        if best is None or t_ev < best[0]:
            best = (t_ev, y_ev, ev)
    return best


def solve_adaptive(
    f: RhsFn,
    t0: float,
    y0: np.ndarray,
    t_end: float,
    events: Sequence[Event] = (),
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    h0: float | None = None,
    max_steps: int = 5_000_000,
    keep_every: int = 0,
) -> IntResult:
    """Integrate y' = f(t, y) with DP54, stopping at t_end or the first event.

    keep_every > 0 records every that-many-th accepted state (plus the last)
    in result.path.
    """
    t = float(t0)
    y = np.asarray(y0, dtype=float).copy()
    res = IntResult(t=t, y=y, status="t_end")
    if keep_every:
        res.path.append((t, y.copy()))
    if t_end <= t:
        return res

    h = h0 if h0 is not None else min(1e-6, (t_end - t))
    g = [ev(t, y) for ev in events]
    k1 = None
    while t < t_end:
        if res.n_steps + res.n_rejected >= max_steps:
            res.status = "max_steps"
            break
        h = min(h, t_end - t)
        if h < 1e-14 * max(1.0, abs(t)):
            res.status = "h_underflow"
            break
        y_new, err, k1, k7 = _dp54_step(f, t, y, h, k1)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm > 1.0:
            res.n_rejected += 1
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            continue

        t_new = t + h
        fired = []
        g_new = [ev(t_new, y_new) for ev in events]
        for i, ev in enumerate(events):
            if ev.fired(g[i], g_new[i]):
                fired.append((i, ev))
        if fired:
            step_fn = lambda hh: _dp54_step(f, t, y, hh, None)[0] if hh > 0 else y
            t_ev, y_ev, ev = _first_crossing(step_fn, t, y, h, fired, g)
            res.t, res.y = t_ev, y_ev
            res.status, res.event = "event", ev.name
            res.n_steps += 1
            if keep_every:
                res.path.append((t_ev, y_ev.copy()))
            return res

        t, y, g, k1 = t_new, y_new, g_new, k7
        res.n_steps += 1
        if keep_every and res.n_steps % keep_every == 0:
            res.path.append((t, y.copy()))
        if err_norm > 0:
            h *= min(5.0, 0.9 * err_norm ** -0.2)
        else:
            h *= 5.0

    res.t, res.y = t, y
    if keep_every and (not res.path or res.path[-1][0] != t):
        res.path.append((t, y.copy()))
    return res


def solve_fixed(
    f: RhsFn,
    t0: float,
    y0: np.ndarray,
    t_end: float,
    h: float,
    events: Sequence[Event] = (),
    *,
    max_steps: int | None = None,
    keep_every: int = 0,
) -> IntResult:
    """Classical RK4 with constant step h; same event semantics as the
    adaptive driver. The final step is shortened to land on t_end."""
    if h <= 0:
        raise ValueError("step must be positive")
    t = float(t0)
    y = np.asarray(y0, dtype=float).copy()
    res = IntResult(t=t, y=y, status="t_end")
    if keep_every:
        res.path.append((t, y.copy()))
    if t_end <= t:
        return res

    g = [ev(t, y) for ev in events]
    while t < t_end:
        if max_steps is not None and res.n_steps >= max_steps:
            res.status = "max_steps"
            break
        hs = min(h, t_end - t)
        y_new = _rk4_step(f, t, y, hs)
        t_new = t + hs
        g_new = [ev(t_new, y_new) for ev in events]
        fired = [(i, ev) for i, ev in enumerate(events) if ev.fired(g[i], g_new[i])]
        if fired:
            step_fn = lambda hh: _rk4_step(f, t, y, hh) if hh > 0 else y
            t_ev, y_ev, ev = _first_crossing(step_fn, t, y, hs, fired, g)
            res.t, res.y = t_ev, y_ev
            res.status, res.event = "event", ev.name
            res.n_steps += 1
            if keep_every:
                res.path.append((t_ev, y_ev.copy()))
            return res
        t, y, g = t_new, y_new, g_new
        res.n_steps += 1
        if keep_every and res.n_steps % keep_every == 0:
            res.path.append((t, y.copy()))

    res.t, res.y = t, y
    if keep_every and (not res.path or res.path[-1][0] != t):
        res.path.append((t, y.copy()))
    return res
