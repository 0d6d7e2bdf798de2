"""Adaptive explicit ODE integration with dense event location.

Dormand-Prince 5(4) embedded pair with PI step-size control.  Events are
located on each accepted step by cubic Hermite interpolation refined with
bisection.  Backward integration (t1 < t0) runs the negated field forward
and remaps the time stamps, so there is a single stepping code path.

Everything here is deterministic: identical inputs produce bit-identical
trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "VectorField",
    "IntegratorConfig",
    "EventSpec",
    "EventHit",
    "Trajectory",
    "OdeError",
    "NonFiniteStateError",
    "EventLocationError",
    "integrate",
    "locate_event",
    "DEFAULT_CONFIG",
]

RISING = "rising"
FALLING = "falling"
ANY = "any"

TERM_REACHED_T1 = "reached_t1"
TERM_TERMINAL_EVENT = "terminal_event"
TERM_STEP_FLOOR = "step_floor"
TERM_MAX_STEPS = "max_steps"


class OdeError(RuntimeError):
    """Base class for integration failures."""


class NonFiniteStateError(OdeError):
    """State or derivative became NaN/Inf (blow-up past representable range)."""


class EventLocationError(OdeError):
    """Event bracket invalid or refinement failed to converge."""


@dataclass(frozen=True)
class VectorField:
    """Autonomous right-hand side y' = rhs(y, params) of fixed dimension."""

    dimension: int
    rhs: Callable[[np.ndarray, Any], np.ndarray]
    params: Any = None
    name: str = ""

    def __post_init__(self):
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return self.rhs(y, self.params)

    def with_params(self, params: Any) -> "VectorField":
        return replace(self, params=params)


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float | None = None  # None selects the step automatically
    h_min: float = 1e-12
    h_max: float = math.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("rtol and atol must be positive")
        if not (0.0 < self.h_min <= self.h_max):
            raise ValueError("require 0 < h_min <= h_max")
        if self.h_init is not None and not (self.h_min <= self.h_init <= self.h_max):
            raise ValueError("require h_min <= h_init <= h_max")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class EventSpec:
    """Scalar section function g(state) with a zero-crossing direction filter.

    direction 'rising' fires on g going negative -> positive along the
    traversal order of the trajectory, 'falling' on positive -> negative,
    'any' on either.  Terminal events stop the integration at the located
    crossing.
    """

    g: Callable[[np.ndarray], float]
    direction: str = ANY
    terminal: bool = False
    tol: float = 1e-10

    def __post_init__(self):
        if self.direction not in (RISING, FALLING, ANY):
            raise ValueError("direction must be 'rising', 'falling' or 'any'")
        if self.tol <= 0.0:
            raise ValueError("event tolerance must be positive")

    def matches(self, g_lo: float, g_hi: float) -> bool:
        if self.direction == RISING:
            return g_lo < 0.0 <= g_hi
        if self.direction == FALLING:
            return g_lo > 0.0 >= g_hi
        return (g_lo < 0.0 <= g_hi) or (g_lo > 0.0 >= g_hi)


@dataclass(frozen=True)
class EventHit:
    t: float
    state: np.ndarray
    index: int


@dataclass
class Trajectory:
    """Time-ordered samples of one integration run.

    `ts` is strictly increasing for forward integration and strictly
    decreasing for backward integration.  `ys` has one row per sample.
    """

    ts: np.ndarray
    ys: np.ndarray
    events: list[EventHit]
    termination: str

    def __len__(self) -> int:
        return self.ts.size

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t1(self) -> float:
        return float(self.ts[-1])

    @property
    def y0(self) -> np.ndarray:
        return self.ys[0]

    @property
    def y1(self) -> np.ndarray:
        return self.ys[-1]

    def component(self, i: int) -> np.ndarray:
        return self.ys[:, i]


# Dormand-Prince 5(4) tableau.
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
# b5 - b4, applied to the seven stage derivatives for the error estimate.
_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_PI_BETA1 = 0.7 / 5.0
_PI_BETA2 = 0.4 / 5.0
_MAX_EVENT_ITER = 200


def _hermite(theta: float, h: float, y0, f0, y1, f1) -> np.ndarray:
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1


def _refine_crossing(event: EventSpec, h: float, y0, f0, y1, f1, g_lo: float, g_hi: float):
    """Bisect g along the Hermite interpolant until |g| <= event.tol.

    Returns (theta, state, g_value).  The bracket endpoints must already
    straddle zero in the requested direction.
    """
    lo, hi = 0.0, 1.0
    for _ in range(_MAX_EVENT_ITER):
        mid = 0.5 * (lo + hi)
        ym = _hermite(mid, h, y0, f0, y1, f1)
        gm = float(event.g(ym))
        if abs(gm) <= event.tol:
            return mid, ym, gm
        if (g_lo < 0.0) == (gm < 0.0):
            lo, g_lo = mid, gm
        else:
            hi, g_hi = mid, gm
        if hi - lo <= 1e-16:
            break
    mid = 0.5 * (lo + hi)
    ym = _hermite(mid, h, y0, f0, y1, f1)
    gm = float(event.g(ym))
    if abs(gm) <= 1e3 * event.tol:
        return mid, ym, gm
    raise EventLocationError(
        f"event refinement did not reach |g| <= {event.tol:g} (residual {gm:g})"
    )


def _initial_step(fun, y0, f0, scale, direction_span: float, h_min: float, h_max: float) -> float:
    # Hairer-style heuristic on the tolerance-scaled norms.
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    y1 = y0 + h0 * f0
    f1 = fun(y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1, h_max, direction_span)
    return max(h, h_min)


def integrate(
    field: VectorField,
    state0: Sequence[float] | np.ndarray,
    t0: float,
    t1: float,
    config: IntegratorConfig = DEFAULT_CONFIG,
    events: Sequence[EventSpec] = (),
) -> Trajectory:
    """Integrate field from t0 to t1, locating all event crossings.

    t1 < t0 integrates backward in time (negated field internally); the
    returned sample times then decrease from t0 to t1.  Local error per
    step is controlled against atol + rtol*|state|.  Termination is one of
    reached_t1 / terminal_event / step_floor / max_steps; a NaN or Inf
    state raises NonFiniteStateError instead.
    """
    y0 = np.asarray(state0, dtype=float)
    if y0.ndim != 1 or y0.size != field.dimension:
        raise ValueError(f"state0 must be a vector of length {field.dimension}")
    if t1 == t0:
        raise ValueError("t1 must differ from t0")

    sign = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    rhs = field.rhs
    params = field.params
    if sign > 0.0:
        fun = lambda y: np.asarray(rhs(y, params), dtype=float)
    else:
        fun = lambda y: -np.asarray(rhs(y, params), dtype=float)

    rtol, atol = config.rtol, config.atol
    n_ev = len(events)

    ts = [t0]
    ys = [y0.copy()]
    hits: list[EventHit] = []

    f0 = fun(y0)
    if not np.all(np.isfinite(f0)):
        raise NonFiniteStateError("non-finite derivative at the initial state")
    g_prev = [float(ev.g(y0)) for ev in events]

    scale0 = atol + rtol * np.abs(y0)
    if config.h_init is not None:
        h = min(config.h_init, span)
    else:
        h = _initial_step(fun, y0, f0, scale0, span, config.h_min, config.h_max)

    s = 0.0  # internal forward clock in [0, span]
    y = y0
    err_prev = 1.0
    termination = None
    K = np.empty((7, y0.size))
    n_steps = 0

    while True:
        if n_steps >= config.max_steps:
            termination = TERM_MAX_STEPS
            break
        n_steps += 1

        h = min(h, config.h_max)
        last = False
        if s + h >= span:
            h = span - s
            last = True
        if h < config.h_min:
            h = config.h_min
            last = s + h >= span
            if last:
                h = span - s

        # Six new stages per attempt; the pair is FSAL, so the seventh
        # stage is the derivative at the accepted right endpoint.
        K[0] = f0
        for i in range(1, 6):
            a = _A[i]
            acc = a[0] * K[0]
            for j in range(1, i):
                acc = acc + a[j] * K[j]
            K[i] = fun(y + h * acc)
        y_new = y + h * (
            _A[6][0] * K[0]
            + _A[6][2] * K[2]
            + _A[6][3] * K[3]
            + _A[6][4] * K[4]
            + _A[6][5] * K[5]
        )
        f_new = fun(y_new)
        K[6] = f_new
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
            raise NonFiniteStateError(
                f"non-finite state at internal time {s:g} (step {n_steps})"
            )

        err_vec = (
            _E[0] * K[0]
            + _E[2] * K[2]
            + _E[3] * K[3]
            + _E[4] * K[4]
            + _E[5] * K[5]
            + _E[6] * f_new
        ) * h
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

        if err > 1.0 and h > config.h_min:
            # Reject and retry with a smaller step.
            factor = max(_MIN_FACTOR, _SAFETY * err ** (-_PI_BETA1))
            h = max(h * factor, config.h_min)
            continue
        if err > 1.0 and h <= config.h_min:
            termination = TERM_STEP_FLOOR
            break

        # Accepted step.
        t_lo = t0 + sign * s
        t_hi = t0 + sign * (s + h)

        step_hits: list[tuple[float, EventHit, EventSpec]] = []
        for i_ev in range(n_ev):
            ev = events[i_ev]
            g_hi = float(ev.g(y_new))
            g_lo = g_prev[i_ev]
            if ev.matches(g_lo, g_hi):
                theta, y_star, _ = _refine_crossing(ev, h, y, f0, y_new, f_new, g_lo, g_hi)
                t_star = t0 + sign * (s + theta * h)
                step_hits.append((theta, EventHit(t_star, y_star, i_ev), ev))
            g_prev[i_ev] = g_hi

        if step_hits:
            step_hits.sort(key=lambda item: item[0])
            terminal_hit = None
            for theta, hit, ev in step_hits:
                hits.append(hit)
                if ev.terminal:
                    terminal_hit = hit
                    break
            if terminal_hit is not None:
                ts.append(terminal_hit.t)
                ys.append(terminal_hit.state.copy())
                termination = TERM_TERMINAL_EVENT
                break

        s += h
        y = y_new
        f0 = f_new
        ts.append(t_hi)
        ys.append(y_new.copy())

        if last and s >= span:
            termination = TERM_REACHED_T1
            break

        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = _SAFETY * err ** (-_PI_BETA1) * err_prev ** (_PI_BETA2)
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = max(err, 1e-10)
        h = min(max(h * factor, config.h_min), config.h_max)

    return Trajectory(
        ts=np.asarray(ts, dtype=float),
        ys=np.asarray(ys, dtype=float),
        events=hits,
        termination=termination,
    )


def locate_event(
    field: VectorField,
    t_lo: float,
    state_lo: Sequence[float] | np.ndarray,
    t_hi: float,
    state_hi: Sequence[float] | np.ndarray,
    event: EventSpec,
) -> tuple[float, np.ndarray]:
    """Locate one event crossing inside a bracketing step.

    The bracket must carry a sign change of g consistent with the event
    direction; |g(state*)| <= event.tol at the returned state.
    """
    y_lo = np.asarray(state_lo, dtype=float)
    y_hi = np.asarray(state_hi, dtype=float)
    g_lo = float(event.g(y_lo))
    g_hi = float(event.g(y_hi))
    if g_lo * g_hi >= 0.0 or not event.matches(g_lo, g_hi):
        raise EventLocationError(
            f"no {event.direction} sign change of g in bracket "
            f"(g_lo={g_lo:g}, g_hi={g_hi:g})"
        )
    h = t_hi - t_lo
    f_lo = np.asarray(field(y_lo), dtype=float)
    f_hi = np.asarray(field(y_hi), dtype=float)
    theta, y_star, _ = _refine_crossing(event, h, y_lo, f_lo, y_hi, f_hi, g_lo, g_hi)
    return t_lo + theta * h, y_star
