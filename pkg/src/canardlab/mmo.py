"""MMO signatures, rotation counting, canard shooting, and the
MMO-to-spiking transition.

Trajectory classification works on local maxima of one state variable:
maxima above a spike threshold count as large-amplitude events (L),
maxima below it with sufficient prominence as subthreshold oscillations
(s).  For the microscope chart the spike threshold is the right fold of
F mapped through the blow-up, so a loop counts as a spike exactly when
it passes the fold and runs the relaxation branch.

Canard connections are located by two-sided shooting at the section
xb = 0: the attracting super-slow manifold is continued forward from a
seed on S1D, the repelling manifold is swept backward from a grid of
initial conditions, and the signed zb-offset at matching yb is bisected
to zero in mu_bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import canonical as cn
from .ode import (
    EventSpec,
    IntegratorConfig,
    NonFiniteStateError,
    Trajectory,
    VectorField,
    integrate,
)

__all__ = [
    "MMOSignature",
    "CanardGapReport",
    "TransitionSample",
    "TransitionCurve",
    "TransversalitySample",
    "classify_signature",
    "classify_micro_trace",
    "classify_neuron_trace",
    "local_maxima",
    "rotation_type",
    "s1d_seed_micro",
    "standard_micro_trace",
    "continue_s1d_forward",
    "special_solution_section",
    "repelling_manifold_slice",
    "canard_gap",
    "find_canard_mu",
    "mmo_to_spiking_threshold",
    "transition_curve",
    "extrapolate_transition",
    "transversality_scan",
    "large_mu_no_mmo",
    "MICRO_CONFIG",
    "BLOWUP_LIMIT",
    "SectionError",
    "ClassificationError",
    "BracketError",
]

BLOWUP_LIMIT = 1e6

MICRO_CONFIG = IntegratorConfig(rtol=1e-8, atol=1e-10)


class SectionError(RuntimeError):
    pass


class ClassificationError(RuntimeError):
    pass


class BracketError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# signature classification


@dataclass(frozen=True)
class MMOSignature:
    """Pattern L1^s1 L2^s2 ... with a coarse regime label."""

    blocks: tuple[tuple[int, int], ...]
    regime: str  # steady | sto_only | mmo | spiking
    periodic: bool
    period: float | None
    n_spikes: int
    n_stos: int

    def pattern(self) -> str:
        return " ".join(f"{L}^{s}" for L, s in self.blocks) if self.blocks else "-"


def local_maxima(
    ts: np.ndarray, us: np.ndarray, min_prominence: float
) -> list[tuple[float, float]]:
    """(time, value) of interior local maxima with quadratic refinement.

    Prominence is measured against the lower of the two neighbouring
    minima of the sampled sequence.
    """
    out = []
    n = us.size
    i = 1
    while i < n - 1:
        if us[i] >= us[i - 1] and us[i] > us[i + 1]:
            # plateau-safe left edge
            j = i
            while j > 0 and us[j - 1] == us[i]:
                j -= 1
            # prominence: drop to the nearest lower minima on both sides
            lo_l = us[i]
            k = j - 1
            while k >= 0:
                lo_l = min(lo_l, us[k])
                if us[k] > us[i]:
                    break
                k -= 1
            lo_r = us[i]
            k = i + 1
            while k < n:
                lo_r = min(lo_r, us[k])
                if us[k] > us[i]:
                    break
                k += 1
            prom = us[i] - max(lo_l, lo_r)
            if prom >= min_prominence:
                t_ref, u_ref = _refine_max(ts, us, i)
                out.append((t_ref, u_ref))
        i += 1
    return out


def _refine_max(ts, us, i) -> tuple[float, float]:
    # vertex of the quadratic through the three bracketing samples
    t0, t1, t2 = ts[i - 1], ts[i], ts[i + 1]
    u0, u1, u2 = us[i - 1], us[i], us[i + 1]
    d1 = (u1 - u0) / (t1 - t0)
    d2 = (u2 - u1) / (t2 - t1)
    curv = (d2 - d1) / (t2 - t0)
    if curv >= 0.0:
        return float(t1), float(u1)
    t_star = 0.5 * (t0 + t1) - d1 / (2.0 * curv)
    t_star = min(max(t_star, float(t0)), float(t2))
    u_star = u0 + d1 * (t_star - t0) + curv * (t_star - t0) * (t_star - t1)
    return float(t_star), float(max(u_star, u1))


def classify_signature(
    trace: Trajectory,
    var_index: int = 0,
    spike_threshold: float = 0.0,
    sto_band: tuple[float, float] = (-math.inf, 0.0),
    transient_frac: float = 0.2,
    min_prominence: float = 1e-3,
) -> MMOSignature:
    """Classify a trajectory into an MMO signature.

    Maxima above spike_threshold are L-events, maxima inside sto_band
    are s-events; the leading transient_frac of the time span is
    discarded.  Periodicity is detected by repetition of signature
    blocks.
    """
    if len(trace) < 8:
        raise ClassificationError("trace too short to classify")
    ts, us = trace.ts, trace.component(var_index)
    t_cut = ts[0] + transient_frac * (ts[-1] - ts[0])

    maxima = [(t, u) for t, u in local_maxima(ts, us, min_prominence) if t >= t_cut]
    symbols: list[tuple[float, str]] = []
    for t, u in maxima:
        if u >= spike_threshold:
            symbols.append((t, "L"))
        elif sto_band[0] <= u <= sto_band[1]:
            symbols.append((t, "s"))

    n_spikes = sum(1 for _, s in symbols if s == "L")
    n_stos = len(symbols) - n_spikes

    if not symbols:
        return MMOSignature((), "steady", False, None, 0, 0)

    # blocks start at spikes; a leading s-run is attached cyclically to
    # the final block
    blocks: list[list[int]] = []
    block_times: list[float] = []
    leading = 0
    for t, s in symbols:
        if s == "L":
            if blocks and blocks[-1][1] == 0:
                blocks[-1][0] += 1
            else:
                blocks.append([1, 0])
                block_times.append(t)
        else:
            if blocks:
                blocks[-1][1] += 1
            else:
                leading += 1
    if leading and blocks:
        blocks[-1][1] += leading

    if n_spikes == 0:
        regime = "sto_only"
    elif n_stos == 0:
        regime = "spiking"
    elif any(L >= 1 and s >= 1 for L, s in blocks):
        regime = "mmo"
    else:
        regime = "spiking"

    periodic, period = _detect_period(
        [tuple(b) for b in blocks], block_times
    )
    return MMOSignature(
        tuple(tuple(b) for b in blocks), regime, periodic, period, n_spikes, n_stos
    )


def _detect_period(blocks, block_times) -> tuple[bool, float | None]:
    # the final block may be truncated by the horizon; ignore it
    core = blocks[:-1]
    times = block_times[: len(core)]
    if len(core) < 2:
        return False, None
    for p in range(1, len(core) // 2 + 1):
        if all(core[i] == core[i + p] for i in range(len(core) - p)):
            gaps = [times[i + p] - times[i] for i in range(len(times) - p)]
            return True, float(np.mean(gaps)) if gaps else None
    return False, None


def classify_micro_trace(
    trace: Trajectory,
    p: cn.MicroParams,
    transient_frac: float = 0.25,
    min_prominence: float = 1e-3,
) -> MMOSignature:
    """Microscope-chart classification: fold passage separates L from s.

    A maximum beyond the right fold of F (xb >= x_max/eps) ran the
    relaxation branch and counts as a spike; smaller maxima (the |xb| <= 3
    neighbourhood of the blown-up fold region) are subthreshold loops.
    """
    if p.eps <= 0.0:
        raise ClassificationError("microscope classification requires eps > 0")
    thr = cn.fold_x_max(p.D1) / p.eps
    return classify_signature(
        trace,
        var_index=0,
        spike_threshold=thr,
        sto_band=(-math.inf, thr),
        transient_frac=transient_frac,
        min_prominence=min_prominence,
    )


def classify_neuron_trace(
    trace: Trajectory,
    spike_threshold: float = -20.0,
    sto_band: tuple[float, float] = (-90.0, -20.0),
    transient_frac: float = 0.2,
    min_prominence: float = 0.05,
) -> MMOSignature:
    """Voltage-trace classification with millivolt thresholds."""
    return classify_signature(
        trace,
        var_index=0,
        spike_threshold=spike_threshold,
        sto_band=sto_band,
        transient_frac=transient_frac,
        min_prominence=min_prominence,
    )


# ---------------------------------------------------------------------------
# rotation type


def rotation_type(
    trace: Trajectory, eps: float, delta: float | None = None
) -> tuple[int, bool]:
    """Count of non-degenerate extrema of x during the first passage
    through the cube V = [-delta, delta]^3 in canonical coordinates.

    The trace is a microscope-chart trajectory; delta defaults to eps
    (one microscope unit).  An extremum is non-degenerate when
    |x''| = eps^2 |x - z| exceeds 1e-8.  Returns (k, monotone) where
    monotone reports whether x increased monotonically through V.
    """
    if delta is None:
        delta = eps
    xs = trace.ys[:, 0] * eps
    ys = trace.ys[:, 1] * eps**2
    zs = trace.ys[:, 2] * eps
    inside = (np.abs(xs) <= delta) & (np.abs(ys) <= delta) & (np.abs(zs) <= delta)
    if not np.any(inside):
        raise SectionError("trajectory never enters the fold cube V")
    idx = np.flatnonzero(inside)
    # first contiguous passage
    breaks = np.flatnonzero(np.diff(idx) > 1)
    stop = idx[breaks[0]] if breaks.size else idx[-1]
    start = idx[0]
    seg_x = xs[start : stop + 1]
    seg_z = zs[start : stop + 1]
    k = 0
    for i in range(1, seg_x.size - 1):
        is_max = seg_x[i] > seg_x[i + 1] and seg_x[i] >= seg_x[i - 1]
        is_min = seg_x[i] < seg_x[i + 1] and seg_x[i] <= seg_x[i - 1]
        if (is_max or is_min) and eps**2 * abs(seg_x[i] - seg_z[i]) > 1e-8:
            k += 1
    dx = np.diff(seg_x)
    monotone = bool(np.all(dx >= 0.0)) or bool(np.all(dx <= 0.0))
    return k, monotone


# ---------------------------------------------------------------------------
# shooting at the section xb = 0


def _section_event() -> EventSpec:
    return EventSpec(g=lambda y: y[0], direction="rising", terminal=True)


def _blowup_event() -> EventSpec:
    return EventSpec(
        g=lambda y: BLOWUP_LIMIT - float(np.max(np.abs(y))),
        direction="falling",
        terminal=True,
    )


def s1d_seed_micro(p: cn.MicroParams, rho: float | None = None) -> np.ndarray:
    """Seed on the super-slow manifold S1D, mapped to the microscope chart.

    rho is the distance from the fold in canonical x (default 2*eps,
    which puts the seed at xb = -2).
    """
    if p.eps <= 0.0:
        raise ValueError("S1D seed requires eps > 0")
    if rho is None:
        rho = 2.0 * p.eps
    mu = p.eps * p.mu_bar
    x = -rho
    y, z = cn.s1d_curve(x, mu, p.a, p.b, p.D1)
    return cn.canon_to_micro(np.array([x, float(y), float(z)]), p.eps)


def continue_s1d_forward(
    p: cn.MicroParams,
    rho: float | None = None,
    t_max: float = 400.0,
    config: IntegratorConfig = MICRO_CONFIG,
    seed: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Continue the attracting super-slow manifold to the section xb = 0.

    Integrates the microscope chart forward from an S1D seed (or an
    explicit seed) and returns (t, state) at the first rising crossing
    of xb = 0.
    """
    if seed is None:
        seed = s1d_seed_micro(p, rho)
    traj = integrate(
        cn.micro_field(p), seed, 0.0, t_max, config, [_section_event(), _blowup_event()]
    )
    if traj.termination != "terminal_event" or not traj.events:
        raise SectionError(f"no section crossing before t={t_max} ({traj.termination})")
    hit = traj.events[-1]
    if hit.index != 0:
        raise SectionError("trajectory blew up before reaching the section")
    return hit.t, hit.state


def special_solution_section(
    p: cn.MicroParams,
    sigma0: float = 1e-2,
    t_max: float = 4000.0,
    config: IntegratorConfig = MICRO_CONFIG,
) -> tuple[float, np.ndarray]:
    """Section state of the special solution gamma_mubar (eps = 0 chart)."""
    p0 = cn.MicroParams(p.mu_bar, p.a, p.b, eps=0.0, D1=p.D1)
    seed = cn.asymptotic_seed_special(p.mu_bar, p.a, p.b, sigma0)
    traj = integrate(
        cn.micro_field(p0), seed, 0.0, t_max, config, [_section_event(), _blowup_event()]
    )
    if traj.termination != "terminal_event" or not traj.events or traj.events[-1].index != 0:
        raise SectionError("special solution did not reach the section xb = 0")
    hit = traj.events[-1]
    return hit.t, hit.state


def repelling_manifold_slice(
    p: cn.MicroParams,
    z_grid: Sequence[float],
    start: tuple[float, float] = (5.0, 10.0),
    t_max: float = 400.0,
    config: IntegratorConfig = MICRO_CONFIG,
) -> tuple[np.ndarray, list[tuple[float, str]]]:
    """Approximate the repelling slow manifold at the section xb = 0.

    Each grid value zb0 starts a backward integration from
    (start_x, start_y, zb0); the first xb = 0 crossing is recorded.
    Returns (points, dropped): points is an array of rows
    (yb, zb, zb0) sorted by yb; dropped lists (zb0, reason).
    """
    sx, sy = start
    ev_sec = EventSpec(g=lambda y: y[0], direction="any", terminal=True)
    ev_blow = _blowup_event()
    rows = []
    dropped: list[tuple[float, str]] = []
    for z0 in z_grid:
        y0 = np.array([sx, sy, float(z0)])
        try:
            traj = integrate(cn.micro_field(p), y0, 0.0, -t_max, config, [ev_sec, ev_blow])
        except NonFiniteStateError:
            dropped.append((float(z0), "non-finite state"))
            continue
        if traj.termination != "terminal_event" or not traj.events:
            dropped.append((float(z0), f"no crossing ({traj.termination})"))
            continue
        hit = traj.events[-1]
        if hit.index != 0:
            dropped.append((float(z0), "blow-up before section"))
            continue
        rows.append((float(hit.state[1]), float(hit.state[2]), float(z0)))
    if rows:
        rows.sort(key=lambda r: r[0])
    return np.array(rows, dtype=float).reshape(-1, 3), dropped


@dataclass(frozen=True)
class CanardGapReport:
    mu_bar: float
    eps: float
    forward_point: np.ndarray
    repelling_slice: np.ndarray  # rows (yb, zb, zb0), sorted by yb
    gap: float  # zb offset of the forward point at matching yb


def _interp_slice(slice_pts: np.ndarray, yb: float) -> float:
    ys = slice_pts[:, 0]
    if not (ys[0] <= yb <= ys[-1]):
        raise SectionError(
            f"forward point yb={yb:g} outside repelling slice range [{ys[0]:g}, {ys[-1]:g}]"
        )
    return float(np.interp(yb, ys, slice_pts[:, 1]))


def repelling_edge(
    p: cn.MicroParams,
    bracket: tuple[float, float] = (0.5, 4.0),
    tol: float = 1e-9,
    config: IntegratorConfig = MICRO_CONFIG,
) -> float:
    """Largest zb0 whose backward sweep still reaches the section xb = 0.

    The backward family from (5, 10, zb0) reaches the section only for
    zb0 below a critical value; the critical trajectory is the best
    available approximation of the repelling manifold itself, so the
    slice is sampled on a ladder accumulating at this edge.
    """
    lo, hi = bracket

    def crossing(z0: float) -> bool:
        pts, _ = repelling_manifold_slice(p, [z0], config=config)
        return pts.shape[0] == 1

    if not crossing(lo):
        raise SectionError(f"backward sweep from zb0={lo:g} already misses the section")
    if crossing(hi):
        raise SectionError(f"backward sweep from zb0={hi:g} still reaches the section")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if crossing(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _edge_ladder(edge: float, width: float = 1e-2, n: int = 22) -> list[float]:
    return [edge - width * 0.5**k for k in range(n)]


def canard_gap(
    p: cn.MicroParams,
    z_grid: Sequence[float] | None = None,
    rho: float | None = None,
    sigma0: float = 1e-2,
    config: IntegratorConfig = MICRO_CONFIG,
) -> CanardGapReport:
    """Signed distance between the continued attracting manifold and the
    repelling manifold at the section xb = 0.

    For eps > 0 the forward point continues S1D; at eps = 0 it continues
    the special solution gamma_mubar.  When z_grid is omitted the
    repelling slice is sampled on a ladder of zb0 values accumulating at
    the critical (edge) trajectory of the backward family.
    """
    if p.eps > 0.0:
        _, fwd = continue_s1d_forward(p, rho=rho, config=config)
    else:
        _, fwd = special_solution_section(p, sigma0=sigma0, config=config)
    yb_f = float(fwd[1])

    if z_grid is None:
        z_grid = _edge_ladder(repelling_edge(p, config=config))
    pts, _ = repelling_manifold_slice(p, z_grid, config=config)
    if pts.shape[0] < 2:
        raise SectionError("repelling slice has fewer than two valid points")
    gap = float(fwd[2]) - _interp_slice(pts, yb_f)
    return CanardGapReport(p.mu_bar, p.eps, fwd, pts, gap)


def find_canard_mu(
    p: cn.MicroParams,
    bracket: tuple[float, float],
    tol: float = 1e-6,
    config: IntegratorConfig = MICRO_CONFIG,
) -> tuple[float, CanardGapReport, CanardGapReport]:
    """mu_bar of the canard connection, by bisection on the gap sign.

    Returns (mu_bar, report_lo, report_hi) where the two reports carry
    the bracketing gap evaluations of opposite sign (the certificate).
    """
    lo, hi = bracket
    rep_lo = canard_gap(p.with_mu_bar(lo), config=config)
    rep_hi = canard_gap(p.with_mu_bar(hi), config=config)
    if rep_lo.gap == 0.0:
        return lo, rep_lo, rep_hi
    if rep_hi.gap == 0.0:
        return hi, rep_lo, rep_hi
    if (rep_lo.gap < 0.0) == (rep_hi.gap < 0.0):
        raise BracketError(
            f"gap has the same sign at both bracket ends: "
            f"gap({lo:g})={rep_lo.gap:g}, gap({hi:g})={rep_hi.gap:g}"
        )
    cert_lo, cert_hi = rep_lo, rep_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        rep_mid = canard_gap(p.with_mu_bar(mid), config=config)
        if rep_mid.gap == 0.0:
            return mid, cert_lo, cert_hi
        if (rep_mid.gap < 0.0) == (cert_lo.gap < 0.0):
            lo, cert_lo = mid, rep_mid
        else:
            hi, cert_hi = mid, rep_mid
    return 0.5 * (lo + hi), cert_lo, cert_hi


# ---------------------------------------------------------------------------
# MMO-to-spiking transition


@dataclass(frozen=True)
class TransitionSample:
    eps: float
    mu_star: float
    bracket_lo: float
    bracket_hi: float
    regime_lo: str
    regime_hi: str
    ambiguous: bool = False


@dataclass(frozen=True)
class TransitionCurve:
    samples: tuple[TransitionSample, ...]

    def mu_stars(self) -> np.ndarray:
        return np.array([s.mu_star for s in self.samples])

    def eps_values(self) -> np.ndarray:
        return np.array([s.eps for s in self.samples])


def classify_horizon(eps: float) -> float:
    """Integration horizon covering several MMO periods at a given eps."""
    return max(300.0, 72.0 / eps)


def standard_micro_trace(
    p: cn.MicroParams,
    horizon: float | None = None,
    config: IntegratorConfig = MICRO_CONFIG,
) -> Trajectory:
    """Attractor trace from the standard initial condition on S1D."""
    if horizon is None:
        horizon = classify_horizon(p.eps)
    seed = s1d_seed_micro(p)
    return integrate(cn.micro_field(p), seed, 0.0, horizon, config, [_blowup_event()])


def _regime_at(p: cn.MicroParams, mu_bar: float, horizon, config) -> str:
    trace = standard_micro_trace(p.with_mu_bar(mu_bar), horizon, config)
    return classify_micro_trace(trace, p).regime


def mmo_to_spiking_threshold(
    p: cn.MicroParams,
    bracket: tuple[float, float],
    tol: float = 1e-4,
    horizon: float | None = None,
    config: IntegratorConfig = MICRO_CONFIG,
) -> TransitionSample:
    """Bisect classify_signature between mmo and spiking regimes.

    The bracket must classify as mmo at the low end and spiking at the
    high end.  If a bisection point classifies as neither, the ambiguous
    window is reported as an interval rather than collapsed to a point.
    """
    lo, hi = bracket
    reg_lo = _regime_at(p, lo, horizon, config)
    reg_hi = _regime_at(p, hi, horizon, config)
    if reg_lo != "mmo" or reg_hi != "spiking":
        raise BracketError(
            f"bracket ends do not straddle the transition: {lo:g} -> {reg_lo}, {hi:g} -> {reg_hi}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        reg = _regime_at(p, mid, horizon, config)
        if reg == "mmo":
            lo = mid
        elif reg == "spiking":
            hi = mid
        else:
            return TransitionSample(
                p.eps, 0.5 * (lo + hi), lo, hi, reg_lo, reg_hi, ambiguous=True
            )
    return TransitionSample(p.eps, 0.5 * (lo + hi), lo, hi, "mmo", "spiking")


def _widen_bracket(p, lo, hi, horizon, config, max_expand=6):
    step = 0.5 * (hi - lo)
    for _ in range(max_expand):
        if _regime_at(p, lo, horizon, config) != "mmo":
            lo -= step
            continue
        if _regime_at(p, hi, horizon, config) != "spiking":
            hi += step
            continue
        return lo, hi
    raise BracketError(f"could not establish an mmo/spiking bracket near [{lo:g}, {hi:g}]")


def transition_curve(
    eps_values: Sequence[float],
    a: float,
    b: float,
    D1: float = -0.4,
    bracket0: tuple[float, float] = (0.125, 0.155),
    tol: float = 1e-4,
    config: IntegratorConfig = MICRO_CONFIG,
) -> TransitionCurve:
    """Transition threshold mu_bar*(eps) over a grid of eps values.

    eps values are processed in decreasing order; each bracket is seeded
    from the previous threshold (the curve decreases toward mu_bar_0 as
    eps -> 0).
    """
    samples = []
    lo, hi = bracket0
    for eps in sorted(eps_values, reverse=True):
        p = cn.MicroParams(mu_bar=lo, a=a, b=b, eps=float(eps), D1=D1)
        lo_e, hi_e = _widen_bracket(p, lo, hi, None, config)
        s = mmo_to_spiking_threshold(p, (lo_e, hi_e), tol=tol, config=config)
        samples.append(s)
        lo, hi = s.mu_star - 0.015, s.mu_star + 0.003
    return TransitionCurve(tuple(samples))


def extrapolate_transition(curve: TransitionCurve) -> float:
    """Linear extrapolation of mu_bar*(eps) to eps = 0 from the two
    smallest eps samples."""
    if len(curve.samples) < 2:
        raise ValueError("need at least two samples to extrapolate")
    pts = sorted(curve.samples, key=lambda s: s.eps)
    (e0, m0), (e1, m1) = (pts[0].eps, pts[0].mu_star), (pts[1].eps, pts[1].mu_star)
    slope = (m1 - m0) / (e1 - e0)
    return m0 - slope * e0


# ---------------------------------------------------------------------------
# transversality of the special solution


@dataclass(frozen=True)
class TransversalitySample:
    mu_bar: float
    crossed: bool
    x_minus_z: float | None
    t_cross: float | None


def transversality_scan(
    mu_grid: Sequence[float],
    a: float,
    b: float,
    sigma0: float = 1e-2,
    arm_level: float = -0.05,
    t_max: float = 4000.0,
    config: IntegratorConfig = MICRO_CONFIG,
) -> list[TransversalitySample]:
    """xb - zb at the first crossing of the nullsurface yb = xb^2 by the
    special solution gamma_mubar of the eps = 0 chart.

    The launch point sits on the nullsurface itself (leading-order seed),
    so the crossing detector arms only once yb - xb^2 has settled below
    arm_level; xb'' = -(xb - zb) at a crossing, so a nonzero recorded
    value witnesses transversality.  No crossing before blow-up is
    reported with crossed=False (the polynomial solution never crosses).
    """
    out = []
    for mu_bar in mu_grid:
        p = cn.MicroParams(float(mu_bar), a, b, eps=0.0)
        seed = cn.asymptotic_seed_special(p.mu_bar, a, b, sigma0)
        g_null = lambda y: y[1] - y[0] * y[0]
        arm = EventSpec(g=lambda y: g_null(y) - arm_level, direction="falling", terminal=True)
        leg1 = integrate(cn.micro_field(p), seed, 0.0, t_max, config, [arm, _blowup_event()])
        if leg1.termination != "terminal_event" or leg1.events[-1].index != 0:
            out.append(TransversalitySample(p.mu_bar, False, None, None))
            continue
        t0, y0 = leg1.events[-1].t, leg1.events[-1].state
        cross = EventSpec(g=g_null, direction="rising", terminal=True)
        leg2 = integrate(cn.micro_field(p), y0, t0, t0 + t_max, config, [cross, _blowup_event()])
        if leg2.termination == "terminal_event" and leg2.events[-1].index == 0:
            hit = leg2.events[-1]
            out.append(
                TransversalitySample(
                    p.mu_bar, True, float(hit.state[0] - hit.state[2]), hit.t
                )
            )
        else:
            out.append(TransversalitySample(p.mu_bar, False, None, None))
    return out


# ---------------------------------------------------------------------------
# large-mu_bar behaviour


def large_mu_no_mmo(
    p: cn.MicroParams,
    horizon: float | None = None,
    config: IntegratorConfig = MICRO_CONFIG,
) -> bool:
    """True when the attractor from the S1D seed shows no subthreshold
    oscillations (relaxation spiking or rest; no MMO)."""
    trace = standard_micro_trace(p, horizon, config)
    sig = classify_micro_trace(trace, p)
    return sig.n_stos == 0
