"""Entorhinal layer-V pyramidal cell model and its reductions.

Six-dimensional current-balance model with transient sodium, delayed
rectifier potassium, leak, persistent sodium and slow potassium currents;
the three-dimensional subthreshold reduction (m, h, p at steady state);
and the modified variant in which the persistent sodium current is
replaced by a tonic applied drive (g_Nap = 0).  Equilibrium and Hopf
analysis over the applied current round out the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .ode import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    VectorField,
    integrate,
)

__all__ = [
    "FullParams",
    "GateCurves",
    "EquilibriumReport",
    "gate_curves",
    "full_rhs",
    "reduced_rhs",
    "full_field",
    "reduced_field",
    "variant_field",
    "variant_params",
    "rest_state_guess",
    "find_equilibrium",
    "find_rest_state",
    "hopf_scan",
    "classify_criticality",
    "membrane_currents",
    "VARIANTS",
    "NewtonError",
    "HopfScanError",
    "InconclusiveProbeError",
    "SPIKE_THRESHOLD_MV",
    "TAU_P_MS",
]

# Activation time constant of the persistent sodium gate.  The source
# model treats p as a fast gate; 0.15 ms keeps it effectively slaved to
# p_inf(v) on the timescales of interest.
TAU_P_MS = 0.15

# Upward crossing of this voltage separates action potentials from
# subthreshold oscillations in all probes.
SPIKE_THRESHOLD_MV = -20.0


@dataclass(frozen=True)
class FullParams:
    """Biophysical parameters (conductances mS/cm^2, potentials mV)."""

    C: float = 1.5
    g_Na: float = 52.0
    g_K: float = 11.0
    g_L: float = 0.1
    g_Nap: float = 0.21
    g_Ks: float = 2.0
    E_Na: float = 55.0
    E_K: float = -90.0
    E_L: float = -54.0
    tau_w: float = 90.0
    I_app: float = 0.0

    def __post_init__(self):
        if self.C <= 0.0 or self.tau_w <= 0.0:
            raise ValueError("C and tau_w must be positive")
        for name in ("g_Na", "g_K", "g_L", "g_Nap", "g_Ks"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    def with_I(self, I_app: float) -> "FullParams":
        return replace(self, I_app=I_app)


DEFAULT_PARAMS = FullParams()


@dataclass(frozen=True)
class GateCurves:
    m_inf: float
    h_inf: float
    n_inf: float
    p_inf: float
    w_inf: float
    tau_m: float
    tau_h: float
    tau_n: float
    tau_p: float


def _alpha_m(v: float) -> float:
    # -0.1(v+23)/(exp(-0.1(v+23)) - 1); removable singularity at v = -23.
    u = -0.1 * (v + 23.0)
    if abs(u) < 1e-5:
        return 1.0 - 0.5 * u + u * u / 12.0
    return u / math.expm1(u)


def _beta_m(v: float) -> float:
    return 4.0 * math.exp(-(v + 48.0) / 18.0)


def _alpha_n(v: float) -> float:
    # -0.01(v+27)/(exp(-0.1(v+27)) - 1); removable singularity at v = -27.
    u = -0.1 * (v + 27.0)
    if abs(u) < 1e-5:
        return 0.1 * (1.0 - 0.5 * u + u * u / 12.0)
    return 0.1 * u / math.expm1(u)


def _beta_n(v: float) -> float:
    return 0.125 * math.exp(-(v + 37.0) / 80.0)


def _alpha_h(v: float) -> float:
    return 0.07 * math.exp(-(v + 37.0) / 20.0)


def _beta_h(v: float) -> float:
    return 1.0 / (math.exp(-0.1 * (v + 7.0)) + 1.0)


def p_inf(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-(v + 38.0) / 6.5))


def w_inf(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-(v + 35.0) / 6.5))


def gate_curves(v: float) -> GateCurves:
    """Steady-state values and time constants of all gating variables at v."""
    am, bm = _alpha_m(v), _beta_m(v)
    an, bn = _alpha_n(v), _beta_n(v)
    ah, bh = _alpha_h(v), _beta_h(v)
    return GateCurves(
        m_inf=am / (am + bm),
        h_inf=ah / (ah + bh),
        n_inf=an / (an + bn),
        p_inf=p_inf(v),
        w_inf=w_inf(v),
        tau_m=1.0 / (am + bm),
        tau_h=1.0 / (ah + bh),
        tau_n=1.0 / (an + bn),
        tau_p=TAU_P_MS,
    )


def alpha_m(v: float) -> float:
    return _alpha_m(v)


def alpha_n(v: float) -> float:
    return _alpha_n(v)


def membrane_currents(v, m, h, n, p, w, params: FullParams):
    """Individual ionic currents (I_Na, I_K, I_L, I_Nap, I_Ks)."""
    return (
        params.g_Na * m**3 * h * (v - params.E_Na),
        params.g_K * n**4 * (v - params.E_K),
        params.g_L * (v - params.E_L),
        params.g_Nap * p * (v - params.E_Na),
        params.g_Ks * w * (v - params.E_K),
    )


def full_rhs(state: np.ndarray, params: FullParams) -> np.ndarray:
    """Six-dimensional model; state = (v, m, h, n, p, w)."""
    v, m, h, n, p, w = state
    g = gate_curves(v)
    i_na, i_k, i_l, i_nap, i_ks = membrane_currents(v, m, h, n, p, w, params)
    dv = (-i_na - i_k - i_l - i_nap - i_ks + params.I_app) / params.C
    return np.array(
        [
            dv,
            (g.m_inf - m) / g.tau_m,
            (g.h_inf - h) / g.tau_h,
            (g.n_inf - n) / g.tau_n,
            (g.p_inf - p) / g.tau_p,
            (g.w_inf - w) / params.tau_w,
        ]
    )


def reduced_rhs(state: np.ndarray, params: FullParams) -> np.ndarray:
    """Three-dimensional subthreshold reduction; state = (v, w, n).

    m, h and p are slaved to their steady-state curves; w keeps the
    constant time constant tau_w and n keeps tau_n(v).
    """
    v, w, n = state
    g = gate_curves(v)
    i_na, i_k, i_l, i_nap, i_ks = membrane_currents(
        v, g.m_inf, g.h_inf, n, g.p_inf, w, params
    )
    dv = (-i_na - i_k - i_l - i_nap - i_ks + params.I_app) / params.C
    return np.array(
        [
            dv,
            (w_inf(v) - w) / params.tau_w,
            (g.n_inf - n) / g.tau_n,
        ]
    )


def full_field(params: FullParams) -> VectorField:
    return VectorField(6, full_rhs, params, name="full")


def reduced_field(params: FullParams) -> VectorField:
    return VectorField(3, reduced_rhs, params, name="reduced3")


def variant_params(variant: str, params: FullParams) -> FullParams:
    if variant in ("full", "reduced3"):
        return params
    if variant == "modified3":
        return replace(params, g_Nap=0.0)
    if variant == "full-noINa":
        return replace(params, g_Na=0.0)
    if variant == "full-noIK":
        return replace(params, g_K=0.0)
    raise ValueError(f"unknown model variant {variant!r}")


def variant_field(variant: str, params: FullParams = DEFAULT_PARAMS) -> VectorField:
    """Model variant by CLI identifier.

    full / full-noINa / full-noIK are six-dimensional; reduced3 keeps all
    currents with m, h, p slaved; modified3 is reduced3 with the
    persistent sodium current removed (tonic I_app as the drive).
    """
    p = variant_params(variant, params)
    if variant in ("full", "full-noINa", "full-noIK"):
        return VectorField(6, full_rhs, p, name=variant)
    return VectorField(3, reduced_rhs, p, name=variant)


VARIANTS = ("full", "reduced3", "modified3", "full-noINa", "full-noIK")


def rest_state_guess(field: VectorField, v_lo: float = -80.0, v_hi: float = -30.0) -> np.ndarray:
    """Initial Newton guess: gates at steady state, v minimizing |v'|."""
    best = None
    for v in np.linspace(v_lo, v_hi, 101):
        g = gate_curves(v)
        if field.dimension == 6:
            y = np.array([v, g.m_inf, g.h_inf, g.n_inf, g.p_inf, g.w_inf])
        else:
            y = np.array([v, g.w_inf, g.n_inf])
        r = abs(float(field(y)[0]))
        if best is None or r < best[0]:
            best = (r, y)
    return best[1]


class NewtonError(RuntimeError):
    pass


@dataclass
class EquilibriumReport:
    state: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    stability: str  # stable | unstable | marginal

    @property
    def max_real_part(self) -> float:
        return float(np.max(self.eigenvalues.real))


def fd_jacobian(field: VectorField, y: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the field at y."""
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        h = step * max(1.0, abs(float(y[j])))
        yp = y.copy()
        ym = y.copy()
        yp[j] += h
        ym[j] -= h
        J[:, j] = (field(yp) - field(ym)) / (2.0 * h)
    return J


def _classify_stability(eigenvalues: np.ndarray, tol: float = 1e-9) -> str:
    re = eigenvalues.real
    if np.all(re < -tol):
        return "stable"
    if np.any(re > tol):
        return "unstable"
    return "marginal"


def find_equilibrium(
    field: VectorField,
    guess: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> EquilibriumReport:
    """Damped Newton solve of field(y) = 0 with finite-difference Jacobian.

    Converges to ||rhs||_inf <= tol or raises NewtonError.
    """
    y = np.asarray(guess, dtype=float).copy()
    f = field(y)
    fnorm = float(np.max(np.abs(f)))
    for _ in range(max_iter):
        if fnorm <= tol:
            J = fd_jacobian(field, y)
            eigs = np.linalg.eigvals(J)
            order = np.argsort(-eigs.real)
            return EquilibriumReport(y, J, eigs[order], _classify_stability(eigs))
        J = fd_jacobian(field, y)
        try:
            dy = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular Jacobian at {y}") from exc
        lam = 1.0
        for _ in range(10):
            y_try = y + lam * dy
            f_try = field(y_try)
            fnorm_try = float(np.max(np.abs(f_try)))
            if np.isfinite(fnorm_try) and (fnorm_try < fnorm or fnorm_try <= tol):
                break
            lam *= 0.5
        else:
            raise NewtonError("Newton damping failed to reduce the residual")
        y, f, fnorm = y_try, f_try, fnorm_try
    if fnorm <= tol:
        J = fd_jacobian(field, y)
        eigs = np.linalg.eigvals(J)
        order = np.argsort(-eigs.real)
        return EquilibriumReport(y, J, eigs[order], _classify_stability(eigs))
    raise NewtonError(f"Newton did not converge (residual {fnorm:g})")


def find_rest_state(variant: str, params: FullParams = DEFAULT_PARAMS) -> EquilibriumReport:
    field = variant_field(variant, params)
    return find_equilibrium(field, rest_state_guess(field))


class HopfScanError(RuntimeError):
    pass


def _complex_pair_max_real(eigenvalues: np.ndarray, im_tol: float = 1e-6) -> float | None:
    re = [float(l.real) for l in eigenvalues if abs(float(l.imag)) > im_tol]
    return max(re) if re else None


def hopf_scan(
    params: FullParams,
    variant: str,
    I_range: tuple[float, float],
    n_grid: int = 41,
    tol_I: float = 1e-4,
) -> float:
    """Applied current at which a complex pair crosses the imaginary axis.

    Continues the equilibrium branch over I_range on a coarse grid, then
    bisects the sign change of the pair's real part to |dI| <= tol_I.
    """
    I_lo, I_hi = I_range
    base = variant_params(variant, params)
    field = variant_field(variant, params)

    grid = np.linspace(I_lo, I_hi, n_grid)
    guess = rest_state_guess(field.with_params(base.with_I(float(grid[0]))))
    alphas: list[float] = []
    states: list[np.ndarray] = []
    for I in grid:
        f_I = field.with_params(base.with_I(float(I)))
        try:
            rep = find_equilibrium(f_I, guess)
        except NewtonError as exc:
            raise HopfScanError(f"equilibrium continuation failed at I={I:g}") from exc
        guess = rep.state
        a = _complex_pair_max_real(rep.eigenvalues)
        alphas.append(a if a is not None else math.nan)
        states.append(rep.state)

    bracket = None
    for i in range(len(grid) - 1):
        a0, a1 = alphas[i], alphas[i + 1]
        if math.isnan(a0) or math.isnan(a1):
            continue
        if a0 == 0.0:
            return float(grid[i])
        if a0 * a1 < 0.0:
            bracket = (float(grid[i]), float(grid[i + 1]), states[i])
            break
    if bracket is None:
        raise HopfScanError(f"no Hopf crossing of a complex pair in {I_range}")

    lo, hi, guess = bracket
    f_lo = field.with_params(base.with_I(lo))
    a_lo = _complex_pair_max_real(find_equilibrium(f_lo, guess).eigenvalues)
    while hi - lo > tol_I:
        mid = 0.5 * (lo + hi)
        rep = find_equilibrium(field.with_params(base.with_I(mid)), guess)
        guess = rep.state
        a_mid = _complex_pair_max_real(rep.eigenvalues)
        if a_mid is None:
            raise HopfScanError(f"complex pair lost during bisection at I={mid:g}")
        if (a_lo < 0.0) == (a_mid < 0.0):
            lo, a_lo = mid, a_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class InconclusiveProbeError(RuntimeError):
    pass


def _probe_trace(
    field: VectorField,
    y0: np.ndarray,
    duration_ms: float,
    config: IntegratorConfig,
) -> tuple[np.ndarray, np.ndarray]:
    traj = integrate(field, y0, 0.0, duration_ms, config)
    return traj.ts, traj.component(0)


def _spike_count(ts: np.ndarray, vs: np.ndarray, t_from: float) -> int:
    sel = ts >= t_from
    v = vs[sel]
    if v.size < 3:
        return 0
    up = (v[:-1] < SPIKE_THRESHOLD_MV) & (v[1:] >= SPIKE_THRESHOLD_MV)
    return int(np.count_nonzero(up))


def _envelope_rate(
    ts: np.ndarray, vs: np.ndarray, v_eq: float, t_from: float
) -> tuple[float, float]:
    """Exponential rate of the oscillation envelope after t_from.

    Fits ln(peak height above v_eq) linearly in peak time; returns
    (rate, last_amplitude).  Deterministic traces make this an accurate
    decay/growth measurement even for rates of order 1e-4 / ms.
    """
    sel = ts >= t_from
    t, v = ts[sel], vs[sel]
    peaks_t, peaks_a = [], []
    for i in range(1, v.size - 1):
        if v[i] >= v[i - 1] and v[i] > v[i + 1] and v[i] > v_eq + 1e-9:
            peaks_t.append(t[i])
            peaks_a.append(v[i] - v_eq)
    if len(peaks_t) < 4:
        return 0.0, (peaks_a[-1] if peaks_a else 0.0)
    x = np.asarray(peaks_t)
    y = np.log(np.asarray(peaks_a))
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, float(peaks_a[-1])


def classify_criticality(
    variant: str,
    I_hopf: float,
    params: FullParams = DEFAULT_PARAMS,
    kick_mv: float = 30.0,
    duration_ms: float = 3000.0,
    config: IntegratorConfig | None = None,
) -> str:
    """Hopf criticality by bistability probing around I_hopf.

    Subcritical: a strong voltage kick just below I_hopf lands on a
    coexisting attractor (repetitive spiking, or an oscillation whose
    envelope does not decay at the linear rate of the stable focus).
    Supercritical: kicks below I_hopf decay at the linear rate, while
    just above it a small oscillation persists with amplitude growing
    away from the bifurcation.  The linear rate comes from the
    equilibrium eigensolve at each probe current, so slow near-threshold
    decay is not mistaken for a sustained attractor.
    """
    if config is None:
        config = IntegratorConfig(rtol=1e-8, atol=1e-10)
    base = variant_params(variant, params)
    field = variant_field(variant, params)

    def probe(I: float, kick: float, duration: float | None = None):
        f_I = field.with_params(base.with_I(I))
        rep = find_equilibrium(f_I, rest_state_guess(f_I))
        pair = _complex_pair_max_real(rep.eigenvalues)
        y0 = rep.state.copy()
        y0[0] += kick
        ts, vs = _probe_trace(f_I, y0, duration or duration_ms, config)
        return ts, vs, float(rep.state[0]), pair

    # Below threshold: look for a coexisting attractor.  The coexistence
    # window can be narrow, so retreat toward the bifurcation if needed.
    for delta in (0.05, 0.02, 0.01):
        ts, vs, v_eq, lam = probe(I_hopf - delta, kick_mv)
        if _spike_count(ts, vs, ts[0] + 0.5 * (ts[-1] - ts[0])) >= 5:
            return "subcritical"
        rate, amp = _envelope_rate(ts, vs, v_eq, ts[0] + 0.5 * (ts[-1] - ts[0]))
        if lam is not None and amp > 0.5 and rate > lam / 3.0:
            return "subcritical"

    # Above threshold the equilibrium is unstable, so a small kick cannot
    # die out; a bounded small-amplitude oscillation that grows with the
    # distance from the bifurcation is the supercritical signature, while
    # runaway to spiking marks a subcritical/large attractor.
    amps = []
    for delta in (0.02, 0.05):
        ts, vs, v_eq, lam = probe(I_hopf + delta, 1.0, duration=4000.0)
        if _spike_count(ts, vs, ts[0]) >= 3:
            amps.append(math.inf)
            continue
        _, amp = _envelope_rate(ts, vs, v_eq, ts[0] + 0.5 * (ts[-1] - ts[0]))
        amps.append(amp if amp > 0.8 else 0.0)
    if 0.0 < amps[0] and 0.9 * amps[0] < amps[1] and max(amps) < 25.0:
        return "supercritical"
    raise InconclusiveProbeError(
        f"criticality probes inconclusive for {variant} at I_hopf={I_hopf:g}"
    )
