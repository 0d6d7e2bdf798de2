"""Critical manifold, fold curve, folded node, and canonical parameters.

Treats the three-dimensional subthreshold model as a slow-fast system
(voltage fast; w, n slow), computes the fold of the voltage nullsurface
and the folded-node singularity on it, and carries the model through the
shift / fold-rectification / scaling chain that extracts the parameters
(eps, mu, a, b) of the three-timescale canonical system.

Conventions.  f denotes the voltage balance divided by g_Na (kappa = C/g_Na
multiplies dv/dt), matching the slow-fast form of the model equations; the
expansion coefficients beta, c, d, e reported in TransformChain are
normalized so that the identities

    eps**2 == kappa * c          mu == beta * sqrt(kappa) * c**-1.5
    a == beta * e * sqrt(kappa) * c**-1.5      b == d * sqrt(kappa) * c**-0.5

hold exactly (note the -1/2 exponent in b; see the module tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .neuron import FullParams, gate_curves, w_inf

__all__ = [
    "FoldData",
    "CanonicalParams",
    "TransformChain",
    "MODIFIED_PARAMS",
    "current_balance_scaled",
    "critical_w",
    "fold_voltage",
    "folded_singularity",
    "desingularized_rhs",
    "extract_canonical",
    "folded_node_eig_ratio",
    "canonical_node_ratio",
    "FoldError",
    "ExtractionError",
]

MODIFIED_PARAMS = FullParams(g_Nap=0.0, I_app=17.1)


class FoldError(RuntimeError):
    pass


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class CanonicalParams:
    eps: float
    mu: float
    a: float
    b: float
    D1: float = -0.4

    def satisfies_sign_conditions(self) -> bool:
        """eps > 0 and -b > a > 0 (which implies a + b < 0)."""
        return self.eps > 0.0 and (-self.b) > self.a > 0.0


@dataclass(frozen=True)
class FoldData:
    v_c: float
    w_c: float
    n_c: float
    xi: Callable[[float], float]  # n -> W(v_c, n) along the fold
    eig_desing: tuple[float, float]  # ordered strong, weak

    @property
    def point(self) -> np.ndarray:
        return np.array([self.v_c, self.w_c, self.n_c])


@dataclass(frozen=True)
class TransformChain:
    """Shift, rectification and scalings taking the folded node to the
    origin of the canonical coordinates, plus the expansion coefficients.

    gamma1, gamma2 follow the definition 0.5*f_vv(0) and 0.5*f_vv(0)*f_w(0)
    on the g_Na-scaled balance f; the canonical chart itself scales by
    g_Na * gamma1 in v (see map_to_canonical).
    """

    v_c: float
    w_c: float
    n_c: float
    chi: Callable[[float], float]
    gamma1: float
    gamma2: float
    beta: float
    c: float
    d: float
    e: float
    kappa: float
    g2_node: float
    g_Na: float
    C: float

    def map_to_canonical(self, state: np.ndarray) -> np.ndarray:
        """Model state (v, w, n) -> canonical (x, y, z); node -> origin."""
        v, w, n = state
        vb = v - self.v_c
        nb = n - self.n_c
        wb = w - self.w_c - self.chi(nb)
        s1 = self.g_Na * self.gamma1            # x-scale
        s2 = self.g_Na**2 * self.gamma2         # w-scale, y = -s2*wb
        zs = self.beta / (self.g_Na * self.c * self.g2_node)
        return np.array([s1 * vb, -s2 * wb, zs * nb])

    @property
    def fast_time_per_ms(self) -> float:
        """Canonical fast time units per model millisecond (= 1/C)."""
        return 1.0 / self.C


def _phi(v: float, p: FullParams) -> float:
    """Voltage balance with the w and n**4 terms removed, scaled by 1/g_Na."""
    g = gate_curves(v)
    return (
        -p.g_Na * g.m_inf**3 * g.h_inf * (v - p.E_Na)
        - p.g_L * (v - p.E_L)
        - p.g_Nap * g.p_inf * (v - p.E_Na)
        + p.I_app
    ) / p.g_Na


def current_balance_scaled(v: float, w: float, n: float, p: FullParams) -> float:
    """f(v, w, n): the v-equation of the reduced model divided by g_Na."""
    return _phi(v, p) - (p.g_K * n**4 * (v - p.E_K) + p.g_Ks * w * (v - p.E_K)) / p.g_Na


def critical_w(v: float, n: float, p: FullParams) -> float:
    """w solving f(v, w, n) = 0 (f is affine in w)."""
    if v == p.E_K:
        raise FoldError("critical manifold is undefined at v = E_K")
    return (_phi(v, p) - p.g_K * n**4 * (v - p.E_K) / p.g_Na) / (
        p.g_Ks * (v - p.E_K) / p.g_Na
    )


def _d1(f: Callable[[float], float], x: float, h: float = 1e-3) -> float:
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def _d2(f: Callable[[float], float], x: float, h: float = 1e-3) -> float:
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (
        12 * h * h
    )


def f_v(v: float, w: float, n: float, p: FullParams) -> float:
    """Partial of f with respect to v at fixed (w, n)."""
    return _d1(lambda u: _phi(u, p), v) - (p.g_K * n**4 + p.g_Ks * w) / p.g_Na


def f_w(v: float, p: FullParams) -> float:
    return -p.g_Ks * (v - p.E_K) / p.g_Na


def f_n(v: float, n: float, p: FullParams) -> float:
    return -4.0 * p.g_K * n**3 * (v - p.E_K) / p.g_Na


def _bracket_roots(fun, lo: float, hi: float, n_grid: int = 201) -> list[float]:
    xs = np.linspace(lo, hi, n_grid)
    vals = [fun(float(x)) for x in xs]
    roots = []
    for i in range(n_grid - 1):
        if vals[i] == 0.0:
            roots.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(fun, float(xs[i]), float(xs[i + 1]), xtol=1e-13))
    return roots


def fold_voltage(p: FullParams, window: tuple[float, float] = (-65.0, -40.0)) -> float:
    """Fold voltage v_c: f_v(v, W(v, n), n) = 0, independent of n.

    Substituting w = W(v, n) cancels the n-dependence (f and f_v are
    linear in n**4 and w), leaving phi'(v) - phi(v)/(v - E_K) = 0.
    """
    fun = lambda v: _d1(lambda u: _phi(u, p), v) - _phi(v, p) / (v - p.E_K)
    roots = _bracket_roots(fun, window[0], window[1])
    if not roots:
        raise FoldError(f"no fold voltage in window {window}")
    return roots[0]


def _g1(v: float, w: float, p: FullParams) -> float:
    return (w_inf(v) - w) / p.tau_w


def _g2(v: float, n: float, p: FullParams) -> float:
    g = gate_curves(v)
    return (g.n_inf - n) / g.tau_n


def desingularized_rhs(y: np.ndarray, p: FullParams) -> np.ndarray:
    """Desingularized reduced flow on the critical manifold, state (v, n)."""
    v, n = y
    w = critical_w(v, n, p)
    return np.array(
        [
            f_w(v, p) * _g1(v, w, p) + f_n(v, n, p) * _g2(v, n, p),
            -f_v(v, w, n, p) * _g2(v, n, p),
        ]
    )


def _desing_jacobian(v: float, n: float, p: FullParams) -> np.ndarray:
    y0 = np.array([v, n])
    J = np.empty((2, 2))
    for j in range(2):
        h = 1e-6 * max(1.0, abs(float(y0[j])))
        yp = y0.copy()
        ym = y0.copy()
        yp[j] += h
        ym[j] -= h
        J[:, j] = (desingularized_rhs(yp, p) - desingularized_rhs(ym, p)) / (2.0 * h)
    return J


def folded_singularity(p: FullParams) -> FoldData:
    """Folded-node singularity on the fold curve.

    Solves f_w*g1 + f_n*g2 = 0 along the fold for n.  The equation can
    carry a folded saddle as well; the root returned is the one whose
    desingularized linearization has two negative eigenvalues.
    """
    v_c = fold_voltage(p)
    xi = lambda n: critical_w(v_c, n, p)

    def node_eq(n: float) -> float:
        return f_w(v_c, p) * _g1(v_c, xi(n), p) + f_n(v_c, n, p) * _g2(v_c, n, p)

    roots = _bracket_roots(node_eq, 1e-4, 0.999, n_grid=401)
    if not roots:
        raise FoldError("no folded singularity along the fold curve")

    candidates = []
    for n_c in roots:
        J = _desing_jacobian(v_c, n_c, p)
        eigs = np.linalg.eigvals(J)
        if np.max(np.abs(eigs.imag)) > 1e-12:
            continue
        ev = np.sort(eigs.real)  # ascending: strong (most negative) first
        candidates.append((n_c, ev))
    nodes = [(n_c, ev) for n_c, ev in candidates if ev[1] < 0.0]
    if not nodes:
        detail = ", ".join(f"n={n_c:.6f}: eigs={ev}" for n_c, ev in candidates)
        raise FoldError(f"no folded node (all singularities have a positive eigenvalue): {detail}")
    n_c, ev = nodes[0]
    w_c = xi(n_c)

    # fold non-degeneracy: f = f_v = 0, f_w != 0, f_vv != 0
    if abs(current_balance_scaled(v_c, w_c, n_c, p)) > 1e-9:
        raise FoldError("fold point does not satisfy f = 0")
    if abs(f_v(v_c, w_c, n_c, p)) > 1e-7:
        raise FoldError("fold point does not satisfy f_v = 0")
    if abs(f_w(v_c, p)) < 1e-12:
        raise FoldError("degenerate fold: f_w = 0")
    f_vv = _d2(lambda u: current_balance_scaled(u, w_c, n_c, p), v_c)
    if abs(f_vv) < 1e-12:
        raise FoldError("degenerate fold: f_vv = 0")

    return FoldData(v_c=v_c, w_c=w_c, n_c=n_c, xi=xi, eig_desing=(float(ev[0]), float(ev[1])))


def folded_node_eig_ratio(fold: FoldData) -> float:
    """Weak-to-strong eigenvalue ratio of the folded node, in (0, 1)."""
    strong, weak = fold.eig_desing
    return weak / strong


def canonical_node_ratio(eps: float, mu: float) -> float:
    """Folded-node eigenvalue ratio implied by a canonical (eps, mu) pair.

    The desingularized flow of the canonical system linearized at its
    folded node has eigenvalue ratio (1 - s)/(1 + s), s = sqrt(1 - 8 mu/eps).
    Used as an extraction cross-check.
    """
    disc = 1.0 - 8.0 * mu / eps
    if disc < 0.0:
        raise ExtractionError("canonical pair is not a folded node (focus)")
    s = math.sqrt(disc)
    return (1.0 - s) / (1.0 + s)


def _richardson_partial(fun: Callable[[float], float], h: float = 1e-4) -> float:
    d = lambda hh: (fun(hh) - fun(-hh)) / (2.0 * hh)
    return (4.0 * d(h / 2.0) - d(h)) / 3.0


def extract_canonical(
    p: FullParams, I_app: float | None = None
) -> tuple[CanonicalParams, TransformChain]:
    """Canonical parameters (eps, mu, a, b) of the model at I_app.

    Shifts the folded node to the origin, rectifies the fold curve to the
    n axis, scales v and w to put the voltage balance into the normal
    form v**2 + w, and normalizes the n equation to unit drift.  The
    expansion coefficients beta, c, d, e of the slow equations are
    measured by central differences (step 1e-4 in the scaled variables,
    one Richardson step).  D1 is not extracted; the cubic term is a
    modeling choice supplying the return mechanism.
    """
    if I_app is not None:
        p = replace(p, I_app=I_app)
    fold = folded_singularity(p)
    v_c, w_c, n_c = fold.v_c, fold.w_c, fold.n_c

    def F(v: float, w: float, n: float) -> float:
        return p.g_Na * current_balance_scaled(v, w, n, p)

    def chi(nb: float) -> float:
        return critical_w(v_c, nb + n_c, p) - w_c

    def chi_p(nb: float) -> float:
        return -4.0 * p.g_K * (nb + n_c) ** 3 / p.g_Ks

    F_vv = _d2(lambda u: F(u, w_c, n_c), v_c)
    F_w = -p.g_Ks * (v_c - p.E_K)
    G1 = 0.5 * F_vv                # physical v-scale
    G2 = G1 * F_w                  # physical w-scale
    Gn = _g2(v_c, n_c, p)          # n-equation drift at the node
    if Gn == 0.0:
        raise ExtractionError("n drift vanishes at the folded node")

    def w_eq(V: float, N: float) -> float:
        vb, nb = V / G1, N * Gn
        v, n = vb + v_c, nb + n_c
        w = chi(nb) + w_c
        return G2 * (_g1(v, w, p) - chi_p(nb) * _g2(v, n, p))

    def n_eq(V: float, N: float) -> float:
        vb, nb = V / G1, N * Gn
        return _g2(vb + v_c, nb + n_c, p) / Gn

    beta = _richardson_partial(lambda h: w_eq(0.0, h))
    c = -_richardson_partial(lambda h: w_eq(h, 0.0))
    d = _richardson_partial(lambda h: n_eq(0.0, h))
    e = _richardson_partial(lambda h: n_eq(h, 0.0))
    if c <= 0.0:
        raise ExtractionError(f"coefficient c = {c:g} is not positive")

    C = p.C
    eps = math.sqrt(C * c)
    mu = beta * math.sqrt(C) * c**-1.5
    a = mu * e
    b = d * math.sqrt(C) * c**-0.5

    params = CanonicalParams(eps=eps, mu=mu, a=a, b=b)
    if not params.satisfies_sign_conditions():
        raise ExtractionError(
            f"extracted parameters violate -b > a > 0: eps={eps:g}, mu={mu:g}, a={a:g}, b={b:g}"
        )

    # Report coefficients in the kappa normalization (eps**2 == kappa*c).
    gNa = p.g_Na
    chain = TransformChain(
        v_c=v_c,
        w_c=w_c,
        n_c=n_c,
        chi=chi,
        gamma1=G1 / gNa,
        gamma2=G2 / gNa**2,
        beta=beta * gNa**2,
        c=c * gNa,
        d=d * gNa,
        e=e,
        kappa=C / gNa,
        g2_node=Gn,
        g_Na=gNa,
        C=C,
    )
    return params, chain
