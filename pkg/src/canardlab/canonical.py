"""The three-timescale model system in its four coordinate charts.

Fast chart:      x' = -y + x^2 + D1 x^3,  y' = eps^2 (x - z),  z' = eps (mu + a x + b z)
Slow chart:      the same vector field divided by eps^2 (slow time).
Microscope:      x = eps*xb, y = eps^2*yb, z = eps*zb, mu = eps*mub magnifies
                 the fold region; time runs eps times slower than the fast chart.
Sigma chart:     sigma = 1/sqrt(yb), xt = sigma*xb, zt = sigma*zb compactifies
                 the approach from large yb; the extended 4-D version appends
                 omega (standing in for eps/sigma) and conserves H = omega*sigma.

Exact special solutions, equilibrium and Hopf formulas, and the slow and
super-slow manifold expressions live here as plain functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .ode import VectorField

__all__ = [
    "MicroParams",
    "canon_rhs",
    "slow_rhs",
    "micro_rhs",
    "sigma_rhs",
    "canon_field",
    "slow_field",
    "micro_field",
    "sigma_field",
    "canon_to_micro",
    "micro_to_canon",
    "micro_to_sigma",
    "sigma_to_micro",
    "canon_equilibrium",
    "micro_equilibrium",
    "micro_linearization",
    "hopf_polynomial",
    "hopf_roots",
    "gamma_poly",
    "gamma_poly_rhs_residual",
    "mu_bar_0",
    "alpha_poly",
    "s1d_curve",
    "s1d_eigs_leading",
    "s1d_matrix",
    "fold_x_max",
    "asymptotic_seed_special",
]


@dataclass(frozen=True)
class MicroParams:
    """Microscope-chart parameters; eps = 0 selects the singular system."""

    mu_bar: float
    a: float
    b: float
    eps: float = 0.0
    D1: float = -0.4

    def __post_init__(self):
        if self.eps < 0.0:
            raise ValueError("eps must be nonnegative")

    def with_mu_bar(self, mu_bar: float) -> "MicroParams":
        return replace(self, mu_bar=mu_bar)


def canon_rhs(state: np.ndarray, p) -> np.ndarray:
    """Fast chart; p needs fields eps, mu, a, b, D1."""
    x, y, z = state
    return np.array(
        [
            -y + x * x + p.D1 * x**3,
            p.eps**2 * (x - z),
            p.eps * (p.mu + p.a * x + p.b * z),
        ]
    )


def slow_rhs(state: np.ndarray, p) -> np.ndarray:
    """Slow chart: canon_rhs / eps^2 (time rescaled by eps^2)."""
    if p.eps <= 0.0:
        raise ValueError("slow chart requires eps > 0")
    return canon_rhs(state, p) / p.eps**2


def micro_rhs(state: np.ndarray, p: MicroParams) -> np.ndarray:
    xb, yb, zb = state
    return np.array(
        [
            -yb + xb * xb + p.eps * p.D1 * xb**3,
            xb - zb,
            p.mu_bar + p.a * xb + p.b * zb,
        ]
    )


def sigma_rhs(state: np.ndarray, p: MicroParams, chart: str = "rescc") -> np.ndarray:
    """Sigma-chart fields.

    'rescc' keeps the microscope time (singular factor 1/sigma in the xt
    equation); 'resccr' is rescc multiplied by sigma; 'extended' is the
    4-D system in (xt, sigma, zt, omega) with constant of motion
    H = omega*sigma (omega plays the role of eps/sigma).
    """
    if chart == "extended":
        xt, sg, zt, om = state
        shear = 0.5 * sg * (xt - zt)
        return np.array(
            [
                -shear * sg * xt + (-1.0 + xt * xt + p.D1 * om * xt**3),
                -shear * sg * sg,
                sg * (sg * p.mu_bar + p.a * xt + p.b * zt - shear * zt),
                shear * sg * om,
            ]
        )
    xt, sg, zt = state
    if chart == "rescc":
        if sg <= 0.0:
            raise ValueError("rescc chart requires sigma > 0")
        cubic = (p.eps / sg) * p.D1 * xt**3
        shear = 0.5 * sg * (xt - zt)
        return np.array(
            [
                (-shear * sg * xt + (-1.0 + xt * xt + cubic)) / sg,
                -shear * sg,
                sg * p.mu_bar + p.a * xt + p.b * zt - shear * zt,
            ]
        )
    if chart == "resccr":
        cubic = 0.0 if p.eps == 0.0 else (p.eps / sg) * p.D1 * xt**3
        shear = 0.5 * sg * (xt - zt)
        return np.array(
            [
                -shear * sg * xt + (-1.0 + xt * xt + cubic),
                -shear * sg * sg,
                sg * (sg * p.mu_bar + p.a * xt + p.b * zt - shear * zt),
            ]
        )
    raise ValueError(f"unknown sigma chart {chart!r}")


def canon_field(p) -> VectorField:
    return VectorField(3, canon_rhs, p, name="canon")


def slow_field(p) -> VectorField:
    return VectorField(3, slow_rhs, p, name="slow")


def micro_field(p: MicroParams) -> VectorField:
    return VectorField(3, micro_rhs, p, name="micro")


def sigma_field(p: MicroParams, chart: str = "rescc") -> VectorField:
    dim = 4 if chart == "extended" else 3
    return VectorField(dim, lambda s, pp: sigma_rhs(s, pp, chart), p, name=f"sigma-{chart}")


def canon_to_micro(state: np.ndarray, eps: float) -> np.ndarray:
    x, y, z = state
    return np.array([x / eps, y / eps**2, z / eps])


def micro_to_canon(state: np.ndarray, eps: float) -> np.ndarray:
    xb, yb, zb = state
    return np.array([eps * xb, eps**2 * yb, eps * zb])


def micro_to_sigma(state: np.ndarray) -> np.ndarray:
    """Requires yb > 0; time is unchanged (rescc chart)."""
    xb, yb, zb = state
    if yb <= 0.0:
        raise ValueError("sigma chart requires yb > 0")
    sg = 1.0 / math.sqrt(yb)
    return np.array([sg * xb, sg, sg * zb])


def sigma_to_micro(state: np.ndarray) -> np.ndarray:
    xt, sg, zt = state[:3]
    if sg <= 0.0:
        raise ValueError("sigma > 0 required to invert the chart")
    return np.array([xt / sg, 1.0 / sg**2, zt / sg])


def canon_equilibrium(p) -> np.ndarray:
    """Unique equilibrium of the fast/slow charts: x = z, y = F(x)."""
    x = -p.mu / (p.a + p.b)
    return np.array([x, x * x + p.D1 * x**3, x])


def micro_equilibrium(p: MicroParams) -> np.ndarray:
    """xb = zb = -mu_bar/(a+b); the cubic term only moves yb for eps > 0."""
    xb = -p.mu_bar / (p.a + p.b)
    return np.array([xb, xb * xb + p.eps * p.D1 * xb**3, xb])


def micro_linearization(p: MicroParams) -> np.ndarray:
    """Jacobian A0 of the eps = 0 microscope system at its equilibrium."""
    xb = -p.mu_bar / (p.a + p.b)
    return np.array(
        [
            [2.0 * xb, -1.0, 0.0],
            [1.0, 0.0, -1.0],
            [p.a, 0.0, p.b],
        ]
    )


def hopf_polynomial(mu_bar: float, a: float, b: float) -> float:
    """C(mu_bar); its roots give a pure imaginary pair of A0."""
    return (a + b) * a + (2.0 * b * b + 2.0) * mu_bar - (4.0 * b / (a + b)) * mu_bar**2


def hopf_roots(a: float, b: float) -> tuple[float, float]:
    """Both roots of C(mu_bar), ascending.

    The lower root is the Hopf bifurcation of the microscope equilibrium;
    at the upper root the zero-sum eigenvalue pair is real (extraneous).
    """
    q = 1.0 + b * b
    disc = q * q + 4.0 * b * a
    if disc < 0.0:
        raise ValueError(f"negative discriminant {disc:g}: no real roots")
    s = math.sqrt(disc)
    pref = (a + b) / (4.0 * b)
    r1, r2 = (q - s) * pref, (q + s) * pref
    return (r1, r2) if r1 <= r2 else (r2, r1)


def alpha_poly(a: float, b: float) -> float:
    """Slope of the polynomial special solution: alpha = (a+b)/(2b)."""
    return (a + b) / (2.0 * b)


def mu_bar_0(a: float, b: float) -> float:
    """mu_bar at which the polynomial special solution exists."""
    if b == 0.0:
        raise ValueError("b must be nonzero")
    return -a * (a + b) / (2.0 * b * b)


def gamma_poly(t, x_bar_0: float, a: float, b: float):
    """Polynomial special solution of the eps = 0 microscope system.

    At mu_bar = mu_bar_0(a, b):  xb = x0 + alpha t,  yb = xb^2 - alpha,
    zb = (1 - 2 alpha) xb.  Accepts scalar or array t; returns shape (3,)
    or (len(t), 3).
    """
    al = alpha_poly(a, b)
    xb = x_bar_0 + al * np.asarray(t, dtype=float)
    yb = xb * xb - al
    zb = (1.0 - 2.0 * al) * xb
    out = np.stack([xb, yb, zb], axis=-1)
    return out


def gamma_poly_rhs_residual(t, x_bar_0: float, a: float, b: float) -> float:
    """max-norm residual of gamma_poly under the eps=0 microscope field."""
    p = MicroParams(mu_bar=mu_bar_0(a, b), a=a, b=b, eps=0.0)
    al = alpha_poly(a, b)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    worst = 0.0
    for tk in ts:
        state = gamma_poly(float(tk), x_bar_0, a, b)
        deriv = np.array([al, 2.0 * al * state[0], (1.0 - 2.0 * al) * al])
        worst = max(worst, float(np.max(np.abs(micro_rhs(state, p) - deriv))))
    return worst


def fold_x_max(D1: float) -> float:
    """x of the right fold of F(x) = x^2 + D1 x^3 (D1 < 0)."""
    if D1 >= 0.0:
        raise ValueError("right fold requires D1 < 0")
    return -2.0 / (3.0 * D1)


def s1d_curve(x, mu: float, a: float, b: float, D1: float = -0.4):
    """Super-slow manifold S1D of the slow chart: (y, z) at given x."""
    if b == 0.0:
        raise ValueError("b must be nonzero")
    x = np.asarray(x, dtype=float)
    return x * x + D1 * x**3, -(mu + a * x) / b


def s1d_eigs_leading(x: float, eps: float, D1: float, b: float) -> tuple[float, float]:
    """Leading eigenvalues of the S1D linearization: F'(x)/eps^2 and b/eps."""
    return (2.0 * x + 3.0 * D1 * x * x) / eps**2, b / eps


def s1d_matrix(x: float, eps: float, a: float, b: float, D1: float = -0.4) -> np.ndarray:
    """Exact linearization of the slow-chart system about an S1D point."""
    return np.array(
        [
            [(2.0 * x + 3.0 * D1 * x * x) / eps**2, -1.0 / eps**2, 0.0],
            [1.0, 0.0, -1.0],
            [a / eps, 0.0, b / eps],
        ]
    )


def asymptotic_seed_special(
    mu_bar: float, a: float, b: float, sigma0: float = 1e-2
) -> np.ndarray:
    """Microscope-chart launch point for the special solution gamma_mubar.

    Leading order of the one-dimensional center manifold M1D at sigma =
    sigma0: (xt, zt) = (-1, a/b), mapped back to the microscope chart.
    Truncation error is O(sigma0).
    """
    if sigma0 <= 0.0:
        raise ValueError("sigma0 must be positive")
    return np.array([-1.0 / sigma0, 1.0 / sigma0**2, (a / b) / sigma0])
