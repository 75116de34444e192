"""The deformation family from G to its Lie algebra, evaluated in charts.

Points of the family are pairs ``(value, t)``: for ``t != 0`` the value is a
group matrix, for ``t = 0`` it is an algebra coefficient vector.  The chart
``(x, t) -> (exp(t x), t)`` covers a neighbourhood of the zero fibre and every
structure (bivector, trivector, moment map, fusion) is pulled back through it
at fixed ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import DimensionMismatchError, DomainError
from .lie import (Ad_matrix, ad_matrix, dexp_eta, exp_map, injectivity_radius, log_map,
                  model_product)
from .multivector import bivector_tensor, schouten_field
from .qp import PG_left


@dataclass(frozen=True)
class DeformationChart:
    """Chart (x, t) -> (exp(t x), t) restricted to |t| ||x|| below the
    model's injectivity radius."""

    model: object

    @property
    def radius(self):
        return injectivity_radius(self.model)

    def contains(self, x, t):
        return bool(abs(t) * np.linalg.norm(x) < self.radius)

    def interval(self, x):
        """Largest symmetric t-interval on which (x, t) stays in the chart."""
        nx = float(np.linalg.norm(x))
        if nx == 0 or not np.isfinite(self.radius):
            return (-math.inf, math.inf)
        T = self.radius / nx
        return (-T, T)

    def map(self, x, t):
        x = np.asarray(x, dtype=float)
        if not self.contains(x, t):
            raise DomainError("(x, t) outside the deformation chart")
        if t == 0:
            return (x.copy(), 0.0)
        return (exp_map(self.model, t * x), float(t))


def _check_domain(model, x, t):
    if not DeformationChart(model).contains(x, t):
        raise DomainError("(x, t) outside the deformation chart")


def family_bivector(model, x, t):
    """Coefficient matrix of t P_G pulled back through x -> exp(t x).

    With J = eta(t ad_x) and A = Ad_{exp(-t x)} this is (1/4t) J (A - A^T) J^T;
    at t = 0 it is the linear Poisson matrix -1/2 ad_x.
    """
    x = np.asarray(x, dtype=float)
    _check_domain(model, x, t)
    if t == 0:
        return -0.5 * ad_matrix(model, x)
    J = dexp_eta(model, t * x)
    A = Ad_matrix(model, exp_map(model, -t * x))
    return J @ (A - A.T) @ J.T / (4.0 * t)


def family_trivector(model, x, t):
    """Tensor of t^2 phi_G pulled back through x -> exp(t x); zero at t = 0."""
    x = np.asarray(x, dtype=float)
    _check_domain(model, x, t)
    n = model.dim
    if t == 0:
        return np.zeros((n, n, n))
    J = dexp_eta(model, t * x)
    L = J @ (np.eye(n) - Ad_matrix(model, exp_map(model, -t * x)))
    Phi = 0.5 * model.structure_constants
    return np.einsum("ai,bj,ck,ijk->abc", L, L, L, Phi, optimize=True) / t


def chart_jacobian_fd(model, x, t, h=1e-4):
    """Left-trivialised Jacobian of x -> exp(t x), by Richardson-extrapolated
    central differences.  Independent of eta; used as an oracle."""
    x = np.asarray(x, dtype=float)
    g = exp_map(model, t * x)
    gi = model.inverse(g)
    hx = h / abs(t)
    cols = []
    for e in np.eye(model.dim):
        def diff(s):
            plus = log_map(model, gi @ exp_map(model, t * (x + s * e)))
            minus = log_map(model, gi @ exp_map(model, t * (x - s * e)))
            return (plus - minus) / (2 * s)
        cols.append((4 * diff(hx / 2) - diff(hx)) / 3)
    return np.column_stack(cols)


def family_bivector_fd(model, x, t, h=1e-4):
    """Brute-force pullback of t P_G through the chart (oracle for the closed form)."""
    D = chart_jacobian_fd(model, x, t, h)
    Di = np.linalg.inv(D)
    C = t * PG_left(model, exp_map(model, t * np.asarray(x, dtype=float)))
    return Di @ C @ Di.T


# --------------------------------------------------------------------------
# multiplication

def mult_map(p, q):
    """Groupoid multiplication on the family: (ab, t) for t != 0, (a + b, 0) at t = 0."""
    (a, s), (b, t) = p, q
    if s != t:
        raise DomainError(f"points lie on different fibres (t = {s} and t = {t})")
    if t == 0:
        return (np.asarray(a, dtype=float) + np.asarray(b, dtype=float), 0.0)
    return (np.asarray(a) @ np.asarray(b), t)


def mult_chart(model, x, y, t):
    """Chart expression (1/t) log(exp(tx) exp(ty)) of the multiplication."""
    if t == 0:
        return np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
    return log_map(model, exp_map(model, t * np.asarray(x)) @ exp_map(model, t * np.asarray(y))) / t


def mult_chart_residual(model, x, y, t):
    """|(1/t) log(exp(tx) exp(ty)) - (x + y) - (t/2)[x, y]|, an O(t^2) quantity."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    z = mult_chart(model, x, y, t)
    return float(np.linalg.norm(z - (x + y) - 0.5 * t * model.bracket(x, y)))


# --------------------------------------------------------------------------
# fusion

def _split(model, xx):
    xx = np.asarray(xx, dtype=float)
    if xx.shape != (2 * model.dim,):
        raise DimensionMismatchError("fused chart point must have length 2 dim G")
    return xx[:model.dim], xx[model.dim:]


def psi_family(model, xx):
    """psi_M = 1/2 sum_i (e_i, 0)_M ^ (0, e_i)_M in the chart of G x G.

    In the chart the conjugation field of e_i at exp(t x) is ad_x e_i for
    every t, so the coefficient matrix is (1/4)(X1 X2^T - X2 X1^T).
    """
    x1, x2 = _split(model, xx)
    n = model.dim
    X1 = np.vstack([ad_matrix(model, x1), np.zeros((n, n))])
    X2 = np.vstack([np.zeros((n, n)), ad_matrix(model, x2)])
    return 0.25 * (X1 @ X2.T - X2 @ X1.T)


def fused_family_bivector(model, xx, t):
    """P_hat_t = (P_t + P_t) - t psi, evaluated at (x1, x2) on the fibre t."""
    x1, x2 = _split(model, xx)
    n = model.dim
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = family_bivector(model, x1, t)
    out[n:, n:] = family_bivector(model, x2, t)
    if t != 0:
        out -= t * psi_family(model, xx)
    return out


def fused_family_trivector(model, xx, t):
    """t^2 phi for the diagonal action on the fused fibre, in the chart."""
    x1, x2 = _split(model, xx)
    n = model.dim
    if t == 0:
        return np.zeros((2 * n,) * 3)
    for x in (x1, x2):
        _check_domain(model, x, t)
    L = np.vstack([ad_matrix(model, x1), ad_matrix(model, x2)])
    Phi = 0.5 * model.structure_constants
    return t * t * np.einsum("ai,bj,ck,ijk->abc", L, L, L, Phi, optimize=True)


def fused_moment(model, xx, t):
    """mult_map of the two chart moment maps on the fibre t."""
    x1, x2 = _split(model, xx)
    chart = DeformationChart(model)
    return mult_map(chart.map(x1, t), chart.map(x2, t))


# --------------------------------------------------------------------------
# convergence order estimation

def loglog_slope(ts, values, floor=0.0):
    """Least-squares slope of log(values) against log(ts).

    Values at or below ``floor`` are treated as exact zeros and dropped; a
    series that is entirely zero returns +inf (faster than any power).
    """
    ts = np.asarray(ts, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.all(v <= floor):
        return math.inf
    if np.any(v <= floor):
        mask = v > floor
        ts, v = ts[mask], v[mask]
        if len(v) < 2:
            return math.inf
    return float(np.polyfit(np.log(ts), np.log(v), 1)[0])


def bivector_limit_norms(model, x, t_grid):
    base = family_bivector(model, x, 0.0)
    return [float(np.linalg.norm(family_bivector(model, x, t) - base)) for t in t_grid]


def trivector_norms(model, x, t_grid):
    return [float(np.linalg.norm(family_trivector(model, x, t))) for t in t_grid]


def mult_residuals(model, x, y, t_grid):
    return [mult_chart_residual(model, x, y, t) for t in t_grid]


def roundoff_floor(kind, *vectors):
    """Level below which a norm in a slope fit is indistinguishable from zero.

    Trivector norms scale like |x|^3 and are O(eps) when the exact value
    vanishes (every rank-one group); the multiplication residual carries an
    eps / t division, so its floor is set at the smallest grid point.
    """
    s = max([1.0] + [float(np.linalg.norm(v)) for v in vectors])
    if kind == "trivector":
        return 1e-13 * s ** 3
    if kind == "mult":
        return 1e-11 * s
    return 0.0


def fiber_condition_residual(model, x, t, c=None, fd_step=None):
    """|[P_t, P_t] - c phi_t| at x on the fibre t (Schouten bracket in x)."""
    c = config.QP_BRACKET_CONSTANT if c is None else c
    fd_step = config.DEFAULT_FD_STEP if fd_step is None else fd_step

    def P(y):
        return family_bivector(model, y, t)

    S = schouten_field(P, P, x, fd_step)
    return float(np.linalg.norm(S - c * family_trivector(model, x, t)))


def equivariance_residual(model, x, t, g):
    """|P_t(Ad_g x) - Ad_g P_t(x) Ad_g^T| for the chart conjugation action."""
    A = Ad_matrix(model, g)
    lhs = family_bivector(model, A @ np.asarray(x, dtype=float), t)
    return float(np.linalg.norm(lhs - A @ family_bivector(model, x, t) @ A.T))


def report(model, kind, x, t_grid, seed=None, y=None, tol=None):
    """JSON-ready dictionary for one slope fit."""
    tol = config.DEFAULT_TOLERANCES if tol is None else tol
    if kind == "bivector":
        norms = bivector_limit_norms(model, x, t_grid)
        slope = loglog_slope(t_grid, norms)
        lo, hi = tol.slope_window
        ok = lo <= slope <= hi
    elif kind == "trivector":
        norms = trivector_norms(model, x, t_grid)
        slope = loglog_slope(t_grid, norms, roundoff_floor("trivector", x))
        ok = slope >= tol.slope_min
    elif kind == "mult":
        norms = mult_residuals(model, x, y, t_grid)
        slope = loglog_slope(t_grid, norms, roundoff_floor("mult", x, y))
        ok = slope >= tol.slope_min_mult
    else:
        raise ValueError(f"unknown deformation check {kind!r}")
    return {"group": model.name, "x_seed": seed, "t_grid": list(t_grid), "norms": norms,
            "slope": slope if np.isfinite(slope) else "inf", "pass": bool(ok)}


__all__ = [
    "DeformationChart", "family_bivector", "family_trivector", "family_bivector_fd",
    "chart_jacobian_fd", "mult_map", "mult_chart", "mult_chart_residual", "psi_family",
    "fused_family_bivector", "fused_family_trivector", "fused_moment", "loglog_slope",
    "bivector_limit_norms", "trivector_norms", "mult_residuals", "roundoff_floor", "fiber_condition_residual",
    "equivariance_residual", "report", "model_product", "bivector_tensor",
]
