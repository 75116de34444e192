"""Point-wise evaluators for the basic quasi-Poisson and quasi-Hamiltonian
examples: the group with its conjugation bivector, the dual of the Lie
algebra with the linear Poisson structure, and the double D(G) = G x G.

Conventions
-----------
* Fundamental vector fields use ``x_M(m) = d/dt|0 exp(-t x) . m``.
* Bivectors are coefficient matrices ``C`` with ``P = sum_{jk} C_jk d_j ^ d_k``;
  their tensor is ``C - C.T``.
* On a group, tangent vectors are left-trivialised algebra coefficients.
* The group with its conjugation action is handled in the exponential chart
  ``x -> exp(x)``; a left-trivialised vector ``u`` at ``exp(x)`` has chart
  coordinates ``eta(ad_x) u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import config
from .errors import DomainError, DimensionMismatchError, SingularInputError
from .lie import (Ad_matrix, ad_matrix, dexp_eta, exp_map, injectivity_radius, log_map,
                  make_group_model, model_product)
from .multivector import bivector_tensor, schouten_field

TOL = config.DEFAULT_TOLERANCES


@dataclass(frozen=True)
class ChartedSpace:
    """A space with a G-action, described by evaluators.

    ``point_kind`` is ``"chart"`` (points are real coordinate vectors) or
    ``"group_tuple"`` (points are tuples of group matrices, tangents are
    left-trivialised per factor).
    """

    name: str
    dim: int
    chart_name: str
    point_kind: str
    acting_model: object
    action: Callable
    infinitesimal_action: Callable
    base_model: object = None

    def tangent_difference(self, p_plus, p_minus, h):
        """Central-difference tangent vector between two nearby points."""
        if self.point_kind == "chart":
            return (np.asarray(p_plus) - np.asarray(p_minus)) / (2 * h)
        m = self.base_model
        # left-trivialised displacement from p_minus to p_plus, factor by factor
        return np.concatenate([log_map(m, m.inverse(q) @ r) for q, r in zip(p_minus, p_plus)]) / (2 * h)

    def fundamental_field_fd(self, xi, point, h=1e-5):
        """Finite-difference oracle for x_M along exp(-t xi)."""
        G = self.acting_model
        gp, gm = exp_map(G, -h * np.asarray(xi)), exp_map(G, h * np.asarray(xi))
        return self.tangent_difference(self.action(gp, point), self.action(gm, point), h)

    def fundamental_matrix(self, point):
        """Matrix whose columns are (e_i)_M at the point."""
        G = self.acting_model
        return np.column_stack([self.infinitesimal_action(e, point) for e in np.eye(G.dim)])


@dataclass(frozen=True)
class QuasiPoissonBundle:
    name: str
    space: ChartedSpace
    P: Callable
    phi_M: Callable
    mu: Callable
    moment_kind: str  # "group" or "algebra"
    model: object = None

    def equivariance_residual(self, g, point):
        """|mu(g.m) - g.mu(m)| with conjugation (group) or Ad (algebra)."""
        lhs = self.mu(self.space.action(g, point))
        rhs_base = self.mu(point)
        if self.moment_kind == "group":
            rhs = g @ rhs_base @ self.model.inverse(g)
        else:
            rhs = Ad_matrix(self.model, g) @ rhs_base
        return float(np.linalg.norm(lhs - rhs))


@dataclass(frozen=True)
class QuasiHamBundle:
    name: str
    space: ChartedSpace
    omega_matrix: Callable
    mu: Callable
    dmu: Callable
    model: object = None
    extra: dict = field(default_factory=dict)

    def omega(self, point, v1, v2):
        return float(np.asarray(v1) @ self.omega_matrix(point) @ np.asarray(v2))


# --------------------------------------------------------------------------
# (G, P_G, phi_G, Id) in the exponential chart

def _conj_action(model):
    def action(g, x):
        return Ad_matrix(model, g) @ np.asarray(x, dtype=float)
    return action


def conjugation_space(model):
    """G acting on itself by conjugation, in exponential-chart coordinates.

    The chart is equivariant, so the action on coordinates is x -> Ad_g x and
    the fundamental field of xi at x is ad_x xi.
    """
    return ChartedSpace(
        name=f"conj[{model.name}]", dim=model.dim, chart_name="exp", point_kind="chart",
        acting_model=model, action=_conj_action(model),
        infinitesimal_action=lambda xi, x: ad_matrix(model, x) @ np.asarray(xi, dtype=float),
        base_model=model)


def PG_left(model, g):
    """Coefficient matrix of P_G = 1/2 sum_i Ad(g^-1) e_i ^ e_i in left trivialisation."""
    A = Ad_matrix(model, model.inverse(g))
    return 0.25 * (A - A.T)


def PG_chart(model, x):
    """P_G at exp(x), in exponential-chart coordinates."""
    J = dexp_eta(model, x)
    return J @ PG_left(model, exp_map(model, x)) @ J.T


def phiG_left(model, g):
    """Tensor of phi_G at g, left-trivialised: (1 - Ad_{g^-1})^{x3} phi."""
    L = np.eye(model.dim) - Ad_matrix(model, model.inverse(g))
    return _push3(L, 0.5 * model.structure_constants)


def phiG_chart(model, x):
    """Tensor of phi_G at exp(x) in chart coordinates; (e_i)_M is ad_x e_i there."""
    return _push3(ad_matrix(model, x), 0.5 * model.structure_constants)


def _push3(L, T):
    return np.einsum("ai,bj,ck,ijk->abc", L, L, L, T, optimize=True)


def PG_bundle(model):
    return QuasiPoissonBundle(
        name=f"PG[{model.name}]", space=conjugation_space(model),
        P=lambda x: PG_chart(model, x), phi_M=lambda x: phiG_chart(model, x),
        mu=lambda x: exp_map(model, x), moment_kind="group", model=model)


# --------------------------------------------------------------------------
# (g*, P_0, Id)

def P0_matrix(model, x):
    """Linear Poisson bivector: coefficient matrix -1/2 ad_x."""
    return -0.5 * ad_matrix(model, x)


def P0_bundle(model):
    space = ChartedSpace(
        name=f"coadjoint[{model.name}]", dim=model.dim, chart_name="identity", point_kind="chart",
        acting_model=model, action=_conj_action(model),
        infinitesimal_action=lambda xi, x: ad_matrix(model, x) @ np.asarray(xi, dtype=float),
        base_model=model)
    zero3 = np.zeros((model.dim,) * 3)
    return QuasiPoissonBundle(
        name=f"P0[{model.name}]", space=space, P=lambda x: P0_matrix(model, x),
        phi_M=lambda x: zero3, mu=lambda x: np.asarray(x, dtype=float),
        moment_kind="algebra", model=model)


# --------------------------------------------------------------------------
# The double D(G)

def double_omega_matrix(model, a, b):
    """Matrix W with omega(v1, v2) = v1 @ W @ v2 on left-trivialised (alpha, beta).

    omega = 1/2 [<Ad_b a1, a2> - <Ad_b a2, a1> + <a1, b2 + Ad_b b2> - <a2, b1 + Ad_b b1>]
    """
    n = model.dim
    B = Ad_matrix(model, b)
    I = np.eye(n)
    W = np.zeros((2 * n, 2 * n))
    W[:n, :n] = 0.5 * (B.T - B)
    W[:n, n:] = 0.5 * (I + B)
    W[n:, :n] = -0.5 * (I + B).T
    return W


def double_moment(model, a, b):
    return a @ b @ model.inverse(a), model.inverse(b)


def double_moment_derivative(model, a, b):
    """Left-trivialised derivative of (a, b) -> (a b a^-1, b^-1)."""
    n = model.dim
    Aa, Bi = Ad_matrix(model, a), Ad_matrix(model, model.inverse(b))
    Bb = Ad_matrix(model, b)
    D = np.zeros((2 * n, 2 * n))
    D[:n, :n] = Aa @ (Bi - np.eye(n))
    D[:n, n:] = Aa
    D[n:, n:] = -Bb
    return D


def double_action(model):
    def action(gh, p):
        g, h = gh
        a, b = p
        hi = model.inverse(h)
        return (g @ a @ hi, h @ b @ hi)
    return action


def double_infinitesimal(model):
    n = model.dim

    def field(xy, p):
        xy = np.asarray(xy, dtype=float)
        x, y = xy[:n], xy[n:]
        a, b = p
        return np.concatenate([-Ad_matrix(model, model.inverse(a)) @ x + y,
                               -Ad_matrix(model, model.inverse(b)) @ y + y])
    return field


class _PairModel:
    """Acting group G x G viewed through pairs of matrices."""

    def __init__(self, model):
        self.model = model
        self.dim = 2 * model.dim
        self.name = f"{model.name}x{model.name}"

    def inverse(self, gh):
        return tuple(self.model.inverse(g) for g in gh)

    def random_element(self, rng):
        return (self.model.random_element(rng), self.model.random_element(rng))


def _pair_exp(model, xy):
    n = model.dim
    xy = np.asarray(xy, dtype=float)
    return (exp_map(model, xy[:n]), exp_map(model, xy[n:]))


class _DoubleSpace(ChartedSpace):
    def fundamental_field_fd(self, xi, point, h=1e-5):
        m = self.base_model
        gp, gm = _pair_exp(m, -h * np.asarray(xi)), _pair_exp(m, h * np.asarray(xi))
        return self.tangent_difference(self.action(gp, point), self.action(gm, point), h)

    def fundamental_matrix(self, point):
        return np.column_stack([self.infinitesimal_action(e, point)
                                for e in np.eye(2 * self.base_model.dim)])


def double_bundle(model):
    space = _DoubleSpace(
        name=f"D[{model.name}]", dim=2 * model.dim, chart_name="left-trivialised",
        point_kind="group_tuple", acting_model=_PairModel(model),
        action=double_action(model), infinitesimal_action=double_infinitesimal(model),
        base_model=model)
    return QuasiHamBundle(
        name=f"D[{model.name}]", space=space,
        omega_matrix=lambda p: double_omega_matrix(model, *p),
        mu=lambda p: double_moment(model, *p),
        dmu=lambda p: double_moment_derivative(model, *p), model=model)


def double_pushforward(model, gh):
    """Left-trivialised differential of the action of (g, h) on D(G)."""
    H = Ad_matrix(model, gh[1])
    Z = np.zeros_like(H)
    return np.block([[H, Z], [Z, H]])


def random_double_point(model, rng):
    return (model.random_element(rng), model.random_element(rng))


# --------------------------------------------------------------------------
# the non-degenerate case: P^# o omega^b = Id - 1/4 sum_i (e_i)_M (x) mu^*(theta^L_i - theta^R_i)

def _moment_Ad(bundle, point):
    m = bundle.model
    return np.block([[Ad_matrix(m, mu_k) if i == j else np.zeros((m.dim, m.dim))
                      for j in range(2)] for i, mu_k in enumerate(bundle.mu(point))])


def moment_correction_operator(bundle, point):
    """E = Id - 1/4 X (1 - Ad_mu) Dmu, X the matrix of fundamental fields."""
    X = bundle.space.fundamental_matrix(point)
    A = _moment_Ad(bundle, point)
    D = bundle.dmu(point)
    n = X.shape[0]
    return np.eye(n) - 0.25 * X @ (np.eye(A.shape[0]) - A) @ D


def omega_condition(bundle, point):
    return float(np.linalg.cond(bundle.omega_matrix(point)))


def candidate_bivector(bundle, point, max_condition=None):
    """Candidate bivector solving P^# o omega^b = E, as the matrix of P^#.

    omega^b(v) = W.T @ v, so P^# = E @ inv(W.T).  Returns (Psharp, antisymmetry residual).
    """
    max_condition = TOL.omega_condition if max_condition is None else max_condition
    W = bundle.omega_matrix(point)
    cond = np.linalg.cond(W)
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularInputError(f"omega is degenerate at this point (condition {cond:.3g})")
    E = moment_correction_operator(bundle, point)
    Psharp = E @ np.linalg.inv(W.T)
    return Psharp, float(np.linalg.norm(Psharp + Psharp.T))


def sample_regular_point(bundle, rng, max_condition=None, max_tries=1000):
    max_condition = TOL.omega_condition if max_condition is None else max_condition
    for _ in range(max_tries):
        p = random_double_point(bundle.model, rng)
        if omega_condition(bundle, p) < max_condition:
            return p
    raise DomainError("no regular point found")


def candidate_invariance_residual(bundle, point, gh):
    """|P(k.m) - dk P(m) dk^T| for the G x G action."""
    P_here, _ = candidate_bivector(bundle, point)
    P_there, _ = candidate_bivector(bundle, bundle.space.action(gh, point))
    D = double_pushforward(bundle.model, gh)
    return float(np.linalg.norm(P_there - D @ P_here @ D.T))


# alternate names, kept as part of the public API
eq1_operator = moment_correction_operator
eq1_candidate_P = candidate_bivector


def action_pushforward_fd(space, gh, point, h=1e-6):
    """FD oracle for the left-trivialised differential of a group-tuple action."""
    m = space.base_model
    cols = []
    for e in np.eye(space.dim):
        plus = _right_translate(m, point, h * e)
        minus = _right_translate(m, point, -h * e)
        cols.append(space.tangent_difference(space.action(gh, plus), space.action(gh, minus), h))
    return np.column_stack(cols)


def _right_translate(model, point, v):
    n = model.dim
    return tuple(p @ exp_map(model, v[k * n:(k + 1) * n]) for k, p in enumerate(point))


def moment_axiom_residual(bundle, point, sign=1.0, factor=0.5):
    """max over xi, v of |omega(xi_M, v) - sign*factor*<(1 + Ad_mu) Dmu v, xi>|."""
    X = bundle.space.fundamental_matrix(point)
    W = bundle.omega_matrix(point)
    A = _moment_Ad(bundle, point)
    lhs = X.T @ W
    rhs = sign * factor * ((np.eye(A.shape[0]) + A) @ bundle.dmu(point))
    return float(np.max(np.abs(lhs - rhs)))


def scan_moment_convention(bundle, point):
    """Residual of the moment axiom for each (sign, factor) in {+-1} x {1/2, 1}."""
    return {(s, f): moment_axiom_residual(bundle, point, s, f)
            for s in (1.0, -1.0) for f in (0.5, 1.0)}


# --------------------------------------------------------------------------
# quasi-Poisson identity and related checks

def bracket_and_trivector(bundle, point, fd_step=None):
    fd_step = config.DEFAULT_FD_STEP if fd_step is None else fd_step
    S = schouten_field(bundle.P, bundle.P, point, fd_step)
    return S, np.asarray(bundle.phi_M(point))


def calibrate_bracket_constant(model, point, fd_step=None):
    """Measure c in [P_G, P_G] = c phi_G at one chart point.

    Returns None when phi_G vanishes at the point (e.g. on any rank-one
    group, where the conjugation trivector is identically zero) so that c
    is not determined there.
    """
    S, F = bracket_and_trivector(PG_bundle(model), point, fd_step)
    denom = float(np.sum(F * F))
    if denom < 1e-20:
        return None
    return float(np.sum(S * F) / denom)


def verify_quasi_poisson(bundle, points, fd_step=None, c=None, tolerance=None, seed=None):
    """Report of max_m |[P, P](m) - c phi_M(m)| and a least-squares c estimate."""
    points = list(points)
    if not points:
        raise ValueError("verify_quasi_poisson needs at least one point")
    c = config.QP_BRACKET_CONSTANT if c is None else c
    tolerance = TOL.quasi_poisson if tolerance is None else tolerance
    num = den = 0.0
    worst = 0.0
    for p in points:
        S, F = bracket_and_trivector(bundle, p, fd_step)
        num += float(np.sum(S * F))
        den += float(np.sum(F * F))
        worst = max(worst, float(np.linalg.norm(S - c * F)))
    c_est = num / den if den > 1e-20 else None
    return {"bundle": bundle.name, "n_points": len(points), "seed": seed, "c": c,
            "c_estimate": c_est, "max_residual": worst, "tolerance": tolerance,
            "pass": bool(worst < tolerance)}


def random_chart_points(model, rng, n, fraction=0.8):
    """Random exponential-chart points well inside the injectivity radius."""
    r = injectivity_radius(model)
    r = 2.0 if not np.isfinite(r) else r
    out = []
    for _ in range(n):
        x = rng.standard_normal(model.dim)
        x *= fraction * r * rng.uniform(0.2, 1.0) / np.linalg.norm(x)
        out.append(x)
    return out


def moment_equivariance_fd(bundle, point, xi, h=1e-5):
    """|d/dt mu(exp(-t xi).m) - (xi acting on mu)| by central differences."""
    m = bundle.model
    sp = bundle.space
    mp = bundle.mu(sp.action(exp_map(m, -h * np.asarray(xi)), point))
    mm = bundle.mu(sp.action(exp_map(m, h * np.asarray(xi)), point))
    lhs = (mp - mm) / (2 * h)
    mu0 = bundle.mu(point)
    X = m.matrix(xi)
    if bundle.moment_kind == "group":
        rhs = -X @ mu0 + mu0 @ X
    else:
        rhs = -ad_matrix(m, xi) @ mu0
    return float(np.linalg.norm(lhs - rhs))


def distribution_dim(bundle, point, threshold=None):
    """Numerical rank of Im(P^#) + span of the fundamental fields."""
    threshold = TOL.rank_distribution if threshold is None else threshold
    X = bundle.space.fundamental_matrix(point)
    if isinstance(bundle, QuasiPoissonBundle):
        Psharp = bivector_tensor(bundle.P(point)).T
    else:
        Psharp, _ = candidate_bivector(bundle, point)
    M = np.hstack([Psharp, X])
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > threshold * max(1.0, s[0])))


# --------------------------------------------------------------------------
# conjugacy classes and coadjoint orbits

def _block_spectra(model, M, tol):
    out = []
    for b in model.blocks:
        r = slice(b.row, b.row + b.size)
        blk = np.asarray(M)[r, r]
        if b.kind == "torus":
            out.append(("exact", np.diag(blk)))
        else:
            ev = np.linalg.eigvals(blk)
            # round before sorting so near-ties do not swap order
            key = np.lexsort((np.round(ev.imag / tol) * tol, np.round(ev.real / tol) * tol))
            out.append(("spectrum", ev[key]))
    return out


def _same_class(model, M1, M2, tol):
    for (_, s1), (_, s2) in zip(_block_spectra(model, M1, tol), _block_spectra(model, M2, tol)):
        if s1.shape != s2.shape or np.max(np.abs(s1 - s2), initial=0.0) > tol:
            return False
    return True


def conjugacy_family_member(model, x, t, g, tol=None):
    """Membership in the deformed conjugacy class C_{exp(tx)} (t != 0) or the
    coadjoint orbit of x (t = 0, where ``g`` is an algebra coefficient vector)."""
    tol = TOL.conjugacy if tol is None else tol
    x = np.asarray(x, dtype=float)
    if t == 0:
        y = np.asarray(g)
        if y.ndim != 1 or y.shape[0] != model.dim or np.iscomplexobj(y):
            raise DimensionMismatchError("at t = 0 the candidate must be an algebra coefficient vector")
        return _same_class(model, model.matrix(x), model.matrix(y.astype(float)), tol)
    g = np.asarray(g)
    if g.shape != (model.matrix_size, model.matrix_size):
        raise DimensionMismatchError("for t != 0 the candidate must be a group matrix")
    return _same_class(model, exp_map(model, t * x), g, tol)


__all__ = [
    "ChartedSpace", "QuasiPoissonBundle", "QuasiHamBundle", "conjugation_space", "PG_left",
    "PG_chart", "phiG_left", "phiG_chart", "PG_bundle", "P0_matrix", "P0_bundle",
    "double_omega_matrix", "double_moment", "double_moment_derivative", "double_bundle",
    "double_pushforward", "moment_correction_operator", "candidate_bivector", "candidate_invariance_residual",
    "eq1_operator", "eq1_candidate_P",
    "sample_regular_point", "omega_condition", "moment_axiom_residual", "scan_moment_convention",
    "calibrate_bracket_constant", "verify_quasi_poisson", "distribution_dim",
    "conjugacy_family_member", "random_chart_points", "moment_equivariance_fd",
    "action_pushforward_fd", "make_group_model", "model_product",
]
