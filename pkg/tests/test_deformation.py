import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qham_forge import config
from qham_forge.deformation import (DeformationChart, bivector_limit_norms, equivariance_residual,
                                    family_bivector, family_bivector_fd,
                                    fiber_condition_residual, fused_family_bivector,
                                    fused_family_trivector, fused_moment, loglog_slope, mult_chart,
                                    mult_map, mult_residuals, report, roundoff_floor, trivector_norms)
from qham_forge.errors import DimensionMismatchError, DomainError
from qham_forge.lie import Ad_matrix, exp_map, make_group_model
from qham_forge.multivector import schouten_field
from qham_forge.qp import P0_matrix

GRID = config.DEFAULT_T_GRID


def test_loglog_slope_recovers_power_laws():
    ts = np.array(GRID)
    assert loglog_slope(ts, 3 * ts) == pytest.approx(1.0)
    assert loglog_slope(ts, 0.5 * ts ** 2) == pytest.approx(2.0)
    assert math.isinf(loglog_slope(ts, np.zeros(4)))
    assert loglog_slope(ts, [1e-2, 1e-4, 1e-20, 1e-20], floor=1e-15) == pytest.approx(2.0)


def test_chart_domain(su2):
    chart = DeformationChart(su2)
    x = np.array([1.0, 0.0, 0.0])
    lo, hi = chart.interval(x)
    assert hi == pytest.approx(chart.radius) and lo == -hi
    assert chart.contains(x, 0.99 * hi) and not chart.contains(x, 1.01 * hi)
    with pytest.raises(DomainError):
        chart.map(x, 1.01 * hi)
    val, t = chart.map(x, 0.0)
    assert t == 0.0 and np.array_equal(val, x)
    assert DeformationChart(make_group_model("torus:2")).interval(np.ones(2)) == (-math.inf, math.inf)


def test_family_bivector_at_zero_is_linear_poisson(nonabelian_model, rng):
    x = rng.standard_normal(nonabelian_model.dim)
    np.testing.assert_array_equal(family_bivector(nonabelian_model, x, 0.0), P0_matrix(nonabelian_model, x))


def test_family_bivector_is_even_in_t(su3, rng):
    # the reason its distance to P_0 decays like t^2
    x = rng.standard_normal(8)
    np.testing.assert_allclose(family_bivector(su3, x, 0.3), family_bivector(su3, x, -0.3), atol=1e-12)


@pytest.mark.parametrize("name", ["su2", "su3"])
def test_family_bivector_converges_quadratically(name, rng):
    m = make_group_model(name)
    x = rng.standard_normal(m.dim)
    slope = loglog_slope(GRID, bivector_limit_norms(m, x, GRID))
    assert slope == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("name", ["su2", "su3"])
def test_family_bivector_matches_fd_pullback(name, rng):
    m = make_group_model(name)
    x = rng.standard_normal(m.dim)
    for t in (1e-1, 1e-2, 1e-3):
        np.testing.assert_allclose(family_bivector_fd(m, x, t), family_bivector(m, x, t), atol=1e-7)


def test_family_trivector_vanishes_on_su2(su2, rng):
    x = rng.standard_normal(3)
    assert max(trivector_norms(su2, x, GRID)) < roundoff_floor("trivector", x)
    assert report(su2, "trivector", x, GRID)["slope"] == "inf"


def test_family_trivector_su3_order(su3, rng):
    x = rng.standard_normal(8)
    assert loglog_slope(GRID, trivector_norms(su3, x, GRID)) == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("t", [1.0, 0.5, 0.0])
def test_fibre_quasi_poisson_condition(su3, rng, t):
    x = 0.5 * rng.standard_normal(8)
    assert fiber_condition_residual(su3, x, t) < 1e-6


def test_family_equivariance(su3, rng):
    x = rng.standard_normal(8)
    for t in (0.0, 0.4):
        assert equivariance_residual(su3, x, t, su3.random_element(rng)) < 1e-12


def test_mult_map_branches(su2, rng):
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    a, s = mult_map((x, 0.0), (y, 0.0))
    assert s == 0.0 and np.array_equal(a, x + y)
    g, h = su2.random_element(rng), su2.random_element(rng)
    gh, t = mult_map((g, 0.5), (h, 0.5))
    np.testing.assert_allclose(gh, g @ h)
    with pytest.raises(DomainError):
        mult_map((g, 0.5), (h, 0.25))


def test_mult_chart_order(nonabelian_model, rng):
    x, y = rng.standard_normal(nonabelian_model.dim), rng.standard_normal(nonabelian_model.dim)
    res = mult_residuals(nonabelian_model, x, y, GRID)
    assert loglog_slope(GRID, res, roundoff_floor("mult", x, y)) >= 1.9
    np.testing.assert_allclose(mult_chart(nonabelian_model, x, y, 0.0), x + y)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.5), st.integers(0, 2 ** 32 - 1))
def test_mult_chart_agrees_with_group_product(t, seed):
    m = make_group_model("su2")
    r = np.random.default_rng(seed)
    x, y = 0.5 * r.standard_normal(3), 0.5 * r.standard_normal(3)
    z = mult_chart(m, x, y, t)
    np.testing.assert_allclose(exp_map(m, t * z), exp_map(m, t * x) @ exp_map(m, t * y), atol=1e-12)


def test_fused_family_bivector_at_zero_is_block_diagonal(su3, rng):
    xx = rng.standard_normal(16)
    P = fused_family_bivector(su3, xx, 0.0)
    np.testing.assert_array_equal(P[:8, 8:], 0.0)
    np.testing.assert_array_equal(P[:8, :8], P0_matrix(su3, xx[:8]))


@pytest.mark.parametrize("t", [1.0, 0.5])
def test_fused_family_quasi_poisson(su3, rng, t):
    xx = 0.4 * rng.standard_normal(16)

    def P(z):
        return fused_family_bivector(su3, z, t)

    S = schouten_field(P, P, xx)
    F = fused_family_trivector(su3, xx, t)
    assert np.linalg.norm(F) > 1e-3
    assert np.linalg.norm(S - config.QP_BRACKET_CONSTANT * F) < 1e-6


def test_fused_family_equivariant_under_diagonal_action(su3, rng):
    xx = 0.5 * rng.standard_normal(16)
    A = Ad_matrix(su3, su3.random_element(rng))
    AA = np.kron(np.eye(2), A)
    lhs = fused_family_bivector(su3, AA @ xx, 0.7)
    np.testing.assert_allclose(lhs, AA @ fused_family_bivector(su3, xx, 0.7) @ AA.T, atol=1e-12)


def test_fused_torus_bivector_is_zero():
    m = make_group_model("torus:2")
    assert np.abs(fused_family_bivector(m, np.arange(4.0), 0.6)).max() == 0.0


def test_fused_moment(su2, rng):
    xx = 0.5 * rng.standard_normal(6)
    g, t = fused_moment(su2, xx, 0.5)
    np.testing.assert_allclose(g, exp_map(su2, 0.5 * xx[:3]) @ exp_map(su2, 0.5 * xx[3:]))
    v, t0 = fused_moment(su2, xx, 0.0)
    np.testing.assert_allclose(v, xx[:3] + xx[3:])
    with pytest.raises(DimensionMismatchError):
        fused_family_bivector(su2, np.zeros(5), 0.1)


def test_report_schema(su3, rng):
    x = rng.standard_normal(8)
    rep = report(su3, "bivector", x, GRID, seed=7)
    assert set(rep) == {"group", "x_seed", "t_grid", "norms", "slope", "pass"}
    # the difference to P_0 is O(t^2), outside the configured first-order window
    assert not rep["pass"]
    assert report(su3, "mult", x, GRID, y=rng.standard_normal(8))["pass"]
    with pytest.raises(ValueError):
        report(su3, "quartic", x, GRID)
