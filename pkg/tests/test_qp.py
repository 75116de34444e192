import numpy as np
import pytest

from qham_forge import config
from qham_forge.errors import DimensionMismatchError, SingularInputError
from qham_forge.lie import Ad_matrix, exp_map, make_group_model
from qham_forge.multivector import schouten_field
from qham_forge.qp import (P0_bundle, P0_matrix, PG_bundle, PG_chart, PG_left,
                           action_pushforward_fd, calibrate_bracket_constant,
                           conjugacy_family_member, conjugation_space, distribution_dim,
                           double_bundle, double_moment, double_moment_derivative,
                           double_pushforward, candidate_bivector, candidate_invariance_residual,
                           moment_equivariance_fd, omega_condition,
                           phiG_chart, random_chart_points, random_double_point,
                           sample_regular_point, scan_moment_convention, verify_quasi_poisson)


def test_PG_left_is_antisymmetric_and_vanishes_at_identity(any_model, rng):
    g = any_model.random_element(rng)
    C = PG_left(any_model, g)
    np.testing.assert_allclose(C, -C.T, atol=1e-14)
    assert np.abs(PG_left(any_model, any_model.identity)).max() < 1e-14


def test_PG_chart_linearises_to_P0(nonabelian_model, rng):
    x = rng.standard_normal(nonabelian_model.dim)
    for s in (1e-2, 1e-3):
        # P_G(exp(s x)) = P_0(s x) + O(s^2) up to the antisymmetric part
        diff = PG_chart(nonabelian_model, s * x) - P0_matrix(nonabelian_model, s * x)
        assert np.linalg.norm(diff - diff.T) < 10 * s ** 2 * np.linalg.norm(x) ** 2


def test_PG_chart_is_equivariant(nonabelian_model, rng):
    x = random_chart_points(nonabelian_model, rng, 1)[0]
    A = Ad_matrix(nonabelian_model, nonabelian_model.random_element(rng))
    np.testing.assert_allclose(PG_chart(nonabelian_model, A @ x),
                               A @ PG_chart(nonabelian_model, x) @ A.T, atol=1e-12)


def test_fundamental_field_matches_finite_differences(nonabelian_model, rng):
    sp = conjugation_space(nonabelian_model)
    x = random_chart_points(nonabelian_model, rng, 1)[0]
    xi = rng.standard_normal(nonabelian_model.dim)
    np.testing.assert_allclose(sp.fundamental_field_fd(xi, x), sp.infinitesimal_action(xi, x), atol=1e-8)


def test_double_fundamental_field_matches_finite_differences(su3, rng):
    D = double_bundle(su3)
    p = random_double_point(su3, rng)
    xi = rng.standard_normal(16)
    np.testing.assert_allclose(D.space.fundamental_field_fd(xi, p),
                               D.space.infinitesimal_action(xi, p), atol=1e-8)


def test_su3_bracket_constant_is_minus_one(su3, rng):
    x = random_chart_points(su3, rng, 1)[0]
    assert calibrate_bracket_constant(su3, x) == pytest.approx(config.QP_BRACKET_CONSTANT, abs=1e-6)


def test_su2_cannot_fix_the_bracket_constant(su2, rng):
    # the conjugation trivector vanishes identically on a rank-one group
    x = random_chart_points(su2, rng, 1)[0]
    assert np.abs(phiG_chart(su2, x)).max() < 1e-14
    assert calibrate_bracket_constant(su2, x) is None


@pytest.mark.parametrize("name", ["su2", "su3", "so3", "prod:su2,su2", "torus:2"])
def test_quasi_poisson_identity(name, rng):
    m = make_group_model(name)
    rep = verify_quasi_poisson(PG_bundle(m), random_chart_points(m, rng, 3), seed=42)
    assert rep["pass"], rep


def test_quasi_poisson_identity_fails_for_wrong_constant(su3, rng):
    rep = verify_quasi_poisson(PG_bundle(su3), random_chart_points(su3, rng, 2), c=1.0)
    assert not rep["pass"]


def test_P0_is_hamiltonian_poisson(su3, rng):
    B = P0_bundle(su3)
    x = rng.standard_normal(8)
    assert np.linalg.norm(schouten_field(B.P, B.P, x)) < 1e-9
    g = su3.random_element(rng)
    assert B.equivariance_residual(g, x) < 1e-12
    assert moment_equivariance_fd(B, x, rng.standard_normal(8)) < 1e-8


def test_group_moment_equivariance(su3, rng):
    B = PG_bundle(su3)
    x = random_chart_points(su3, rng, 1)[0]
    assert B.equivariance_residual(su3.random_element(rng), x) < 1e-12
    assert moment_equivariance_fd(B, x, rng.standard_normal(8)) < 1e-8


def test_distribution_is_tangent_to_conjugacy_classes(rng):
    # regular conjugacy classes have dimension dim G - rank
    for name, expected in [("su2", 2), ("su3", 6)]:
        m = make_group_model(name)
        x = random_chart_points(m, rng, 1)[0]
        assert distribution_dim(PG_bundle(m), x) == expected
        assert distribution_dim(P0_bundle(m), x) == expected


def test_double_moment_derivative_matches_finite_differences(su2, rng):
    a, b = random_double_point(su2, rng)
    D = double_moment_derivative(su2, a, b)
    B = double_bundle(su2)
    for k in range(6):
        v = np.zeros(6)
        v[k] = 1e-6
        plus = (a @ exp_map(su2, v[:3]), b @ exp_map(su2, v[3:]))
        minus = (a @ exp_map(su2, -v[:3]), b @ exp_map(su2, -v[3:]))
        mp, mm = double_moment(su2, *plus), double_moment(su2, *minus)
        col = B.space.tangent_difference(mp, mm, 1e-6)
        np.testing.assert_allclose(col, D[:, k], atol=1e-7)


def test_double_action_pushforward(su2, rng):
    B = double_bundle(su2)
    p = random_double_point(su2, rng)
    gh = (su2.random_element(rng), su2.random_element(rng))
    np.testing.assert_allclose(action_pushforward_fd(B.space, gh, p), double_pushforward(su2, gh), atol=1e-8)


def test_moment_axiom_convention_is_unique(nonabelian_model, rng):
    B = double_bundle(nonabelian_model)
    scan = scan_moment_convention(B, sample_regular_point(B, rng))
    passing = [k for k, v in scan.items() if v < 1e-10]
    assert passing == [(-1.0, 0.5)]


def test_double_is_nondegenerate(su3, rng):
    B = double_bundle(su3)
    assert distribution_dim(B, sample_regular_point(B, rng)) == 16


def test_candidate_bivector_is_antisymmetric_and_invariant(nonabelian_model, rng):
    B = double_bundle(nonabelian_model)
    for _ in range(3):
        p = sample_regular_point(B, rng)
        P, res = candidate_bivector(B, p)
        assert res < 1e-7
        gh = (nonabelian_model.random_element(rng), nonabelian_model.random_element(rng))
        assert candidate_invariance_residual(B, p, gh) < 1e-6


def test_candidate_bivector_rejects_degenerate_omega(su2):
    B = double_bundle(su2)
    # a rotation by pi gives Ad_b an eigenvalue -1, so 1 + Ad_b is singular
    b = exp_map(su2, np.array([0.0, 0.0, np.pi / np.sqrt(2)]))
    p = (np.eye(2, dtype=complex), b)
    assert omega_condition(B, p) > 1e12
    with pytest.raises(SingularInputError):
        candidate_bivector(B, p)


def test_conjugacy_family_member(su3, rng):
    x = rng.standard_normal(8)
    g = su3.random_element(rng)
    h = g @ exp_map(su3, 0.3 * x) @ su3.inverse(g)
    assert conjugacy_family_member(su3, x, 0.3, h)
    assert not conjugacy_family_member(su3, x, 0.31, h)
    A = Ad_matrix(su3, g)
    assert conjugacy_family_member(su3, x, 0.0, A @ x)
    assert not conjugacy_family_member(su3, x, 0.0, 1.1 * x)
    with pytest.raises(DimensionMismatchError):
        conjugacy_family_member(su3, x, 0.0, h)


def test_torus_conjugacy_is_equality():
    m = make_group_model("torus:2")
    x = np.array([0.3, -0.1])
    assert conjugacy_family_member(m, x, 1.0, exp_map(m, x))
    assert not conjugacy_family_member(m, x, 1.0, exp_map(m, x[::-1]))


def test_alternate_names_are_aliases():
    from qham_forge import qp
    assert qp.eq1_candidate_P is qp.candidate_bivector
    assert qp.eq1_operator is qp.moment_correction_operator
