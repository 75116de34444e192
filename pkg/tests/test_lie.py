import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from qham_forge.errors import DomainError, SingularInputError, TangentError, UnsupportedModelError
from qham_forge.lie import (Ad, Ad_matrix, ad_matrix, dexp_eta, dexp_left, eta_of_matrix,
                            eta_series, eta_series_coefficients, exp_map, injectivity_radius,
                            jacobi_residual, log_map, make_group_model, model_product,
                            structure_constants_json, theta_L, theta_R)


def test_dimensions_and_matrix_sizes():
    expected = {"su2": (3, 2), "su3": (8, 3), "so3": (3, 3), "torus:2": (2, 2), "prod:su2,su2": (6, 4)}
    for name, (dim, size) in expected.items():
        m = make_group_model(name)
        assert (m.dim, m.matrix_size) == (dim, size)


def test_basis_is_orthonormal(any_model):
    E = any_model.basis
    gram = -np.einsum("iab,jba->ij", E, E).real
    np.testing.assert_allclose(gram, np.eye(any_model.dim), atol=1e-12)


def test_su2_structure_constants_are_sqrt2_epsilon(su2):
    # with e_k = sigma_k / (i sqrt 2) one gets [e_1, e_2] = sqrt(2) e_3
    f = su2.structure_constants
    assert f[0, 1, 2] == pytest.approx(math.sqrt(2), abs=1e-14)
    assert f[1, 0, 2] == pytest.approx(-math.sqrt(2), abs=1e-14)
    assert np.count_nonzero(np.abs(f) > 1e-12) == 6


def test_structure_constants_totally_antisymmetric(any_model):
    f = any_model.structure_constants
    np.testing.assert_allclose(f, -np.swapaxes(f, 0, 1), atol=1e-14)
    np.testing.assert_allclose(f, -np.swapaxes(f, 1, 2), atol=1e-14)


def test_jacobi_identity(any_model):
    assert jacobi_residual(any_model.structure_constants) < 1e-12


def test_torus_is_abelian():
    m = make_group_model("torus:3")
    assert m.is_abelian and not np.any(m.structure_constants)
    assert math.isinf(injectivity_radius(m))


def test_product_is_block_diagonal():
    m = make_group_model("prod:su2,su2")
    f = m.structure_constants
    assert not np.any(f[:3, 3:, :]) and not np.any(f[3:, :3, :])
    single = make_group_model("su2").structure_constants
    np.testing.assert_allclose(f[3:, 3:, 3:], single, atol=1e-15)
    assert model_product(make_group_model("su2"), make_group_model("su2")).dim == 6


def test_unknown_model_rejected():
    with pytest.raises(UnsupportedModelError):
        make_group_model("sp4")
    with pytest.raises(UnsupportedModelError):
        make_group_model("torus:0")


def test_structure_constants_json_roundtrip(su3):
    data = np.array(__import__("json").loads(structure_constants_json(su3)))
    np.testing.assert_allclose(data, su3.structure_constants, atol=1e-14)


def test_random_elements_lie_in_group(any_model, rng):
    for _ in range(10):
        assert any_model.group_residual(any_model.random_element(rng)) < 1e-12


def test_Ad_is_orthogonal_and_a_homomorphism(any_model, rng):
    g, h = any_model.random_element(rng), any_model.random_element(rng)
    A, B = Ad_matrix(any_model, g), Ad_matrix(any_model, h)
    np.testing.assert_allclose(A.T @ A, np.eye(any_model.dim), atol=1e-12)
    np.testing.assert_allclose(Ad_matrix(any_model, g @ h), A @ B, atol=1e-12)
    x = rng.standard_normal(any_model.dim)
    np.testing.assert_allclose(Ad(any_model, g, x), A @ x, atol=1e-12)


def test_ad_is_derivative_of_Ad(any_model, rng):
    x, y = rng.standard_normal(any_model.dim), rng.standard_normal(any_model.dim)
    h = 1e-6
    fd = (Ad_matrix(any_model, exp_map(any_model, h * x))
          - Ad_matrix(any_model, exp_map(any_model, -h * x))) / (2 * h)
    np.testing.assert_allclose(fd @ y, ad_matrix(any_model, x) @ y, atol=1e-8)
    np.testing.assert_allclose(ad_matrix(any_model, x) @ y, any_model.bracket(x, y), atol=1e-12)


def test_exp_log_roundtrip_inside_radius(nonabelian_model, rng):
    r = injectivity_radius(nonabelian_model)
    for _ in range(10):
        x = rng.standard_normal(nonabelian_model.dim)
        x *= 0.9 * r * rng.uniform() / np.linalg.norm(x)
        np.testing.assert_allclose(log_map(nonabelian_model, exp_map(nonabelian_model, x)), x, atol=1e-10)


def test_log_rejects_minus_identity(su2):
    with pytest.raises(DomainError):
        log_map(su2, -np.eye(2))


def test_eta_coefficients_are_bernoulli_numbers():
    # s / (1 - e^{-s}) = 1 + s/2 + s^2/12 - s^4/720 + s^6/30240 + ...
    c = eta_series_coefficients(8)
    np.testing.assert_allclose(c[:7], [1, 0.5, 1 / 12, 0, -1 / 720, 0, 1 / 30240], atol=1e-14)


def test_eta_closed_form_matches_series(nonabelian_model, rng):
    x = rng.standard_normal(nonabelian_model.dim)
    A = ad_matrix(nonabelian_model, 0.3 * x / np.linalg.norm(x))
    np.testing.assert_allclose(eta_of_matrix(2 * A), eta_series(2 * A, 60), atol=1e-10)


def test_eta_inverts_dexp(nonabelian_model, rng):
    x = rng.standard_normal(nonabelian_model.dim)
    x *= 1.5 / np.linalg.norm(x)
    np.testing.assert_allclose(dexp_eta(nonabelian_model, x) @ dexp_left(nonabelian_model, x),
                               np.eye(nonabelian_model.dim), atol=1e-12)


def test_dexp_left_matches_finite_differences(su3, rng):
    x, v = rng.standard_normal(8), rng.standard_normal(8)
    h = 1e-6
    g = exp_map(su3, x)
    dg = (exp_map(su3, x + h * v) - exp_map(su3, x - h * v)) / (2 * h)
    np.testing.assert_allclose(theta_L(su3, g, dg), dexp_left(su3, x) @ v, atol=1e-8)


def test_eta_pole_raises(su2):
    # ad_x has eigenvalues 0, +-i sqrt(2)|x|; put one at 2 pi i
    x = np.array([0.0, 0.0, 2 * np.pi / math.sqrt(2)])
    with pytest.raises(SingularInputError):
        dexp_eta(su2, x)


def test_maurer_cartan_forms(su2, rng):
    g = su2.random_element(rng)
    X = su2.matrix(rng.standard_normal(3))
    np.testing.assert_allclose(theta_L(su2, g, g @ X), su2.coords(X), atol=1e-12)
    np.testing.assert_allclose(theta_R(su2, g, X @ g), su2.coords(X), atol=1e-12)
    with pytest.raises(TangentError):
        theta_L(su2, g, np.eye(2))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 3, elements=st.floats(-1.5, 1.5)),
       arrays(np.float64, 3, elements=st.floats(-1.5, 1.5)))
def test_bracket_antisymmetric_and_ad_invariant_inner_product(x, y):
    m = make_group_model("su2")
    np.testing.assert_allclose(m.bracket(x, y), -m.bracket(y, x), atol=1e-12)
    z = np.array([0.3, -0.2, 0.5])
    # <[x, y], z> + <y, [x, z]> = 0
    assert abs(m.inner(m.bracket(x, y), z) + m.inner(y, m.bracket(x, z))) < 1e-10
