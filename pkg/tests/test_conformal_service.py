import math

import numpy as np
import pytest

from src.cr_determinant.models.polynomial import constant_poly, max_abs_coefficient, monomial_poly
from src.cr_determinant.services.conformal_service import ConformalService
from src.cr_determinant.services.sphere_cr_service import SphereCRService
from exceptions import NonPluriharmonicException, ProjectionConditioningException


@pytest.fixture(scope="module")
def conformal():
    return ConformalService(SphereCRService())


@pytest.fixture(scope="module")
def template(conformal):
    basis = conformal.sphere.pluri_basis(3)
    grid = conformal.sphere.quadrature(12, 32)
    return conformal.build_state(basis, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def epsilon_u(template, eps):
    """State for w = eps (z1 + conj z1) = 2 eps Re z1"""
    coeffs = np.zeros(template.basis.dim)
    coeffs[1] = 2.0 * eps
    return template.with_coeffs(coeffs)


# Projections
def test_projection_of_constants(conformal, template):
    coeffs = conformal.project_pluri(np.ones(template.grid.size), template)
    assert coeffs[0] == pytest.approx(1.0)
    np.testing.assert_allclose(coeffs[1:], 0.0, atol=1e-13)


def test_projection_of_abs_z1_squared(conformal, template):
    values = conformal.sphere.eval_on_grid(monomial_poly(1, 0, 1, 0), template.grid)
    coeffs = conformal.project_pluri(values, template)
    assert coeffs[0] == pytest.approx(0.5)
    np.testing.assert_allclose(coeffs[1:], 0.0, atol=1e-13)


def test_projection_reproduces_basis_functions(conformal, template, rng):
    state = conformal.random_state(template, rng, 0.5)
    for weight in ("base", "conformal"):
        for k in range(template.basis.dim):
            coeffs = conformal.project_pluri(template.tables.values[:, k], state, weight)
            expected = np.zeros(template.basis.dim)
            expected[k] = 1.0
            np.testing.assert_allclose(coeffs, expected, atol=1e-10)


def test_projection_is_idempotent(conformal, template, rng):
    state = conformal.random_state(template, rng, 0.5)
    for weight in ("base", "conformal"):
        for _ in range(10):
            values = rng.standard_normal(template.grid.size)
            once = conformal.projection_values(values, state, weight)
            twice = conformal.projection_values(once, state, weight)
            np.testing.assert_allclose(twice, once, atol=1e-10 * np.max(np.abs(once)))


def test_constant_weight_leaves_projection_unchanged(conformal, template, rng):
    state = template.shifted(0.7)
    values = rng.standard_normal(template.grid.size)
    np.testing.assert_allclose(conformal.project_pluri(values, state, "conformal"),
                               conformal.project_pluri(values, state, "base"), atol=1e-12)


def test_ill_conditioned_gram_fails_explicitly(conformal):
    basis = conformal.sphere.pluri_basis(6)
    grid = conformal.sphere.quadrature(4, 4)
    state = conformal.build_state(basis, grid)
    with pytest.raises(ProjectionConditioningException) as info:
        conformal.weighted_gram(state)
    assert info.value.condition_number > 1e12


# Transformation laws
def test_transformed_R(conformal, template):
    np.testing.assert_allclose(conformal.transformed_R(template), 2.0)
    np.testing.assert_allclose(conformal.transformed_R(template.shifted(0.3)), 2.0 * math.exp(-0.3))

    eps = 0.2
    state = epsilon_u(template, eps)
    grid = template.grid
    u = 2.0 * np.real(grid.z1)
    abs_z2_sq = np.abs(grid.z2) ** 2
    expected = (2.0 - 2.0 * eps ** 2 * abs_z2_sq - 2.0 * eps * u) * np.exp(-eps * u)
    np.testing.assert_allclose(conformal.transformed_R(state), expected, atol=1e-13)


def test_transformed_sublap_trivial_frames(conformal, template):
    f = template.tables.values[:, 1]  # z1
    lap_f = template.tables.sublaplacian[:, 1]
    np.testing.assert_allclose(conformal.transformed_sublap(template, f), lap_f, atol=1e-12)
    shifted = template.shifted(-0.4)
    np.testing.assert_allclose(conformal.transformed_sublap(shifted, f), math.exp(0.4) * lap_f, atol=1e-12)


def test_transformed_sublap_round_trip(conformal, template, rng):
    state = conformal.random_state(template, rng, 0.5)
    k = 7  # Re(z1 z2) in the real frame
    f = template.tables.real_values[:, k]
    z1_f = template.tables.real_z1[:, k]
    in_frame = conformal.transformed_sublap(state, f)
    # back to theta with the conformal factor -w, pairings taken in the frame e^w theta
    pairing_back = -conformal.transformed_gradient_pairing(state, z1_f, state.z1w)
    recovered = np.exp(state.w) * (in_frame + pairing_back)
    np.testing.assert_allclose(recovered, template.tables.real_sublaplacian[:, k], atol=1e-9)


# Operators
def test_matrix_A_entries(conformal, template):
    matrix = conformal.matrix_A(template.basis, 1.0)
    diagonal = np.real(np.diag(matrix.entries))
    assert diagonal[0] == 0.0
    assert diagonal[1] == pytest.approx(2.0)  # z1
    assert diagonal[5] == pytest.approx(6.0)  # z1^2
    np.testing.assert_allclose(conformal.matrix_A(template.basis, 4.0).entries, 4.0 * matrix.entries)


def test_matrix_A_rejects_nonpositive_kappa(conformal, template):
    with pytest.raises(ValueError):
        conformal.matrix_A(template.basis, 0.0)


def test_matrix_A_conformal_trivial_frames(conformal, template):
    base = conformal.matrix_A(template.basis, 1.0).entries
    np.testing.assert_allclose(conformal.matrix_A_conformal(template, kappa=1.0).entries, base, atol=1e-10)
    c = 0.35
    scaled = conformal.matrix_A_conformal(template.shifted(c), kappa=1.0).entries
    np.testing.assert_allclose(scaled, math.exp(-2 * c) * base, atol=1e-10)


def test_matrix_A_conformal_spectrum(conformal, template, rng):
    state = conformal.random_state(template, rng, 0.5)
    matrix = conformal.matrix_A_conformal(state, kappa=1.0)
    eigenvalues = matrix.eigenvalues()
    scale = np.max(np.abs(eigenvalues))
    assert eigenvalues.min() >= -1e-9 * scale
    assert np.sum(np.abs(eigenvalues) < 1e-9 * scale) == 1
    np.testing.assert_allclose(matrix.entries[:, 0], 0.0, atol=1e-10)


def test_pprime_formula(conformal):
    assert conformal.pprime_formula(constant_poly(1)).is_zero
    assert max_abs_coefficient(conformal.pprime_formula(monomial_poly(a=1)) - monomial_poly(a=1, coef=8)) == 0
    for j in range(1, 7):
        image = conformal.pprime_formula(monomial_poly(a=j))
        assert max_abs_coefficient(image - monomial_poly(a=j, coef=4 * j * (j + 1))) == 0


def test_pprime_formula_rejects_non_pluriharmonic(conformal):
    with pytest.raises(NonPluriharmonicException):
        conformal.pprime_formula(monomial_poly(1, 0, 1, 0))


def test_total_qprime_is_invariant(conformal, template, rng):
    unit = np.zeros(template.basis.dim)
    unit[0] = 1.0
    for _ in range(5):
        state = conformal.random_state(template, rng, 1.0)
        total = conformal.projected_Qprime_pairing(state, unit)
        assert total == pytest.approx(16 * math.pi ** 2, rel=1e-9)


def test_qprime_pairing_of_odd_function_vanishes(conformal, template):
    v = np.zeros(template.basis.dim)
    v[1] = 2.0  # z1 + conj z1
    assert abs(conformal.projected_Qprime_pairing(template, v)) < 1e-12


def test_qprime_pairing_along_w(conformal, template):
    eps = 0.1
    state = epsilon_u(template, eps)
    # <w, A w> with the P' normalization: kappa 4 * j(j+1) = 8 on degree 1, ||w||^2 = eps^2 * 4 pi^2
    expected = 8.0 * eps ** 2 * 4 * math.pi ** 2
    assert conformal.projected_Qprime_pairing(state, state.coeffs) == pytest.approx(expected, rel=1e-12)
