import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import sympy

from src.cr_determinant.models.polynomial import (
    Z1, Z2, Z1_BAR, Z2_BAR, Monomial, coefficient, conjugate, constant_poly, is_real,
    make_poly, max_abs_coefficient, monomial_poly, terms, total_degree,
)
from src.cr_determinant.services.sphere_cr_service import CRField, SphereCRService
from exceptions import ConfigException, DegreeCapExceededException, NonRealFunctionException


@pytest.fixture(scope="module")
def service():
    return SphereCRService()


@pytest.fixture(scope="module")
def grid(service):
    return service.quadrature(8, 24)


def z1(power=1):
    return monomial_poly(a=power)


def u_real():
    """z1 + conj(z1)"""
    return monomial_poly(a=1) + monomial_poly(c=1)


def assert_same(p, q, tol=0.0):
    assert max_abs_coefficient(p - q) <= tol


# Polynomials
def test_poly_helpers():
    p = make_poly({Monomial(2, 0, 0, 1): 3 + 1j, Monomial(): 0})
    assert list(terms(p)) == [(Monomial(2, 0, 0, 1), 3 + 1j)]
    assert coefficient(p, Monomial(2, 0, 0, 1)) == 3 + 1j
    assert coefficient(p, Monomial(1, 0, 0, 0)) == 0
    assert total_degree(p) == 3
    assert total_degree(make_poly({})) == 0
    assert_same(conjugate(p), monomial_poly(b=1, c=2, coef=3 - 1j))
    assert not is_real(p)
    assert is_real(p + conjugate(p))


def test_poly_matches_sympy_expression():
    p = sympy.Poly(Z1 ** 2 * Z2_BAR - 2 * sympy.I * Z2 * Z1_BAR, Z1, Z2, Z1_BAR, Z2_BAR)
    expected = monomial_poly(a=2, d=1) + monomial_poly(b=1, c=1, coef=-2j)
    assert_same(p, expected)


# Integration
def test_mono_integrate_moments(service):
    assert service.mono_integrate(Monomial()) == pytest.approx(4 * math.pi ** 2, rel=1e-15)
    assert service.mono_integrate(Monomial(1, 0, 1, 0)) == pytest.approx(2 * math.pi ** 2, rel=1e-15)
    assert service.mono_integrate(Monomial(1, 0, 0, 1)) == 0.0
    assert service.mono_integrate(Monomial(1, 2, 1, 2)) == pytest.approx(math.pi ** 2 / 3, rel=1e-14)


def test_moment_ratio_is_exact_beyond_degree_20(service):
    ratio = service.moment_ratio(Monomial(15, 10, 15, 10))
    assert ratio == Fraction(math.factorial(15) * math.factorial(10), math.factorial(26))


def test_sphere_relation_integrates_to_volume(service):
    sphere_relation = monomial_poly(1, 0, 1, 0) + monomial_poly(0, 1, 0, 1)
    assert service.integrate(sphere_relation).real == pytest.approx(4 * math.pi ** 2, rel=1e-15)


# Vector fields
def test_z1bar_annihilates_holomorphic(service):
    for j in range(1, 7):
        assert service.apply_field(z1(j), CRField.Z1BAR).is_zero
    assert service.apply_field(monomial_poly(a=2, b=3), CRField.Z1BAR).is_zero


def test_reeb_field_on_monomials(service):
    image = service.apply_field(monomial_poly(a=2, b=1), CRField.T)
    assert_same(image, monomial_poly(a=2, b=1, coef=3j))


def test_z1_of_z1_is_conj_z2(service):
    assert_same(service.apply_field(z1(), CRField.Z1), monomial_poly(d=1))


def test_reeb_field_maps_real_to_real(service):
    rng = np.random.default_rng(3)
    for _ in range(10):
        coef = complex(*rng.standard_normal(2))
        p = monomial_poly(a=2, d=1, coef=coef)
        f = p + conjugate(p)
        assert is_real(service.apply_field(f, CRField.T), 1e-14)


def test_degree_cap_is_enforced(service):
    with pytest.raises(DegreeCapExceededException):
        service.apply_field(monomial_poly(a=41), CRField.Z1)


# Sub-Laplacian
def test_sublaplacian_on_holomorphic_powers(service):
    assert service.sublaplacian(constant_poly(1)).is_zero
    for j in range(1, 7):
        assert_same(service.sublaplacian(z1(j)), z1(j) * j)


def test_sublaplacian_bidegree_table(service, grid):
    for p, q in product(range(5), repeat=2):
        f = monomial_poly(a=p, d=q)  # z1^p conj(z2)^q is harmonic of bidegree (p, q)
        lhs = service.eval_on_grid(service.sublaplacian(f), grid)
        rhs = service.bidegree_eigenvalue(p, q) * service.eval_on_grid(f, grid)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1, 2 * p * q + p + q))


def test_sublaplacian_on_bidegree_one_one(service, grid):
    f = monomial_poly(1, 0, 1, 0) - monomial_poly(0, 1, 0, 1)
    lhs = service.eval_on_grid(service.sublaplacian(f), grid)
    np.testing.assert_allclose(lhs, 4.0 * service.eval_on_grid(f, grid), atol=1e-12)


# Horizontal gradient
def test_horizontal_grad_sq(service):
    assert service.horizontal_grad_sq(constant_poly(3)).is_zero
    assert_same(service.horizontal_grad_sq(u_real()), monomial_poly(b=1, d=1, coef=2))


def test_horizontal_grad_sq_rejects_complex(service):
    with pytest.raises(NonRealFunctionException):
        service.horizontal_grad_sq(z1())


def test_calibration_identity(service):
    rng = np.random.default_rng(7)
    polys = [u_real()]
    for _ in range(20):
        coeffs = {}
        for _ in range(4):
            mono = Monomial(*map(int, rng.integers(0, 2, size=4)))
            coeffs[mono] = coeffs.get(mono, 0j) + complex(*rng.standard_normal(2))
        p = make_poly(coeffs)
        polys.append(p + conjugate(p))
    for u in polys:
        residual = (service.sublaplacian(u * u) - u * service.sublaplacian(u) * 2
                    + service.horizontal_grad_sq(u) * 2)
        assert max_abs_coefficient(residual) < 1e-12


# Basis
@pytest.mark.parametrize("N, dim", [(1, 5), (2, 11), (4, 29)])
def test_pluri_basis_dimension(service, N, dim):
    basis = service.pluri_basis(N)
    assert basis.dim == dim == N * N + 3 * N + 1


def test_pluri_basis_norms_and_orthogonality(service):
    basis = service.pluri_basis(3)
    assert basis.norms[1] ** 2 == pytest.approx(2 * math.pi ** 2)
    gram = np.array([[service.inner(e.poly, f.poly) for f in basis.entries] for e in basis.entries])
    np.testing.assert_allclose(gram, np.diag(basis.norms ** 2), atol=1e-13)
    assert sum(1 for e in basis.entries if e.degree == 0) == 1


def test_real_frame_polynomial(service):
    basis = service.pluri_basis(2)
    coeffs = np.zeros(basis.dim)
    coeffs[1] = 2.0   # Re z1
    coeffs[6] = -4.0  # Im z1^2
    poly = basis.as_poly(coeffs)
    expected = (monomial_poly(a=1) + monomial_poly(c=1)
                + monomial_poly(a=2, coef=2j) + monomial_poly(c=2, coef=-2j))
    assert_same(poly, expected, 1e-15)
    assert is_real(poly)
    assert service.is_pluriharmonic(poly)


def test_pluri_basis_rejects_zero_truncation(service):
    with pytest.raises(ConfigException):
        service.pluri_basis(0)


# Quadrature
def test_quadrature_volume(service, grid):
    assert grid.volume == pytest.approx(4 * math.pi ** 2, rel=1e-12)


def test_quadrature_moments(service, grid):
    values = service.eval_on_grid(monomial_poly(1, 2, 1, 2), grid)
    assert grid.integrate(values).real == pytest.approx(math.pi ** 2 / 3, rel=1e-12)
    assert abs(grid.integrate(service.eval_on_grid(z1(), grid))) < 1e-12
    abs_z1 = service.eval_on_grid(monomial_poly(1, 0, 1, 0), grid)
    assert grid.integrate(abs_z1).real == pytest.approx(2 * math.pi ** 2, rel=1e-12)


def test_quadrature_exactness_degree(service):
    small = service.quadrature(4, 8)
    assert small.exactness_degree == 7
    degree = small.exactness_degree
    for exps in product(range(degree + 1), repeat=4):
        if sum(exps) > degree:
            continue
        mono = Monomial(*exps)
        numeric = small.integrate(service.eval_on_grid(make_poly({mono: 1}), small))
        exact = service.mono_integrate(mono)
        assert abs(numeric - exact) <= 1e-12 * max(1.0, exact)


def test_quadrature_rejects_small_sizes(service):
    with pytest.raises(ConfigException):
        service.quadrature(3, 40)


def test_eval_on_grid(service, grid):
    np.testing.assert_allclose(service.eval_on_grid(constant_poly(1), grid), 1.0)
    value = complex(service.eval_at(z1(), 0.0, 0.0, 1.234))
    assert abs(value - 1.0) < 1e-15
    real_values = service.eval_on_grid(u_real() * u_real(), grid)
    assert np.max(np.abs(real_values.imag)) < 1e-13
