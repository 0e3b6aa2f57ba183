# cr_determinant/services/sphere_cr_service.py
import logging
import math
from enum import Enum
from fractions import Fraction

import numpy as np
import sympy
from scipy.special import roots_legendre

from src.cr_determinant.models.basis_tables import BasisTables
from src.cr_determinant.models.pluri_basis import BasisEntry, BasisKind, PluriBasis
from src.cr_determinant.models.polynomial import (
    Z1, Z2, Z1_BAR, Z2_BAR, Monomial, PolyFn, check_degree, conjugate, constant_poly,
    is_real, make_poly, monomial_poly, terms,
)
from src.cr_determinant.models.quadrature import GridQuadrature
from exceptions import NonRealFunctionException, ConfigException
from config import Config

logger = logging.getLogger(__name__)


class CRField(str, Enum):
    Z1 = "Z1"
    Z1BAR = "Z1bar"
    T = "T"


class SphereCRService:
    """Symbolic calculus on the standard CR sphere in C^2"""

    def __init__(self):
        self.config = Config()

    # --- integration ----------------------------------------------------

    @staticmethod
    def moment_ratio(m: Monomial) -> Fraction:
        """Exact value of the integral of m divided by 4 pi^2"""
        if m.a != m.c or m.b != m.d:
            return Fraction(0)
        return Fraction(math.factorial(m.a) * math.factorial(m.b), math.factorial(m.a + m.b + 1))

    def mono_integrate(self, m: Monomial) -> float:
        return self.config.VOLUME * float(self.moment_ratio(m))

    def integrate(self, f: PolyFn) -> complex:
        total = 0j
        for mono, coef in terms(f):
            ratio = self.moment_ratio(mono)
            if ratio:
                total += coef * float(ratio)
        return total * self.config.VOLUME

    def inner(self, f: PolyFn, g: PolyFn) -> complex:
        """L^2 pairing with the first slot conjugated"""
        return self.integrate(conjugate(f) * g)

    # --- vector fields --------------------------------------------------

    def apply_field(self, f: PolyFn, field: CRField) -> PolyFn:
        check_degree(f, self.config.MAX_DEGREE)
        field = CRField(field)
        if field == CRField.Z1:
            # conj(z2) d/dz1 - conj(z1) d/dz2
            return f.diff(Z1) * monomial_poly(d=1) - f.diff(Z2) * monomial_poly(c=1)
        if field == CRField.Z1BAR:
            # z2 d/dconj(z1) - z1 d/dconj(z2)
            return f.diff(Z1_BAR) * monomial_poly(b=1) - f.diff(Z2_BAR) * monomial_poly(a=1)
        # T = i (z.d - conj(z).dbar) multiplies each monomial by i (a + b - c - d)
        return make_poly({m: sympy.I * (m.holomorphic_degree - m.antiholomorphic_degree) * c
                          for m, c in terms(f)})

    def sublaplacian(self, f: PolyFn) -> PolyFn:
        """Delta_b = -(Z1 Z1bar + Z1bar Z1), nonnegative spectrum"""
        z1_z1bar = self.apply_field(self.apply_field(f, CRField.Z1BAR), CRField.Z1)
        z1bar_z1 = self.apply_field(self.apply_field(f, CRField.Z1), CRField.Z1BAR)
        return -(z1_z1bar + z1bar_z1)

    def horizontal_grad_sq(self, u: PolyFn) -> PolyFn:
        if not is_real(u, self.config.REALITY_TOLERANCE):
            raise NonRealFunctionException("horizontal_grad_sq requires a real polynomial")
        z1u = self.apply_field(u, CRField.Z1)
        return z1u * conjugate(z1u) * 2

    def gradient_pairing(self, f: PolyFn, g: PolyFn) -> PolyFn:
        """2 Re(Z1 f conj(Z1 g)), the polarization of horizontal_grad_sq"""
        z1f = self.apply_field(f, CRField.Z1)
        z1g = self.apply_field(g, CRField.Z1)
        return z1f * conjugate(z1g) + conjugate(z1f) * z1g

    @staticmethod
    def bidegree_eigenvalue(p: int, q: int) -> int:
        return 2 * p * q + p + q

    @staticmethod
    def is_pluriharmonic(f: PolyFn) -> bool:
        return all(m.holomorphic_degree == 0 or m.antiholomorphic_degree == 0 for m, _ in terms(f))

    # --- basis and grid -------------------------------------------------

    def pluri_basis(self, N: int) -> PluriBasis:
        if N < 1:
            raise ConfigException(f"Basis truncation must be at least 1, got {N}")
        if N > self.config.MAX_DEGREE:
            raise ConfigException(f"Basis truncation {N} exceeds the degree cap {self.config.MAX_DEGREE}")

        entries = [BasisEntry(constant_poly(1), 0, BasisKind.CONSTANT, Monomial())]
        for j in range(1, N + 1):
            holomorphic = [Monomial(j - k, k, 0, 0) for k in range(j + 1)]
            for mono in holomorphic:
                entries.append(BasisEntry(make_poly({mono: 1}), j, BasisKind.HOLOMORPHIC, mono))
            for mono in holomorphic:
                conj = mono.conjugate()
                entries.append(BasisEntry(make_poly({conj: 1}), j, BasisKind.ANTIHOLOMORPHIC, conj))

        norms = np.array([
            math.sqrt(self.mono_integrate(e.monomial.times(e.monomial.conjugate())))
            for e in entries
        ])
        logger.debug("Built pluriharmonic basis N=%d with dimension %d", N, len(entries))
        return PluriBasis(tuple(entries), norms, N)

    def quadrature(self, n_eta: int, n_xi: int) -> GridQuadrature:
        if min(n_eta, n_xi) < self.config.MIN_GRID_SIZE:
            raise ConfigException(
                f"Grid sizes must be at least {self.config.MIN_GRID_SIZE}, got ({n_eta}, {n_xi})"
            )
        # Gauss-Legendre in t = cos^2(eta); dt = 2 cos(eta) sin(eta) d(eta) up to sign
        x, w = roots_legendre(n_eta)
        t = 0.5 * (x + 1.0)
        t_weights = 0.5 * w
        eta_nodes = np.arccos(np.sqrt(t))
        xi_nodes = 2.0 * np.pi * np.arange(n_xi) / n_xi
        xi_weight = (2.0 * np.pi / n_xi) ** 2

        eta, xi1, xi2 = np.meshgrid(eta_nodes, xi_nodes, xi_nodes, indexing="ij")
        weights = np.broadcast_to(t_weights[:, None, None] * xi_weight, eta.shape)
        exactness = min(n_xi - 1, 4 * n_eta - 2)
        return GridQuadrature(eta.ravel(), xi1.ravel(), xi2.ravel(), weights.ravel().copy(),
                              exactness, n_eta, n_xi)

    def eval_on_grid(self, f: PolyFn, grid: GridQuadrature) -> np.ndarray:
        return self.eval_at(f, grid.eta, grid.xi1, grid.xi2, grid.cos_eta, grid.sin_eta)

    @staticmethod
    def eval_at(f: PolyFn, eta, xi1, xi2, cos_eta=None, sin_eta=None) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        cos_eta = np.cos(eta) if cos_eta is None else cos_eta
        sin_eta = np.sin(eta) if sin_eta is None else sin_eta
        values = np.zeros(np.broadcast(eta, xi1, xi2).shape, dtype=complex)
        for mono, coef in terms(f):
            radial = cos_eta ** (mono.a + mono.c) * sin_eta ** (mono.b + mono.d)
            phase = np.exp(1j * ((mono.a - mono.c) * np.asarray(xi1) + (mono.b - mono.d) * np.asarray(xi2)))
            values = values + coef * radial * phase
        return values

    def tabulate(self, basis: PluriBasis, grid: GridQuadrature) -> BasisTables:
        """Grid traces of the basis and of Z1, Delta_b, T applied to each entry"""
        n, dim = grid.size, basis.dim
        values = np.empty((n, dim), dtype=complex)
        z1 = np.empty((n, dim), dtype=complex)
        lap = np.empty((n, dim), dtype=complex)
        reeb = np.empty((n, dim), dtype=complex)
        for k, entry in enumerate(basis.entries):
            values[:, k] = self.eval_on_grid(entry.poly, grid)
            z1[:, k] = self.eval_on_grid(self.apply_field(entry.poly, CRField.Z1), grid)
            lap[:, k] = self.eval_on_grid(self.sublaplacian(entry.poly), grid)
            reeb[:, k] = self.eval_on_grid(self.apply_field(entry.poly, CRField.T), grid)
        logger.debug("Tabulated %d basis entries on %d nodes", dim, n)
        return BasisTables(values, z1, lap, reeb, basis.real_to_complex_matrix())
