# cr_determinant/services/conformal_service.py
import logging
from typing import Optional

import numpy as np
from scipy import linalg

from src.cr_determinant.models.basis_tables import BasisTables
from src.cr_determinant.models.contact_state import ContactState
from src.cr_determinant.models.operator_matrix import InnerProduct, OperatorMatrix
from src.cr_determinant.models.pluri_basis import PluriBasis
from src.cr_determinant.models.polynomial import PolyFn
from src.cr_determinant.models.quadrature import GridQuadrature
from src.cr_determinant.services.sphere_cr_service import SphereCRService
from exceptions import NonPluriharmonicException, ProjectionConditioningException
from config import Config

logger = logging.getLogger(__name__)


class ConformalService:
    """Contact forms e^w theta for pluriharmonic w and the operators they carry"""

    def __init__(self, sphere_service: SphereCRService = None):
        self.config = Config()
        self.sphere = sphere_service or SphereCRService()

    # --- states ---------------------------------------------------------

    def build_state(self, basis: PluriBasis, grid: GridQuadrature, coeffs=None,
                    tables: Optional[BasisTables] = None) -> ContactState:
        """State for the real-frame coefficients `coeffs` (zero when omitted)"""
        tables = tables or self.sphere.tabulate(basis, grid)
        coeffs = np.zeros(basis.dim) if coeffs is None else np.asarray(coeffs, dtype=float)
        if coeffs.shape != (basis.dim,):
            raise ValueError(f"Expected {basis.dim} real-frame coefficients, got {coeffs.shape}")
        return ContactState.from_coeffs(basis, grid, tables, coeffs)

    def random_state(self, template: ContactState, rng: np.random.Generator,
                     sup_norm: float, with_constant: bool = True) -> ContactState:
        """Random state whose sup norm on the grid is drawn uniformly from (0, sup_norm]"""
        coeffs = rng.standard_normal(template.basis.dim)
        if not with_constant:
            coeffs[0] = 0.0
        values = template.tables.real_values @ coeffs
        peak = float(np.max(np.abs(values)))
        target = sup_norm * rng.uniform(0.05, 1.0)
        if peak > 0:
            coeffs *= target / peak
        return template.with_coeffs(coeffs)

    # --- projections ----------------------------------------------------

    def _weights(self, state: ContactState, weight: str) -> np.ndarray:
        if weight == InnerProduct.CONFORMAL or weight == "conformal":
            return state.grid.weights * state.exp_2w
        return state.grid.weights

    def weighted_gram(self, state: ContactState, weight: str = "base") -> np.ndarray:
        B = state.tables.values
        W = self._weights(state, weight)
        gram = B.conj().T @ (W[:, None] * B)
        gram = 0.5 * (gram + gram.conj().T)
        condition = np.linalg.cond(gram)
        if condition > self.config.MAX_GRAM_CONDITION:
            raise ProjectionConditioningException(condition, self.config.MAX_GRAM_CONDITION)
        if condition > 1e-3 * self.config.MAX_GRAM_CONDITION:
            logger.warning("Weighted Gram condition number %.3e is close to the limit", condition)
        return gram

    def project_pluri(self, values, state: ContactState, weight: str = "base") -> np.ndarray:
        """Complex basis coefficients of the weighted L^2 projection of grid values"""
        values = np.asarray(values, dtype=complex)
        B = state.tables.values
        W = self._weights(state, weight)
        gram = self.weighted_gram(state, weight)
        rhs = B.conj().T @ (W * values)
        return linalg.solve(gram, rhs, assume_a="her")

    def projection_values(self, values, state: ContactState, weight: str = "base") -> np.ndarray:
        return state.tables.values @ self.project_pluri(values, state, weight)

    # --- transformation laws ----------------------------------------------

    def transformed_R(self, state: ContactState) -> np.ndarray:
        R = self.config.WEBSTER_R
        return (R - state.grad_sq - 2.0 * state.lap_w) * np.exp(-state.w)

    def frame_sublaplacian(self, state: ContactState, lap_f: np.ndarray, z1_f: np.ndarray) -> np.ndarray:
        """Delta_b of a real f in the frame e^w theta, from base-frame Delta_b f and Z1 f"""
        return np.exp(-state.w) * (lap_f + self.gradient_pairing(z1_f, state.z1w))

    @staticmethod
    def gradient_pairing(z1_f: np.ndarray, z1_g: np.ndarray) -> np.ndarray:
        """grad_b f . grad_b g = 2 Re(Z1 f conj(Z1 g)) for real f, g"""
        return 2.0 * np.real(z1_f * np.conj(z1_g))

    def transformed_gradient_pairing(self, state: ContactState, z1_f: np.ndarray, z1_g: np.ndarray) -> np.ndarray:
        return np.exp(-state.w) * self.gradient_pairing(z1_f, z1_g)

    def transformed_sublap(self, state: ContactState, f) -> np.ndarray:
        """Delta_b in the frame e^w theta applied to the grid trace of a basis function.

        The law is linear in f, so complex input is split into real and imaginary parts.
        """
        f = np.asarray(f)
        if np.iscomplexobj(f):
            return (self.transformed_sublap(state, f.real)
                    + 1j * self.transformed_sublap(state, f.imag))
        coeffs = self.project_pluri(f, state)
        lap_f = np.real(state.tables.sublaplacian @ coeffs)
        z1_f = state.tables.z1 @ coeffs
        return self.frame_sublaplacian(state, lap_f, z1_f)

    # --- operators --------------------------------------------------------

    def spectrum_diagonal(self, basis: PluriBasis, kappa: float = None) -> np.ndarray:
        kappa = self.config.KAPPA if kappa is None else kappa
        j = basis.degrees
        return kappa * j * (j + 1.0)

    def matrix_A(self, basis: PluriBasis, kappa: float = None) -> OperatorMatrix:
        kappa = self.config.KAPPA if kappa is None else kappa
        if kappa <= 0:
            raise ValueError(f"kappa must be positive, got {kappa}")
        diagonal = self.spectrum_diagonal(basis, kappa)
        gram = np.diag(basis.norms ** 2).astype(complex)
        return OperatorMatrix(np.diag(diagonal).astype(complex), InnerProduct.BASE, kappa,
                              form=gram * diagonal[None, :], gram=gram)

    def matrix_A_conformal(self, state: ContactState, basis: PluriBasis = None,
                           kappa: float = None) -> OperatorMatrix:
        """tau_{e^w theta}(e^{-2w} A_theta) realized on the basis"""
        kappa = self.config.KAPPA if kappa is None else kappa
        B = state.tables.values
        diagonal = self.spectrum_diagonal(state.basis, kappa)
        gram_conf = self.weighted_gram(state, "conformal")
        measure = state.grid.weights * state.exp_2w * np.exp(-2.0 * state.w)
        form = B.conj().T @ (measure[:, None] * (B * diagonal[None, :]))
        form = 0.5 * (form + form.conj().T)
        entries = linalg.solve(gram_conf, form, assume_a="her")
        return OperatorMatrix(entries, InnerProduct.CONFORMAL, kappa, form=form, gram=gram_conf)

    def pprime_formula(self, f: PolyFn) -> PolyFn:
        """4 Delta_b^2 f + 4 Delta_b f, the sphere form of P' (A_11 = 0, R = 2)"""
        if not self.sphere.is_pluriharmonic(f):
            raise NonPluriharmonicException(f"{f.as_expr()} is not pluriharmonic")
        lap = self.sphere.sublaplacian(f)
        return self.sphere.sublaplacian(lap) * 4.0 + lap * 4.0

    def quadratic_form_A(self, basis: PluriBasis, kappa: float) -> np.ndarray:
        """Real-frame matrix of w -> <w, A w> with exact norms"""
        C = basis.real_to_complex_matrix()
        diagonal = self.spectrum_diagonal(basis, kappa) * basis.norms ** 2
        return np.real(C.conj().T @ (diagonal[:, None] * C))

    def projected_Qprime_pairing(self, state: ContactState, v) -> float:
        """Integral of v Q'_{e^w theta} against the transformed volume, for pluriharmonic v"""
        v = np.asarray(v, dtype=float)
        quad = self.quadratic_form_A(state.basis, self.config.PPRIME_KAPPA)
        return float(v @ quad @ state.coeffs + self.config.QPRIME * self.config.VOLUME * v[0])
