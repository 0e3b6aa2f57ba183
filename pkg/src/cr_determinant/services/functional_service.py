# cr_determinant/services/functional_service.py
import logging
import math
from typing import Dict, Iterable

import numpy as np

from src.cr_determinant.models.contact_state import ContactState
from src.cr_determinant.models.functional_report import FunctionalReport
from src.cr_determinant.models.polynomial import constant_poly
from src.cr_determinant.services.conformal_service import ConformalService
from src.cr_determinant.services.sphere_cr_service import CRField, SphereCRService
from exceptions import UnsupportedCocyclePartException
from config import Config

logger = logging.getLogger(__name__)

SUPPORTED_COCYCLE_PARTS = ("A1", "A2")


class FunctionalService:
    """Polyakov-formula functionals on the sphere and their gradients"""

    def __init__(self, conformal_service: ConformalService = None):
        self.config = Config()
        self.conformal = conformal_service or ConformalService()
        self.sphere: SphereCRService = self.conformal.sphere
        self._quad_cache: Dict[int, tuple] = {}

    # --- shared pieces ----------------------------------------------------

    @property
    def c1(self) -> float:
        return self.config.C1

    def _pprime_form(self, state: ContactState) -> np.ndarray:
        cached = self._quad_cache.get(id(state.basis))
        if cached is None or cached[0] is not state.basis:
            form = self.conformal.quadratic_form_A(state.basis, self.config.PPRIME_KAPPA)
            cached = (state.basis, form)
            self._quad_cache[id(state.basis)] = cached
        return cached[1]

    def pprime_energy(self, state: ContactState) -> float:
        """<w, A_theta w> with the P' normalization"""
        coeffs = state.coeffs
        return float(coeffs @ self._pprime_form(state) @ coeffs)

    def qprime_linear(self, state: ContactState) -> float:
        """2 int Q' w"""
        return 2.0 * self.config.QPRIME * state.grid.integrate(state.w)

    def log_volume_average(self, state: ContactState) -> float:
        """ln of the average of e^(2w) over the reference volume 4 pi^2"""
        return math.log1p(state.grid.integrate(state.expm1_2w) / self.config.VOLUME)

    @staticmethod
    def _x_density(state: ContactState) -> np.ndarray:
        return state.lap_w + 0.5 * state.grad_sq

    # --- functionals --------------------------------------------------------

    def tildeA1(self, state: ContactState) -> float:
        return (self.pprime_energy(state) + self.qprime_linear(state)
                - self.log_volume_average(state) / self.c1)

    def tildeA2(self, state: ContactState) -> float:
        X = self._x_density(state)
        return 2.0 * state.grid.integrate(self.config.WEBSTER_R * X - X ** 2)

    def tildeA3(self, state: ContactState) -> float:
        integrand = state.reeb_w * (self.config.WEBSTER_R - state.grad_sq / 3.0 - state.lap_w)
        return 2.0 * state.grid.integrate(integrand)

    def functional_II(self, state: ContactState) -> float:
        return (self.pprime_energy(state) + self.qprime_linear(state)
                - self.config.QPRIME_TOTAL * self.log_volume_average(state))

    def functional_III(self, state: ContactState) -> float:
        return self.tildeA2(state)

    def functional_IV(self, state: ContactState) -> float:
        return -self.tildeA3(state)

    def F_value(self, state: ContactState, c2: float, c3: float) -> float:
        value = self.c1 * self.functional_II(state) + c2 * self.functional_III(state)
        if c3:
            value += c3 * self.functional_IV(state)
        return value

    def functional_F(self, state: ContactState, c2: float, c3: float,
                     volume_mode: str = "free") -> FunctionalReport:
        if volume_mode == "normalized":
            state = self.normalize_volume(state)
        A1, A2, A3 = self.tildeA1(state), self.tildeA2(state), self.tildeA3(state)
        II = self.functional_II(state)
        III, IV = A2, -A3
        F = self.c1 * II + c2 * III + c3 * IV
        return FunctionalReport(
            A1=A1, A2=A2, A3=A3, II=II, III=III, IV=IV, F=F,
            c1=self.c1, c2=c2, c3=c3,
            a=self.config.QPRIME_TOTAL / (16.0 * math.pi ** 2),
            log_det_ratio=self.c1 * A1 + c2 * A2 - c3 * A3,
            log_volume_average=self.log_volume_average(state),
            volume_mode=volume_mode,
        )

    def polyakov_log_det_ratio(self, state: ContactState, c2: float, c3: float) -> float:
        """ln(det A_theta / det A_{e^w theta}) = c1 A1 + c2 A2 - c3 A3"""
        return self.c1 * self.tildeA1(state) + c2 * self.tildeA2(state) - c3 * self.tildeA3(state)

    def normalize_volume(self, state: ContactState) -> ContactState:
        """Shift the constant so the average of e^(2w) is 1"""
        return state.shifted(-0.5 * self.log_volume_average(state))

    # --- gradients (real frame, constants entry included) ------------------------

    def _grad_log_average(self, state: ContactState) -> np.ndarray:
        weights = state.grid.weights
        values = state.tables.real_values
        numerator = (weights + weights * state.expm1_2w) @ values
        denominator = self.config.VOLUME + state.grid.integrate(state.expm1_2w)
        return 2.0 * numerator / denominator

    def _grad_quadratic_and_linear(self, state: ContactState) -> np.ndarray:
        weights = state.grid.weights
        linear = 2.0 * self.config.QPRIME * (weights @ state.tables.real_values)
        return 2.0 * self._pprime_form(state) @ state.coeffs + linear

    def _pairing_table(self, state: ContactState) -> np.ndarray:
        """grad_b w . grad_b e_m for every real-frame basis function e_m"""
        return 2.0 * np.real(np.conj(state.tables.real_z1) * state.z1w[:, None])

    def grad_tildeA1(self, state: ContactState) -> np.ndarray:
        return self._grad_quadratic_and_linear(state) - self._grad_log_average(state) / self.c1

    def grad_II(self, state: ContactState) -> np.ndarray:
        return self._grad_quadratic_and_linear(state) - self.config.QPRIME_TOTAL * self._grad_log_average(state)

    def grad_tildeA2(self, state: ContactState) -> np.ndarray:
        weighted = state.grid.weights * (self.config.WEBSTER_R - 2.0 * self._x_density(state))
        return 2.0 * (weighted @ (state.tables.real_sublaplacian + self._pairing_table(state)))

    def grad_tildeA3(self, state: ContactState) -> np.ndarray:
        weights = state.grid.weights
        bracket = weights * (self.config.WEBSTER_R - state.grad_sq / 3.0 - state.lap_w)
        reeb_part = bracket @ state.tables.real_reeb
        weighted_tw = weights * state.reeb_w
        variation = (-(2.0 / 3.0) * (weighted_tw @ self._pairing_table(state))
                     - weighted_tw @ state.tables.real_sublaplacian)
        return 2.0 * (reeb_part + variation)

    def grad_F(self, state: ContactState, c2: float, c3: float) -> np.ndarray:
        grad = self.c1 * self.grad_II(state) + c2 * self.grad_tildeA2(state)
        if c3:
            grad -= c3 * self.grad_tildeA3(state)
        return grad

    def grad_log_det_ratio(self, state: ContactState, c2: float, c3: float) -> np.ndarray:
        grad = self.c1 * self.grad_tildeA1(state) + c2 * self.grad_tildeA2(state)
        if c3:
            grad -= c3 * self.grad_tildeA3(state)
        return grad

    # --- evaluation in the frame e^{w1} theta --------------------------------

    def tildeA1_in_frame(self, frame: ContactState, psi: ContactState) -> float:
        """A1 of psi with e^{w1} theta as the base contact form"""
        matrix = self.conformal.matrix_A_conformal(frame, kappa=self.config.PPRIME_KAPPA)
        coeffs = psi.complex_coeffs
        energy = float(np.real(np.vdot(coeffs, matrix.gram @ (matrix.entries @ coeffs))))
        linear = 2.0 * self.conformal.projected_Qprime_pairing(frame, psi.coeffs)
        weights = frame.grid.weights * frame.exp_2w
        log_average = math.log(np.dot(weights, psi.exp_2w) / np.sum(weights))
        return energy + linear - log_average / self.c1

    def tildeA2_in_frame(self, frame: ContactState, psi: ContactState) -> float:
        """A2 of psi with e^{w1} theta as the base contact form"""
        R = self.conformal.transformed_R(frame)
        lap = self.conformal.frame_sublaplacian(frame, psi.lap_w, psi.z1w)
        grad_sq = self.conformal.transformed_gradient_pairing(frame, psi.z1w, psi.z1w)
        X = lap + 0.5 * grad_sq
        return 2.0 * frame.grid.integrate((R * X - X ** 2) * frame.exp_2w)

    def cocycle_defect(self, w1: ContactState, w2: ContactState,
                       parts: Iterable[str] = SUPPORTED_COCYCLE_PARTS) -> Dict[str, float]:
        """|A_i(w1 + w2) - A_i(w1) - A_i^{e^{w1} theta}(w2)| for each requested part"""
        parts = list(parts)
        unsupported = [p for p in parts if p not in SUPPORTED_COCYCLE_PARTS]
        if unsupported:
            raise UnsupportedCocyclePartException(
                f"Cocycle parts {unsupported} need the conformal law of the characteristic field"
            )
        total = w1.with_coeffs(w1.coeffs + w2.coeffs)
        defects = {}
        if "A1" in parts:
            defects["A1"] = abs(self.tildeA1(total) - self.tildeA1(w1) - self.tildeA1_in_frame(w1, w2))
        if "A2" in parts:
            defects["A2"] = abs(self.tildeA2(total) - self.tildeA2(w1) - self.tildeA2_in_frame(w1, w2))
        logger.debug("Cocycle defects: %s", defects)
        return defects

    # --- local density and first variation --------------------------------------

    def a4_density(self, state: ContactState, c2: float, c3: float) -> np.ndarray:
        """c1 Q' + c2 Delta_b R + c3 R_,0 at the base contact form"""
        R = constant_poly(self.config.WEBSTER_R)
        Q = constant_poly(self.config.QPRIME)
        density = (Q * self.c1 + self.sphere.sublaplacian(R) * c2
                   + self.sphere.apply_field(R, CRField.T) * c3)
        return np.real(self.sphere.eval_on_grid(density, state.grid))

    def variation_defect(self, state: ContactState, v, c2: float, c3: float) -> float:
        """First variation of the log-determinant ratio along v against its local formula"""
        v = np.asarray(v, dtype=float)
        if c3 and not np.allclose(state.coeffs, 0.0):
            raise UnsupportedCocyclePartException(
                "The R_,0 term of the first variation is only available at w = 0"
            )
        lhs = float(self.grad_log_det_ratio(state, c2, c3) @ v)

        v_state = state.with_coeffs(v)
        measure = state.grid.weights * state.exp_2w
        R = self.conformal.transformed_R(state)
        lap_v = self.conformal.frame_sublaplacian(state, v_state.lap_w, v_state.z1w)
        R_poly = constant_poly(self.config.WEBSTER_R)
        reeb_R = np.real(self.sphere.eval_on_grid(self.sphere.apply_field(R_poly, CRField.T), state.grid))
        local = (self.c1 * self.conformal.projected_Qprime_pairing(state, v)
                 + c2 * float(np.dot(measure, R * lap_v))
                 + c3 * float(np.dot(measure, v_state.w * reeb_R)))
        average = float(np.dot(measure, v_state.w)) / float(np.sum(measure))
        rhs = 2.0 * local - 2.0 * average
        return abs(lhs - rhs)
