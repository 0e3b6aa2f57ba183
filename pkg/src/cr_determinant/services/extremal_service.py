# cr_determinant/services/extremal_service.py
import logging
import math
from collections import deque
from typing import Optional

import numpy as np
from scipy import linalg

from src.cr_determinant.models.ascent_trace import AscentIterate, AscentTrace
from src.cr_determinant.models.contact_state import ContactState
from src.cr_determinant.models.feasibility_report import CoercivityAudit, FeasibilityReport
from src.cr_determinant.models.pluri_basis import BasisKind, PluriBasis
from src.cr_determinant.models.synthetic_model import SyntheticModel
from src.cr_determinant.models.variation_defects import VariationDefects
from src.cr_determinant.services.functional_service import FunctionalService
from src.cr_determinant.services.sphere_cr_service import CRField
from exceptions import HypothesisViolationException, SingularLaplacianException
from config import Config

logger = logging.getLogger(__name__)


class ExtremalService:
    """Feasibility of the maximization problem and the ascent that solves it"""

    def __init__(self, functional_service: FunctionalService = None):
        self.config = Config()
        self.functionals = functional_service or FunctionalService()
        self.conformal = self.functionals.conformal
        self.sphere = self.functionals.sphere

    # --- best constant ------------------------------------------------------

    def _ratio_from_forms(self, t_form: np.ndarray, lap_form: np.ndarray) -> float:
        lap_form = 0.5 * (lap_form + lap_form.conj().T)
        t_form = 0.5 * (t_form + t_form.conj().T)
        lap_eigs = np.linalg.eigvalsh(lap_form)
        if lap_eigs.size == 0 or lap_eigs[0] <= 1e-12 * max(lap_eigs[-1], 1.0):
            raise SingularLaplacianException("Delta_b is singular off the constants")
        ratios = linalg.eigh(t_form, lap_form, eigvals_only=True)
        return math.sqrt(max(float(ratios[-1]), 0.0))

    def best_constant_lambda(self, basis: PluriBasis = None, max_degree: Optional[int] = None,
                             model: SyntheticModel = None) -> float:
        """Best constant in ||T f|| <= lambda ||Delta_b f|| on the nonconstant part"""
        if model is not None:
            return self._model_lambda(model)
        basis = basis or self.sphere.pluri_basis(self.config.DEFAULT_DEGREE)
        entries = [e for e in basis.entries if e.kind != BasisKind.CONSTANT
                   and (max_degree is None or e.degree <= max_degree)]
        if not entries:
            raise SingularLaplacianException("No nonconstant basis entries to compare")
        polys = [e.poly for e in entries]
        t_images = [self.sphere.apply_field(p, CRField.T) for p in polys]
        lap_images = [self.sphere.sublaplacian(p) for p in polys]
        size = len(polys)
        t_form = np.empty((size, size), dtype=complex)
        lap_form = np.empty((size, size), dtype=complex)
        for k in range(size):
            for l in range(size):
                t_form[k, l] = self.sphere.inner(t_images[k], t_images[l])
                lap_form[k, l] = self.sphere.inner(lap_images[k], lap_images[l])
        return self._ratio_from_forms(t_form, lap_form)

    def _model_lambda(self, model: SyntheticModel) -> float:
        complement = linalg.null_space(model.weights.reshape(1, -1))
        W = np.diag(model.weights)
        T_restricted = model.T @ complement
        lap_restricted = model.laplacian @ complement
        return self._ratio_from_forms(T_restricted.T @ W @ T_restricted,
                                      lap_restricted.T @ W @ lap_restricted)

    # --- feasibility ----------------------------------------------------------

    def _check_hypotheses(self, c2: float, c3: float):
        if c2 <= 0:
            raise HypothesisViolationException(f"c2 must be positive, got {c2}")
        if c3 < 0:
            raise HypothesisViolationException(f"c3 must be nonnegative, got {c3}")

    def condition_feasible(self, c2: float, c3: float, a: float, mu: float = None,
                           lam: float = None) -> FeasibilityReport:
        self._check_hypotheses(c2, c3)
        lam = self.best_constant_lambda() if lam is None else lam
        mu = lam / 3.0 if mu is None else mu

        # mu (sqrt(25 c2^2 + B) - 5 c2) written as mu B / (sqrt(25 c2^2 + B) + 5 c2)
        A = 25.0 * c2 ** 2
        B = c2 * (1.0 - a) / (3.0 * math.pi ** 2)
        if A + B < 0:
            bound = -math.inf
        else:
            bound = mu * B / (math.sqrt(A + B) + 5.0 * c2)
        feasible = c3 < bound

        c1 = self.config.C1
        window = None
        if 4.0 * c1 * (1.0 - a) - 2.0 * c2 + 2.0 * lam * c3 < 0:
            lower = (2.0 * c2 + 2.0 * lam * c3 / 3.0) / c2
            upper = (2.0 * c2 - 2.0 * lam * c3 - 4.0 * c1 * (1.0 - a)) / (c2 + lam * c3 / 3.0)
            window = (lower, upper)
        report = FeasibilityReport(c2, c3, a, lam, mu, bound, feasible, window)
        logger.info("Feasibility: c2=%g c3=%g a=%g bound=%.6g -> %s", c2, c3, a, bound, report.status)
        return report

    def coercivity_audit(self, state: ContactState, alpha: float, c2: float, c3: float,
                         lam: float = 1.0, C5: float = 0.0) -> CoercivityAudit:
        """Both sides of the upper bound on F used for coercivity"""
        self._check_hypotheses(c2, c3)
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        if state.constant != 0.0:
            logger.debug("Dropping constant %.3g before the coercivity audit", state.constant)
            state = state.with_oscillation(state.oscillation, 0.0)

        c1 = self.config.C1
        a = self.config.QPRIME_TOTAL / (16.0 * math.pi ** 2)
        R = self.config.WEBSTER_R
        grid = state.grid
        lap_sq = grid.integrate(state.lap_w ** 2)
        grad_4 = grid.integrate(state.grad_sq ** 2)
        grad_2 = grid.integrate(state.grad_sq)

        coef_lap = 4.0 * c1 * (1.0 - a) + c2 * (alpha - 2.0) + c3 * (2.0 + alpha / 3.0) * lam
        coef_quartic = c2 * (1.0 / alpha - 0.5) + c3 * lam / (3.0 * alpha)
        C4 = c2 * R + 4.0 * c1 * (1.0 - a)
        linear = (2.0 * c1 * (1.0 - a) * self.config.QPRIME * grid.integrate(state.w)
                  + 2.0 * c2 * R * grid.integrate(state.lap_w)
                  - 2.0 * c3 * R * grid.integrate(state.reeb_w))
        rhs = coef_lap * lap_sq + coef_quartic * grad_4 + C4 * grad_2 + linear + C5
        lhs = self.functionals.F_value(state, c2, c3)

        young_lhs = 2.0 * grid.integrate(state.lap_w * state.grad_sq)
        young_rhs = alpha * lap_sq + grad_4 / alpha
        return CoercivityAudit(alpha, lhs, rhs, coef_lap, coef_quartic, C4, C5, young_lhs, young_rhs)

    # --- ascent ---------------------------------------------------------------

    @staticmethod
    def _lbfgs_direction(grad: np.ndarray, history: deque) -> np.ndarray:
        """Two-loop recursion; pairs (s, y) are curvature pairs of -F"""
        q = grad.copy()
        alphas = []
        for s, y, rho in reversed(history):
            alpha = rho * (s @ q)
            q -= alpha * y
            alphas.append(alpha)
        if history:
            s, y, _ = history[-1]
            q *= (s @ y) / (y @ y)
        for (s, y, rho), alpha in zip(history, reversed(alphas)):
            beta = rho * (y @ q)
            q += (alpha - beta) * s
        return q

    def maximize_F(self, init: ContactState, c2: float, c3: float, grad_tol: float = None,
                   max_iter: int = None, memory: int = None) -> AscentTrace:
        """Projected ascent in the nonconstant coefficients with Armijo backtracking.

        F does not see the constants coordinate; the unit-volume constraint is met by
        choosing the constant at the end.

        An init whose gradient is already below grad_tol is returned unmoved. Otherwise
        the ascent keeps going past grad_tol until F stops improving: the line search
        stalls, or ASCENT_STAGNATION_PATIENCE accepted steps in a row change F by no
        more than its roundoff. Along degree-1 directions F is flat to fourth order, so
        a gradient test alone stops far from the maximizer. `converged` reports
        |grad| < grad_tol at the final iterate.
        """
        self._check_hypotheses(c2, c3)
        grad_tol = self.config.ASCENT_GRAD_TOL if grad_tol is None else grad_tol
        max_iter = self.config.ASCENT_MAX_ITER if max_iter is None else max_iter
        memory = self.config.ASCENT_MEMORY if memory is None else memory
        policy = {
            "initial_step": self.config.ASCENT_INITIAL_STEP,
            "contraction": self.config.ASCENT_CONTRACTION,
            "slope_fraction": self.config.ASCENT_SLOPE_FRACTION,
            "max_iter": max_iter,
            "grad_tol": grad_tol,
            "stagnation_tol": self.config.ASCENT_STAGNATION_TOL,
            "stagnation_patience": self.config.ASCENT_STAGNATION_PATIENCE,
            "memory": memory,
        }

        def evaluate(x):
            state = init.with_oscillation(x, 0.0)
            with np.errstate(over="ignore", invalid="ignore"):
                value = self.functionals.F_value(state, c2, c3)
            # overflowing trial steps are rejected by the line search
            return state, value if np.isfinite(value) else -np.inf

        def gradient(state):
            return self.functionals.grad_F(state, c2, c3)[1:]

        x = init.oscillation.copy()
        state, value = evaluate(x)
        grad = gradient(state)
        grad_norm = float(np.linalg.norm(grad))
        trace = AscentTrace(policy=policy)
        trace.iterates.append(AscentIterate(0, x.copy(), value, grad_norm, 0.0))
        history = deque(maxlen=memory) if memory > 0 else deque(maxlen=1)

        iteration = 0
        stagnant = 0
        stop_reason = "gradient" if grad_norm < grad_tol else "max_iter"
        while stop_reason == "max_iter" and iteration < max_iter:
            if grad_norm == 0.0:
                stop_reason = "gradient"
                break
            direction = self._lbfgs_direction(grad, history) if memory > 0 else grad.copy()
            slope = float(grad @ direction)
            if slope <= 0:
                history.clear()
                direction = grad.copy()
                slope = float(grad @ grad)

            step = self.config.ASCENT_INITIAL_STEP
            accepted = False
            for _ in range(self.config.ASCENT_MAX_BACKTRACKS):
                candidate = x + step * direction
                new_state, new_value = evaluate(candidate)
                if new_value >= value + self.config.ASCENT_SLOPE_FRACTION * step * slope:
                    accepted = True
                    break
                step *= self.config.ASCENT_CONTRACTION
            if not accepted:
                stop_reason = "stalled"
                log = logger.info if grad_norm < grad_tol else logger.warning
                log("Line search stalled at iteration %d (|grad| = %.3e)", iteration, grad_norm)
                break

            new_grad = gradient(new_state)
            s = candidate - x
            y = grad - new_grad
            curvature = float(s @ y)
            if memory > 0 and curvature > 1e-16 * float(np.linalg.norm(s) * np.linalg.norm(y)) and curvature > 0:
                history.append((s, y, 1.0 / curvature))

            # roundoff of F grows with |F|; below it a passing Armijo test is noise
            floor = max(self.config.ASCENT_STAGNATION_TOL, 4.0 * np.finfo(float).eps * abs(new_value))
            stagnant = stagnant + 1 if abs(new_value - value) <= floor else 0

            iteration += 1
            x, state, value, grad = candidate, new_state, new_value, new_grad
            grad_norm = float(np.linalg.norm(grad))
            trace.iterates.append(AscentIterate(iteration, x.copy(), value, grad_norm, step))
            if iteration % self.config.ASCENT_LOG_EVERY == 0:
                logger.info("Ascent iteration %d: F=%.6e |grad|=%.3e", iteration, value, grad_norm)
            if stagnant >= self.config.ASCENT_STAGNATION_PATIENCE:
                stop_reason = "stagnant"

        trace.converged = grad_norm < grad_tol
        trace.stop_reason = stop_reason
        final = self.functionals.normalize_volume(state)
        trace.final_coeffs = final.coeffs
        logger.info("Ascent finished after %d iterations (%s, converged=%s, F=%.6e)",
                    iteration, stop_reason, trace.converged, value)
        return trace

    def el_residual(self, state: ContactState, c2: float, c3: float) -> float:
        """Norm of the gradient of F tangent to the volume constraint"""
        return float(np.linalg.norm(self.functionals.grad_F(state, c2, c3)[1:]))

    # --- variation identities ---------------------------------------------------

    def trace_variation_checks(self, state: ContactState, t: float, step: float = None,
                               kappa: float = None) -> VariationDefects:
        """Central differences in r of tau_r, A_r and Tr e^{-t A_r} for weight e^{2 r w}"""
        if t <= 0:
            raise ValueError(f"t must be positive, got {t}")
        step = self.config.VARIATION_STEP if step is None else step
        kappa = self.config.KAPPA if kappa is None else kappa
        B = state.tables.values
        weights = state.grid.weights
        w = state.w
        Lam = np.diag(self.conformal.spectrum_diagonal(state.basis, kappa))

        def projector(r):
            W = weights * np.exp(2.0 * r * w)
            gram = self.conformal.weighted_gram(state.with_coeffs(r * state.coeffs), "conformal")
            return linalg.solve(gram, B.conj().T * W[None, :], assume_a="her")

        P0 = projector(0.0)
        P_plus, P_minus = projector(step), projector(-step)

        def coefficient_operator(P, r):
            # A_r restricted to the basis: P_r M_{e^{-2rw}} B Lambda
            return P @ (np.exp(-2.0 * r * w)[:, None] * B) @ Lam

        M_plus, M_minus = coefficient_operator(P_plus, step), coefficient_operator(P_minus, -step)

        # operator norms in the weighted grid space via W^{1/2} B = Q R
        sqrt_w = np.sqrt(weights)
        _, R_factor = np.linalg.qr(sqrt_w[:, None] * B)
        R_inv = linalg.solve_triangular(R_factor, np.eye(R_factor.shape[0]))

        P_w_B = P0 @ (w[:, None] * B)
        tau_rhs = 2.0 * (P0 * w[None, :] - P_w_B @ P0)
        tau_fd = (P_plus - P_minus) / (2.0 * step)
        delta_tau = float(np.linalg.norm(R_factor @ (tau_fd - tau_rhs) / sqrt_w[None, :], 2))

        A_rhs = -2.0 * P_w_B @ Lam
        A_fd = (M_plus - M_minus) / (2.0 * step)
        delta_A = float(np.linalg.norm(R_factor @ (A_fd - A_rhs) @ R_inv, 2))

        trace_plus = np.trace(linalg.expm(-t * M_plus)).real
        trace_minus = np.trace(linalg.expm(-t * M_minus)).real
        heat_fd = (trace_plus - trace_minus) / (2.0 * step)
        heat_rhs = 2.0 * t * np.trace(P_w_B @ Lam @ linalg.expm(-t * Lam)).real
        heat = float(abs(heat_fd - heat_rhs))

        defects = VariationDefects(t, step, delta_tau, delta_A, heat)
        logger.debug("Variation defects: %s", defects)
        return defects
