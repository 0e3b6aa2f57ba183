# cr_determinant/services/verification_service.py
import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from src.cr_determinant.ml.spectral_growth_predictor import SpectralGrowthPredictor
from src.cr_determinant.models.contact_state import ContactState
from src.cr_determinant.models.polynomial import Monomial, PolyFn, conjugate, make_poly, max_abs_coefficient
from src.cr_determinant.models.run_config import RunConfig
from src.cr_determinant.models.spectral_sequence import SpectralSequence
from src.cr_determinant.models.suite_result import SuiteResult
from src.cr_determinant.services.extremal_service import ExtremalService
from src.cr_determinant.services.model_service import ModelService
from src.cr_determinant.services.zeta_service import ZetaService
from exceptions import CRDeterminantException, ModelSchemaException
from config import Config

logger = logging.getLogger(__name__)

SUITE_ORDER = (
    "calibration", "projection", "qprime", "beckner_onofri", "scaling", "gradient",
    "cocycle", "optimizer", "variation", "zeta_index", "zeta_two_method",
    "det_scaling", "kappa_invariance", "feasibility", "schema",
)


class VerificationService:
    """Batch checks of the identities and inequalities the toolkit relies on"""

    def __init__(self, extremal_service: ExtremalService = None, zeta_service: ZetaService = None,
                 model_service: ModelService = None):
        self.config = Config()
        self.extremal = extremal_service or ExtremalService()
        self.functionals = self.extremal.functionals
        self.conformal = self.extremal.conformal
        self.sphere = self.extremal.sphere
        self.zeta = zeta_service or ZetaService()
        self.models = model_service or ModelService()
        self.predictor = SpectralGrowthPredictor()
        self._templates: Dict[tuple, ContactState] = {}

    # --- helpers -------------------------------------------------------------

    def _samples(self, name: str, run: RunConfig) -> int:
        return max(1, int(round(self.config.VERIFY_SAMPLES[name] * run.verify_scale)))

    @staticmethod
    def _rng(run: RunConfig, name: str) -> np.random.Generator:
        # independent stream per suite, so running a subset changes nothing
        return np.random.default_rng([run.seed, SUITE_ORDER.index(name)])

    def template(self, degree: int, n_eta: int, n_xi: int) -> ContactState:
        key = (degree, n_eta, n_xi)
        if key not in self._templates:
            basis = self.sphere.pluri_basis(degree)
            grid = self.sphere.quadrature(n_eta, n_xi)
            self._templates[key] = self.conformal.build_state(basis, grid)
        return self._templates[key]

    def _run_template(self, run: RunConfig) -> ContactState:
        return self.template(run.degree, run.n_eta, run.n_xi)

    @staticmethod
    def _random_real_poly(rng: np.random.Generator, max_degree: int, n_terms: int = 6) -> PolyFn:
        terms = {}
        for _ in range(n_terms):
            while True:
                exponents = rng.integers(0, max_degree + 1, size=4)
                if exponents.sum() <= max_degree:
                    break
            coef = complex(rng.standard_normal(), rng.standard_normal())
            mono = Monomial(*map(int, exponents))
            terms[mono] = terms.get(mono, 0j) + coef
        poly = make_poly(terms)
        return poly + conjugate(poly)

    # --- sphere_cr -------------------------------------------------------------

    def suite_calibration(self, run: RunConfig) -> SuiteResult:
        """Delta_b(u^2) - 2 u Delta_b u + 2 |grad_b u|^2 = 0 for random real u"""
        rng = self._rng(run, "calibration")
        n = self._samples("calibration", run)
        worst = 0.0
        for _ in range(n):
            u = self._random_real_poly(rng, 4)
            residual = (self.sphere.sublaplacian(u * u) - u * self.sphere.sublaplacian(u) * 2.0
                        + self.sphere.horizontal_grad_sq(u) * 2.0)
            worst = max(worst, max_abs_coefficient(residual) / max(1.0, max_abs_coefficient(u * u)))
        return SuiteResult("calibration", worst <= 1e-12, worst, 1e-12, n)

    # --- conformal -------------------------------------------------------------

    def suite_projection(self, run: RunConfig) -> SuiteResult:
        """Idempotence of the base and conformal projections"""
        rng = self._rng(run, "projection")
        n = self._samples("projection", run)
        template = self._run_template(run)
        state = self.conformal.random_state(template, rng, 0.5)
        worst = 0.0
        for k in range(n):
            weight = "conformal" if k % 2 else "base"
            values = rng.standard_normal(template.grid.size)
            once = self.conformal.project_pluri(values, state, weight)
            twice = self.conformal.project_pluri(state.tables.values @ once, state, weight)
            worst = max(worst, float(np.max(np.abs(twice - once)) / max(np.max(np.abs(once)), 1e-300)))
        return SuiteResult("projection", worst <= 1e-9, worst, 1e-9, n)

    def suite_qprime(self, run: RunConfig) -> SuiteResult:
        """Pairing of Q' against 1 is 16 pi^2 for every conformal state"""
        rng = self._rng(run, "qprime")
        n = self._samples("qprime", run)
        template = self._run_template(run)
        unit = np.zeros(template.basis.dim)
        unit[0] = 1.0
        worst = 0.0
        for _ in range(n):
            state = self.conformal.random_state(template, rng, 1.0)
            total = self.conformal.projected_Qprime_pairing(state, unit)
            worst = max(worst, abs(total - self.config.QPRIME_TOTAL) / self.config.QPRIME_TOTAL)
        return SuiteResult("qprime", worst <= 1e-9, worst, 1e-9, n)

    # --- functionals -----------------------------------------------------------

    def suite_beckner_onofri(self, run: RunConfig) -> SuiteResult:
        """II(w) >= 0 on the sphere"""
        rng = self._rng(run, "beckner_onofri")
        n = self._samples("beckner_onofri", run)
        template = self._run_template(run)
        lowest = math.inf
        for _ in range(n):
            state = self.conformal.random_state(template, rng, 1.0)
            lowest = min(lowest, self.functionals.functional_II(state))
        return SuiteResult("beckner_onofri", lowest >= -1e-9, max(-lowest, 0.0), 1e-9, n,
                           f"min II={lowest:.3e}")

    def suite_scaling(self, run: RunConfig) -> SuiteResult:
        """F(w + c) = F(w)"""
        rng = self._rng(run, "scaling")
        n = self._samples("scaling", run)
        template = self._run_template(run)
        worst = 0.0
        for _ in range(n):
            state = self.conformal.random_state(template, rng, 1.0)
            value = self.functionals.F_value(state, run.c2, run.c3)
            moved = self.functionals.F_value(state.shifted(rng.uniform(-2.0, 2.0)), run.c2, run.c3)
            worst = max(worst, abs(moved - value) / (1.0 + abs(value)))
        return SuiteResult("scaling", worst < 1e-9, worst, 1e-9, n)

    def suite_gradient(self, run: RunConfig) -> SuiteResult:
        """Analytic gradient of F against central differences"""
        rng = self._rng(run, "gradient")
        n = self._samples("gradient", run)
        template = self._run_template(run)
        h = self.config.GRADIENT_FD_STEP
        worst = 0.0
        for _ in range(n):
            state = self.conformal.random_state(template, rng, 0.5)
            grad = self.functionals.grad_F(state, run.c2, run.c3)
            fd = np.empty_like(grad)
            for k in range(grad.size):
                step = np.zeros_like(grad)
                step[k] = h
                plus = self.functionals.F_value(state.with_coeffs(state.coeffs + step), run.c2, run.c3)
                minus = self.functionals.F_value(state.with_coeffs(state.coeffs - step), run.c2, run.c3)
                fd[k] = (plus - minus) / (2.0 * h)
            floor = 1e-8 * (1.0 + float(np.max(np.abs(grad))))
            errors = np.abs(fd - grad) / np.maximum(np.abs(grad), floor)
            worst = max(worst, float(np.max(errors)))
        return SuiteResult("gradient", worst < 1e-5, worst, 1e-5, n)

    def suite_cocycle(self, run: RunConfig) -> SuiteResult:
        """A1 and A2 are cocycles under composition of conformal changes"""
        rng = self._rng(run, "cocycle")
        n = self._samples("cocycle", run)
        template = self._run_template(run)
        worst = {"A1": 0.0, "A2": 0.0}
        for _ in range(n):
            w1 = self.conformal.random_state(template, rng, 0.3)
            w2 = self.conformal.random_state(template, rng, 0.3)
            for part, defect in self.functionals.cocycle_defect(w1, w2).items():
                worst[part] = max(worst[part], defect)
        defect = max(worst.values())
        return SuiteResult("cocycle", defect < 1e-6, defect, 1e-6, n,
                           f"A1={worst['A1']:.3e} A2={worst['A2']:.3e}")

    # --- extremal --------------------------------------------------------------

    def suite_optimizer(self, run: RunConfig) -> SuiteResult:
        """Ascent from small inits returns to w = 0 with F = 0"""
        rng = self._rng(run, "optimizer")
        n = self._samples("optimizer", run)
        template = self._run_template(run)
        worst_norm = worst_value = worst_residual = 0.0
        unconverged = 0
        for _ in range(n):
            init = self.conformal.random_state(template, rng, self.config.ASCENT_INIT_SUP, with_constant=False)
            trace = self.extremal.maximize_F(init, run.c2, 0.0, run.grad_tol, run.max_iter, run.memory)
            unconverged += not trace.converged
            final = template.with_coeffs(trace.final_coeffs)
            worst_norm = max(worst_norm, float(np.linalg.norm(final.oscillation)))
            worst_value = max(worst_value, trace.final.value)
            worst_residual = max(worst_residual, self.extremal.el_residual(final, run.c2, 0.0))
        passed = (unconverged == 0 and worst_norm < 1e-4 and worst_value <= 1e-8
                  and worst_residual < self.config.ASCENT_EL_TOL)
        return SuiteResult("optimizer", passed, worst_norm, 1e-4, n,
                           f"max F={worst_value:.3e} EL residual={worst_residual:.3e} unconverged={unconverged}")

    def suite_variation(self, run: RunConfig) -> SuiteResult:
        """Variation identities for tau, A and the heat trace, with second-order convergence"""
        rng = self._rng(run, "variation")
        n = self._samples("variation", run)
        template = self.template(min(run.degree, 3), run.n_eta, run.n_xi)
        step = self.config.VARIATION_STEP
        worst = 0.0
        worst_order = math.inf
        times = (0.1, 1.0)
        for k in range(n):
            state = self.conformal.random_state(template, rng, 0.3)
            t = times[k % len(times)]
            fine = self.extremal.trace_variation_checks(state, t, step, run.kappa)
            coarse = self.extremal.trace_variation_checks(state, t, 10.0 * step, run.kappa)
            worst = max(worst, fine.worst)
            for name in ("delta_tau", "delta_A", "heat_trace"):
                defects = [getattr(fine, name), getattr(coarse, name)]
                if defects[1] > 1e-9:
                    order = self.predictor.convergence_order([step, 10.0 * step], defects)
                    worst_order = min(worst_order, order)
        passed = worst < 1e-6 and (worst_order == math.inf or worst_order > 1.5)
        detail = "order=n/a" if worst_order == math.inf else f"order={worst_order:.2f}"
        return SuiteResult("variation", passed, worst, 1e-6, n, detail)

    def suite_feasibility(self, run: RunConfig, model=None) -> SuiteResult:
        """Sphere (a = 1) is infeasible; the bundled a = 0 model is feasible for small c3"""
        failures = []
        for c3 in (0.0, 1e-3, 0.1, 1.0):
            report = self.extremal.condition_feasible(1.0, c3, 1.0)
            if report.feasible:
                failures.append(f"sphere c3={c3:g}")
        model = model or self.models.load_synthetic()
        lam = self.extremal.best_constant_lambda(model=model)
        report = self.extremal.condition_feasible(1.0, 1e-3, model.a, mu=1.0 / 3.0, lam=lam)
        if not report.feasible:
            failures.append(f"model a={model.a:g}")
        return SuiteResult("feasibility", not failures, float(len(failures)), 0.0, 5,
                           "; ".join(failures))

    # --- zeta ------------------------------------------------------------------

    def suite_zeta_index(self, run: RunConfig) -> SuiteResult:
        seq = SpectralSequence.sphere(1, run.kappa)
        value = self.zeta.zeta_zero(seq)
        index = self.zeta.conformal_index(self.config.QPRIME_TOTAL)
        defect = max(abs(value + 5.0 / 3.0), abs(index + 5.0 / 3.0))
        return SuiteResult("zeta_index", defect < 1e-10, defect, 1e-10, 1, f"zeta(0)={value:.12f}")

    def suite_zeta_two_method(self, run: RunConfig) -> SuiteResult:
        seq = SpectralSequence.sphere(1, run.kappa)
        worst = 0.0
        for s in (1.5, 2.0, 3.0):
            continued = self.zeta.zeta(seq, s).value
            direct = self.zeta.zeta_extrapolated(seq, s, self.config.DIRECT_TERMS).value
            worst = max(worst, abs(continued - direct) / abs(continued))
        return SuiteResult("zeta_two_method", worst < 1e-9, worst, 1e-9, 3)

    def suite_det_scaling(self, run: RunConfig) -> SuiteResult:
        seq = SpectralSequence.sphere(1, run.kappa)
        reference = self.zeta.scaling_invariant(seq, self.config.VOLUME)
        worst = 0.0
        for c in (0.5, 2.0, 10.0):
            _, _, defect = self.zeta.det_scaling_check(seq, c)
            # theta -> c^2 theta scales the spectrum by c^-4 and the volume by c^4
            invariant = self.zeta.scaling_invariant(seq.scaled(c ** -4.0), c ** 4 * self.config.VOLUME)
            worst = max(worst, defect, abs(invariant - reference) / reference)
        return SuiteResult("det_scaling", worst < 1e-8, worst, 1e-8, 3)

    def suite_kappa_invariance(self, run: RunConfig) -> SuiteResult:
        """Log-determinant ratios under scaling do not depend on kappa"""
        worst = 0.0
        c = 2.0
        expected = -4.0 * math.log(c) * self.zeta.zeta_zero(SpectralSequence.sphere(1))
        for kappa in (run.kappa, 1.0, 4.0, 2.5 * run.kappa):
            seq = SpectralSequence.sphere(1, kappa)
            ratio = -self.zeta.zeta_prime_zero(seq.scaled(c ** -4.0)) + self.zeta.zeta_prime_zero(seq)
            worst = max(worst, abs(ratio - expected))
        return SuiteResult("kappa_invariance", worst < 1e-9, worst, 1e-9, 4)

    # --- driver ----------------------------------------------------------------

    def run_all(self, run: RunConfig, only: Optional[List[str]] = None) -> List[SuiteResult]:
        """Run the suites in order; a failing suite never stops the others"""
        model = None
        results: List[SuiteResult] = []
        if not run.uses_sphere:
            try:
                model = self.models.load_synthetic(run.model)
                results.append(SuiteResult("schema", True, 0.0, 0.0, 1, model.source))
            except ModelSchemaException as e:
                results.append(SuiteResult("schema", False, float(len(e.diagnostics)), 0.0, 1,
                                           "; ".join(e.diagnostics)))
                return results

        suites: Dict[str, Callable[[], SuiteResult]] = {
            "calibration": lambda: self.suite_calibration(run),
            "projection": lambda: self.suite_projection(run),
            "qprime": lambda: self.suite_qprime(run),
            "beckner_onofri": lambda: self.suite_beckner_onofri(run),
            "scaling": lambda: self.suite_scaling(run),
            "gradient": lambda: self.suite_gradient(run),
            "cocycle": lambda: self.suite_cocycle(run),
            "optimizer": lambda: self.suite_optimizer(run),
            "variation": lambda: self.suite_variation(run),
            "zeta_index": lambda: self.suite_zeta_index(run),
            "zeta_two_method": lambda: self.suite_zeta_two_method(run),
            "det_scaling": lambda: self.suite_det_scaling(run),
            "kappa_invariance": lambda: self.suite_kappa_invariance(run),
            "feasibility": lambda: self.suite_feasibility(run, model),
        }
        for name, suite in suites.items():
            if only and name not in only:
                continue
            logger.info("Running suite %s", name)
            try:
                result = suite()
            except CRDeterminantException as e:
                result = SuiteResult(name, False, math.inf, 0.0, 0, f"error: {e}")
            logger.info(result.summary_line())
            results.append(result)
        return results
