# src/commands/maximize.py
import logging

import numpy as np

from src.commands.command_result import CommandResult
from src.cr_determinant.models.run_config import RunConfig
from src.cr_determinant.services.extremal_service import ExtremalService
from src.cr_determinant.services.model_service import ModelService
from exceptions import NonConvergenceException
from config import Config

logger = logging.getLogger(__name__)

# refusal of an infeasible run without --force
REFUSED_EXIT_CODE = 2


class MaximizeCommand:
    """Feasibility report followed by the constrained ascent of F"""

    def __init__(self, run_config: RunConfig, extremal_service: ExtremalService = None,
                 model_service: ModelService = None):
        self.config = Config()
        self.run = run_config
        self.extremal = extremal_service or ExtremalService()
        self.conformal = self.extremal.conformal
        self.sphere = self.extremal.sphere
        self.models = model_service or ModelService()

    def _feasibility(self, basis):
        if self.run.uses_sphere:
            a = self.config.QPRIME_TOTAL / (16.0 * np.pi ** 2)
            lam = self.extremal.best_constant_lambda(basis)
        else:
            model = self.models.load_synthetic(self.run.model)
            a = model.a
            lam = self.extremal.best_constant_lambda(model=model)
        return self.extremal.condition_feasible(self.run.c2, self.run.c3, a, self.run.mu, lam)

    def execute(self, args=None) -> CommandResult:
        force = bool(getattr(args, "force", False))
        basis = self.sphere.pluri_basis(self.run.degree) if self.run.uses_sphere else None
        report = self._feasibility(basis)
        lines = [report.summary_line(),
                 f"lambda={report.lam:.12g} mu={report.mu:.12g} bound={report.bound:.6g} c3={report.c3:g}"]
        if report.alpha_window is not None:
            low, high = report.alpha_window
            lines.append(f"alpha window: ({low:.6g}, {high:.6g}) {'nonempty' if report.window_nonempty else 'empty'}")
        results = {"feasibility": report.to_dict()}

        if not report.feasible and not force:
            logger.warning("Condition infeasible; not running the ascent (use --force to override)")
            lines.append("refusing to maximize: condition infeasible (use --force)")
            return CommandResult(results, lines, exit_code=REFUSED_EXIT_CODE)

        if not self.run.uses_sphere:
            lines.append("ascent needs the sphere model; feasibility only")
            return CommandResult(results, lines)

        grid = self.sphere.quadrature(self.run.n_eta, self.run.n_xi)
        template = self.conformal.build_state(basis, grid)
        if getattr(args, "init", "zero") == "random":
            rng = np.random.default_rng(self.run.seed)
            init = self.conformal.random_state(template, rng, self.config.ASCENT_INIT_SUP, with_constant=False)
        else:
            init = template

        trace = self.extremal.maximize_F(init, self.run.c2, self.run.c3, self.run.grad_tol,
                                         self.run.max_iter, self.run.memory)
        if not trace.converged:
            raise NonConvergenceException(
                f"Ascent stopped ({trace.stop_reason}) after {trace.final.iteration} iterations "
                f"with |grad| = {trace.final.grad_norm:.3e}",
                trace,
            )

        final = template.with_coeffs(trace.final_coeffs)
        residual = self.extremal.el_residual(final, self.run.c2, self.run.c3)
        results["ascent"] = {
            "converged": trace.converged,
            "stop_reason": trace.stop_reason,
            "iterations": trace.final.iteration,
            "F": trace.final.value,
            "grad_norm": trace.final.grad_norm,
            "el_residual": residual,
            "monotone": trace.is_monotone,
            "w": trace.final_coeffs,
            "w_norm": float(np.linalg.norm(final.oscillation)),
            "policy": trace.policy,
        }
        lines.append(f"ascent: converged after {trace.final.iteration} iterations, "
                     f"F={trace.final.value:.6e}, |w|={results['ascent']['w_norm']:.3e}, EL residual={residual:.3e}")
        return CommandResult(results, lines, attachments={"trace": trace.rows()})
