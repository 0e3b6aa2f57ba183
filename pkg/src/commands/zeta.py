# src/commands/zeta.py
import math
from typing import List

from src.commands.command_result import CommandResult
from src.cr_determinant.models.run_config import RunConfig
from src.cr_determinant.models.spectral_sequence import SpectralSequence
from src.cr_determinant.services.model_service import ModelService
from src.cr_determinant.services.zeta_service import ZetaService
from config import Config

AGREEMENT_TOL = 1e-9
INDEX_TOL = 1e-10
SCALING_TOL = 1e-8


class ZetaCommand:
    """Zeta values, zeta(0), zeta'(0), the determinant and its scaling law"""

    def __init__(self, run_config: RunConfig, zeta_service: ZetaService = None,
                 model_service: ModelService = None):
        self.config = Config()
        self.run = run_config
        self.zeta = zeta_service or ZetaService()
        self.models = model_service or ModelService()

    def _sequence(self):
        if self.run.uses_sphere:
            return SpectralSequence.sphere(1, self.run.kappa), self.config.QPRIME_TOTAL
        model = self.models.load_synthetic(self.run.model)
        return self.models.spectrum(model), model.qprime_total

    def _values_at(self, seq: SpectralSequence, s: float, lines: List[str]) -> dict:
        primary = self.zeta.zeta(seq, s)
        row = {"s": s, primary.method: primary.to_dict()}
        line = f"zeta({s:g}) = {primary.value:.15g} [{primary.method}]"
        if seq.is_sphere and s > 1.0:
            direct = self.zeta.zeta_extrapolated(seq, s, self.config.DIRECT_TERMS)
            mellin = self.zeta.zeta_mellin(seq, s)
            agreement = abs(direct.value - primary.value) / abs(primary.value)
            row["extrapolated"] = direct.to_dict()
            row["mellin"] = mellin.to_dict()
            row["agreement"] = agreement
            row["agreement_pass"] = agreement < AGREEMENT_TOL
            line += (f", {direct.value:.15g} [extrapolated], {mellin.value:.12g} [mellin]"
                     f" agreement: {'PASS' if row['agreement_pass'] else 'FAIL'} ({agreement:.2e})")
        lines.append(line)
        return row

    def execute(self, args=None) -> CommandResult:
        s_values = getattr(args, "s", None) or [0.0, 2.0]
        scale = getattr(args, "scale", None)
        seq, total_qprime = self._sequence()
        lines: List[str] = []
        checks = []

        rows = [self._values_at(seq, s, lines) for s in s_values]
        checks.extend(row["agreement_pass"] for row in rows if "agreement_pass" in row)

        zeta_zero = self.zeta.zeta_zero(seq)
        zeta_prime = self.zeta.zeta_prime_zero(seq)
        det = math.exp(-zeta_prime)
        results = {
            "values": rows,
            "zeta_zero": zeta_zero,
            "zeta_prime_zero": zeta_prime,
            "det": det,
            "burns_epstein": self.zeta.burns_epstein(total_qprime),
        }
        lines.append(f"zeta(0) = {zeta_zero:.15g}")
        lines.append(f"zeta'(0) = {zeta_prime:.15g}")
        lines.append(f"det = {det:.15g}")

        if seq.is_sphere:
            index = self.zeta.conformal_index(total_qprime)
            index_pass = abs(index - zeta_zero) < INDEX_TOL
            checks.append(index_pass)
            results["conformal_index"] = index
            results["index_check"] = index_pass
            lines.append(f"index check: {'PASS' if index_pass else 'FAIL'} "
                         f"(zeta(0) = {zeta_zero:.12f}, -int Q'/24pi^2 - 1 = {index:.12f})")

        if scale is not None:
            lhs, rhs, defect = self.zeta.det_scaling_check(seq, scale)
            scaled_pass = defect < SCALING_TOL
            checks.append(scaled_pass)
            results["det_scaling"] = {"c": scale, "lhs": lhs, "rhs": rhs, "defect": defect,
                                      "pass": scaled_pass}
            lines.append(f"det scaling (c={scale:g}): {'PASS' if scaled_pass else 'FAIL'} (defect={defect:.2e})")

        return CommandResult(results, lines, exit_code=0 if all(checks) else 3)
