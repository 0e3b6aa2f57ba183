# src/commands/spectrum.py
import numpy as np

from src.commands.command_result import CommandResult
from src.cr_determinant.models.polynomial import Monomial, coefficient, monomial_poly
from src.cr_determinant.models.run_config import RunConfig
from src.cr_determinant.models.spectral_sequence import SpectralSequence
from src.cr_determinant.services.conformal_service import ConformalService
from src.cr_determinant.services.model_service import ModelService


class SpectrumCommand:
    """Eigenvalue levels of A and the P' normalization table"""

    def __init__(self, run_config: RunConfig, conformal_service: ConformalService = None,
                 model_service: ModelService = None):
        self.run = run_config
        self.conformal = conformal_service or ConformalService()
        self.sphere = self.conformal.sphere
        self.models = model_service or ModelService()

    def execute(self, args=None) -> CommandResult:
        if self.run.uses_sphere:
            return self._sphere_spectrum()
        return self._model_spectrum()

    def _sphere_spectrum(self) -> CommandResult:
        N, kappa = self.run.degree, self.run.kappa
        basis = self.sphere.pluri_basis(N)
        computed = SpectralSequence.from_eigenvalues(self.conformal.matrix_A(basis, kappa).eigenvalues())
        expected = SpectralSequence.sphere(N, kappa)
        matches = (computed.n_levels == expected.n_levels
                   and np.allclose(computed.eigenvalues, expected.eigenvalues, rtol=1e-12)
                   and np.array_equal(computed.multiplicities, expected.multiplicities)
                   and computed.kernel_dim == 1)

        levels = [{"j": j, "lambda": float(lam), "multiplicity": int(m)}
                  for j, lam, m in zip(range(1, N + 1), expected.eigenvalues, expected.multiplicities)]
        lines = [f"j={row['j']} lambda={row['lambda']:g} m={row['multiplicity']}" for row in levels]
        lines.append(f"matrix_A levels: {'PASS' if matches else 'FAIL'} (kernel_dim={computed.kernel_dim})")

        normalization = []
        for j in range(1, N + 1):
            image = self.conformal.pprime_formula(monomial_poly(a=j))
            pprime = float(coefficient(image, Monomial(j, 0, 0, 0)).real)
            entry = kappa * j * (j + 1.0)
            normalization.append({"j": j, "pprime": pprime, "matrix_A": entry, "ratio": pprime / entry})
        ratio = normalization[0]["ratio"]
        lines.append(f"P' normalization: P'/A = {ratio:g} (4/kappa = {4.0 / kappa:g})")

        results = {
            "source": "sphere",
            "kernel_dim": computed.kernel_dim,
            "levels": levels,
            "matrix_levels_match": bool(matches),
            "pprime_normalization": normalization,
        }
        return CommandResult(results, lines, exit_code=0 if matches else 3)

    def _model_spectrum(self) -> CommandResult:
        model = self.models.load_synthetic(self.run.model)
        seq = self.models.spectrum(model)
        levels = [{"j": j, "lambda": float(lam), "multiplicity": int(m)}
                  for j, (lam, m) in enumerate(zip(seq.eigenvalues, seq.multiplicities), start=1)]
        lines = [f"j={row['j']} lambda={row['lambda']:.12g} m={row['multiplicity']}" for row in levels]
        lines.append(f"kernel_dim={seq.kernel_dim} a={model.a:g}")
        results = {
            "source": model.source,
            "kernel_dim": seq.kernel_dim,
            "levels": levels,
            "a": model.a,
            "volume": model.volume,
        }
        return CommandResult(results, lines)
