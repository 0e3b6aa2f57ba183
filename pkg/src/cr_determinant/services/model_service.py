# cr_determinant/services/model_service.py
import json
import logging
from pathlib import Path

import numpy as np
from scipy import linalg

from src.cr_determinant.models.spectral_sequence import SpectralSequence
from src.cr_determinant.models.synthetic_model import SyntheticModel
from src.cr_determinant.services.validation_service import ValidationService
from exceptions import ModelSchemaException
from config import Config

logger = logging.getLogger(__name__)


class ModelService:
    """Loading of synthetic models and their operator spectra"""

    def __init__(self):
        self.config = Config()
        self.validation_service = ValidationService()

    def load_synthetic(self, path=None) -> SyntheticModel:
        """Load and validate a synthetic model document"""
        path = Path(path) if path else self.config.SYNTHETIC_MODEL_FILE
        if not path.exists():
            raise ModelSchemaException(str(path), ["file not found"])

        with open(path, "r", encoding="utf-8") as f:
            content = f.read()
        if not content.strip():
            raise ModelSchemaException(str(path), ["file is empty"])

        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise ModelSchemaException(str(path), [f"line {e.lineno}, column {e.colno}: {e.msg}"])

        issues = self.validation_service.validate_synthetic_model(data)
        if issues:
            raise ModelSchemaException(str(path), issues)

        model = SyntheticModel(
            dim=data["dim"],
            weights=np.asarray(data["weights"], dtype=float),
            R=np.asarray(data["R"], dtype=float),
            T=np.asarray(data["T"], dtype=float),
            laplacian=np.asarray(data["Delta_b"], dtype=float),
            A=np.asarray(data["A"], dtype=float),
            qprime_total=float(data["Qprime_total"]),
            source=str(path),
        )
        logger.info("Loaded synthetic model %s (dim=%d, a=%g)", path, model.dim, model.a)
        return model

    def eigenvalues(self, model: SyntheticModel) -> np.ndarray:
        """Spectrum of A, self-adjoint for the node weights"""
        W = np.diag(model.weights)
        form = W @ model.A
        return linalg.eigh(0.5 * (form + form.T), W, eigvals_only=True)

    def spectrum(self, model: SyntheticModel) -> SpectralSequence:
        return SpectralSequence.from_eigenvalues(self.eigenvalues(model), label=Path(model.source).stem)
