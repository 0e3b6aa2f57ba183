# cr_determinant/services/validation_service.py
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from src.cr_determinant.models.run_config import RunConfig
from exceptions import ConfigException
from config import Config

MODEL_FIELDS = ("dim", "weights", "R", "T", "Delta_b", "A", "Qprime_total")

# key -> (parser, RunConfig field)
CONFIG_KEYS = {
    "degree": (int, "degree"),
    "n_eta": (int, "n_eta"),
    "n_xi": (int, "n_xi"),
    "kappa": (float, "kappa"),
    "c2": (float, "c2"),
    "c3": (float, "c3"),
    "mu": (float, "mu"),
    "seed": (int, "seed"),
    "grad_tol": (float, "grad_tol"),
    "max_iter": (int, "max_iter"),
    "memory": (int, "memory"),
    "model": (str, "model"),
    "format": (str, "output_format"),
    "verify_scale": (float, "verify_scale"),
}


class ValidationService:
    """Service for validating run configurations and model documents"""

    def __init__(self):
        self.config = Config()

    # --- run configuration ------------------------------------------------

    def defaults(self) -> Dict:
        return {
            "degree": self.config.DEFAULT_DEGREE,
            "n_eta": self.config.GRID_N_ETA,
            "n_xi": self.config.GRID_N_XI,
            "kappa": self.config.KAPPA,
            "c2": self.config.DEFAULT_C2,
            "c3": self.config.DEFAULT_C3,
            "mu": None,
            "seed": self.config.DEFAULT_SEED,
            "grad_tol": self.config.ASCENT_GRAD_TOL,
            "max_iter": self.config.ASCENT_MAX_ITER,
            "memory": self.config.ASCENT_MEMORY,
            "model": "sphere",
            "output_format": "json",
            "verify_scale": 1.0,
        }

    def _parse_value(self, key: str, raw, origin: str):
        if key == "grid":
            return self.parse_grid(raw)
        if key not in CONFIG_KEYS:
            raise ConfigException(f"{origin}: unknown key '{key}'")
        parser, field_name = CONFIG_KEYS[key]
        if raw is None or isinstance(raw, parser):
            return {field_name: raw}
        try:
            return {field_name: parser(str(raw).strip())}
        except ValueError:
            raise ConfigException(f"{origin}: cannot parse {key} = {raw!r}")

    @staticmethod
    def parse_grid(raw) -> Dict:
        """'16x40' or '16,40' -> n_eta, n_xi"""
        text = str(raw).lower().replace("x", ",")
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) != 2:
            raise ConfigException(f"Grid must look like N_ETAxN_XI, got {raw!r}")
        try:
            return {"n_eta": int(parts[0]), "n_xi": int(parts[1])}
        except ValueError:
            raise ConfigException(f"Grid sizes must be integers, got {raw!r}")

    def read_config_file(self, path) -> Dict:
        """Line-based `key = value` text; '#' starts a comment"""
        path = Path(path)
        if not path.exists():
            raise ConfigException(f"Config file not found: {path}")
        values = {}
        with open(path, "r", encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigException(f"{path}:{number}: expected 'key = value'")
                key, raw = (part.strip() for part in line.split("=", 1))
                values.update(self._parse_value(key, raw, f"{path}:{number}"))
        return values

    def resolve_run_config(self, overrides: Optional[Dict] = None, config_file=None) -> RunConfig:
        """Defaults, then the config file, then command-line overrides"""
        values = self.defaults()
        if config_file:
            values.update(self.read_config_file(config_file))
        for key, raw in (overrides or {}).items():
            if raw is None:
                continue
            values.update(self._parse_value(key, raw, "command line"))

        issues = self.validate_run_config(values)
        if issues:
            raise ConfigException("; ".join(issues))
        return RunConfig(**values)

    def validate_run_config(self, values: Dict) -> List[str]:
        """Validate resolved values and return list of issues"""
        issues = []

        if values["degree"] < 1:
            issues.append("degree must be at least 1")
        elif values["degree"] > self.config.MAX_DEGREE:
            issues.append(f"degree must be at most {self.config.MAX_DEGREE}")

        for key in ("n_eta", "n_xi"):
            if values[key] < self.config.MIN_GRID_SIZE:
                issues.append(f"{key} must be at least {self.config.MIN_GRID_SIZE}")

        for key in ("kappa", "c2", "grad_tol", "verify_scale"):
            if not values[key] > 0:
                issues.append(f"{key} must be positive")

        if values["c3"] < 0:
            issues.append("c3 must be nonnegative")

        if values["mu"] is not None and not values["mu"] > 0:
            issues.append("mu must be positive")

        if values["max_iter"] < 1:
            issues.append("max_iter must be at least 1")

        if values["memory"] < 0:
            issues.append("memory cannot be negative")

        if values["output_format"] not in self.config.OUTPUT_FORMATS:
            issues.append(f"format must be one of {self.config.OUTPUT_FORMATS}")

        return issues

    # --- synthetic models ---------------------------------------------------

    def validate_synthetic_model(self, data, tol: float = 1e-9) -> List[str]:
        """Validate a synthetic-model document and return list of issues"""
        if not isinstance(data, dict):
            return ["Model document must be a JSON object"]

        issues = [f"Missing field '{name}'" for name in MODEL_FIELDS if name not in data]
        if issues:
            return issues

        dim = data["dim"]
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
            return ["dim must be an integer of at least 2"]

        arrays = {}
        expected = {"weights": (dim,), "R": (dim,), "T": (dim, dim), "Delta_b": (dim, dim), "A": (dim, dim)}
        for name, shape in expected.items():
            try:
                array = np.asarray(data[name], dtype=float)
            except (TypeError, ValueError):
                issues.append(f"{name} must contain only numbers")
                continue
            if array.shape != shape:
                issues.append(f"{name} has shape {array.shape}, expected {shape}")
            elif not np.all(np.isfinite(array)):
                issues.append(f"{name} contains non-finite entries")
            else:
                arrays[name] = array

        if not isinstance(data["Qprime_total"], (int, float)) or isinstance(data["Qprime_total"], bool):
            issues.append("Qprime_total must be a number")

        if issues:
            return issues

        weights = arrays["weights"]
        if np.any(weights <= 0):
            issues.append("weights must be positive")
            return issues

        W = np.diag(weights)
        ones = np.ones(dim)
        for name in ("Delta_b", "A"):
            matrix = arrays[name]
            scale = max(1.0, float(np.max(np.abs(matrix))))
            form = W @ matrix
            if not np.allclose(form, form.T, atol=tol * scale):
                issues.append(f"W {name} must be symmetric")
                continue
            # generalized spectrum of the W-self-adjoint operator
            root = np.sqrt(weights)
            spectrum = np.linalg.eigvalsh((root[:, None] * matrix) / root[None, :])
            if spectrum[0] < -tol * scale:
                issues.append(f"{name} has a negative eigenvalue {spectrum[0]:.3e}")
            if np.max(np.abs(matrix @ ones)) > tol * scale:
                issues.append(f"constants must lie in the kernel of {name}")

        return issues
