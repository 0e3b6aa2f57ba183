# src/commands/polyakov.py
import json
import math
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.commands.command_result import CommandResult
from src.cr_determinant.models.contact_state import ContactState
from src.cr_determinant.models.pluri_basis import PluriBasis
from src.cr_determinant.models.polynomial import Monomial, PolyFn, coefficient, is_real, make_poly, total_degree
from src.cr_determinant.models.run_config import RunConfig
from src.cr_determinant.services.functional_service import FunctionalService
from exceptions import ConfigException, NonPluriharmonicException, NonRealFunctionException
from config import Config

TERM_KEYS = ("z1", "z2", "z1bar", "z2bar")


def _as_complex(value) -> complex:
    if isinstance(value, dict):
        return complex(value.get("re", 0.0), value.get("im", 0.0))
    try:
        return complex(value)
    except (TypeError, ValueError):
        raise ConfigException(f"Cannot parse coefficient {value!r}")


def parse_coefficients(text: str) -> List[complex]:
    """Comma-separated numbers; complex literals such as 1+2j are accepted for diagnosis"""
    values = []
    for item in text.split(","):
        item = item.strip().replace(" ", "")
        if not item:
            continue
        try:
            values.append(complex(item))
        except ValueError:
            raise ConfigException(f"Cannot parse coefficient {item!r}")
    return values


class PolyakovCommand:
    """Functionals of the Polyakov formula for one conformal factor"""

    def __init__(self, run_config: RunConfig, functional_service: FunctionalService = None):
        self.config = Config()
        self.run = run_config
        self.functionals = functional_service or FunctionalService()
        self.conformal = self.functionals.conformal
        self.sphere = self.functionals.sphere

    # --- input -----------------------------------------------------------

    def real_frame(self, values, basis: PluriBasis) -> np.ndarray:
        values = np.asarray(values, dtype=complex)
        if values.shape != (basis.dim,):
            raise NonPluriharmonicException(
                f"Expected {basis.dim} real-frame coefficients for degree {basis.truncation}, got {values.size}"
            )
        if np.any(np.abs(values.imag) > self.config.REALITY_TOLERANCE * np.maximum(1.0, np.abs(values.real))):
            raise NonRealFunctionException("Real-frame coefficients must be real")
        return values.real.copy()

    def from_poly(self, poly: PolyFn, basis: PluriBasis) -> np.ndarray:
        if not is_real(poly, self.config.REALITY_TOLERANCE):
            raise NonRealFunctionException(f"{poly.as_expr()} is not real")
        if not self.sphere.is_pluriharmonic(poly):
            raise NonPluriharmonicException(f"{poly.as_expr()} mixes holomorphic and antiholomorphic factors")
        degree = total_degree(poly)
        if degree > basis.truncation:
            raise ConfigException(f"w has degree {degree}; raise --degree to at least that")
        complex_coeffs = np.array([coefficient(poly, e.monomial) for e in basis.entries])
        return basis.to_real(complex_coeffs)

    def read_w_file(self, path, basis: PluriBasis) -> np.ndarray:
        """JSON list of real-frame coefficients, or {"terms": [{z1, z2, z1bar, z2bar, re, im}]}"""
        path = Path(path)
        if not path.exists():
            raise ConfigException(f"w file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigException(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}")
        if isinstance(data, list):
            return self.real_frame([_as_complex(v) for v in data], basis)
        if isinstance(data, dict) and isinstance(data.get("terms"), list):
            terms = {}
            for term in data["terms"]:
                mono = Monomial(*(int(term.get(key, 0)) for key in TERM_KEYS))
                terms[mono] = terms.get(mono, 0j) + complex(term.get("re", 0.0), term.get("im", 0.0))
            return self.from_poly(make_poly(terms), basis)
        raise ConfigException(f"{path}: expected a list of coefficients or an object with 'terms'")

    def resolve_w(self, args, template: ContactState) -> np.ndarray:
        basis = template.basis
        if getattr(args, "w", None):
            return self.real_frame(parse_coefficients(args.w), basis)
        if getattr(args, "w_file", None):
            return self.read_w_file(args.w_file, basis)
        if getattr(args, "random", False):
            rng = np.random.default_rng(self.run.seed)
            return self.conformal.random_state(template, rng, 1.0).coeffs
        return np.zeros(basis.dim)

    # --- run ---------------------------------------------------------------

    def execute(self, args=None) -> CommandResult:
        if not self.run.uses_sphere:
            raise ConfigException("polyakov needs the sphere model")
        basis = self.sphere.pluri_basis(self.run.degree)
        grid = self.sphere.quadrature(self.run.n_eta, self.run.n_xi)
        template = self.conformal.build_state(basis, grid)

        coeffs = self.resolve_w(args, template)
        state = template.with_coeffs(coeffs)
        split: Optional[str] = getattr(args, "split", None)
        w1 = self.real_frame(parse_coefficients(split), basis) if split else 0.5 * coeffs

        report = self.functionals.functional_F(state, self.run.c2, self.run.c3)
        defects = self.functionals.cocycle_defect(template.with_coeffs(w1), template.with_coeffs(coeffs - w1))
        report.cocycle_A1, report.cocycle_A2 = defects["A1"], defects["A2"]

        lines = [f"{name} = {getattr(report, name):.15g}"
                 for name in ("A1", "A2", "A3", "II", "III", "IV", "F", "log_det_ratio")]
        lines.append(f"cocycle defects: A1={report.cocycle_A1:.3e} A2={report.cocycle_A2:.3e}")
        results = {
            "w": coeffs,
            "w_labels": basis.real_frame_labels(),
            "w1": w1,
            "report": report.to_dict(),
            "sup_norm": state.sup_norm,
        }
        if state.is_constant:
            expected = 80.0 * math.pi ** 2 * state.constant
            ok = abs(report.A1 - expected) <= 1e-9 * max(1.0, abs(expected))
            results["constant_A1_check"] = {"expected": expected, "pass": ok}
            lines.append(f"constant w: A1 = 80 pi^2 c {'PASS' if ok else 'FAIL'}")
        return CommandResult(results, lines)
