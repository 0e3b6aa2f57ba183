from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np


@dataclass
class AscentIterate:
    iteration: int
    coeffs: np.ndarray
    value: float
    grad_norm: float
    step: float


@dataclass
class AscentTrace:
    iterates: List[AscentIterate] = field(default_factory=list)
    policy: Dict[str, float] = field(default_factory=dict)
    converged: bool = False
    stop_reason: str = ""
    final_coeffs: np.ndarray = None

    @property
    def final(self) -> AscentIterate:
        return self.iterates[-1]

    @property
    def values(self) -> np.ndarray:
        return np.array([it.value for it in self.iterates])

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))

    def rows(self) -> List[Dict]:
        return [
            {"iteration": it.iteration, "F": it.value, "grad_norm": it.grad_norm,
             "step": it.step, "sup_coeff": float(np.max(np.abs(it.coeffs), initial=0.0))}
            for it in self.iterates
        ]
