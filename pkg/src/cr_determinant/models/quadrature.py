from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class GridQuadrature:
    """Tensor grid in Hopf coordinates z1 = cos(eta) e^(i xi1), z2 = sin(eta) e^(i xi2)"""
    eta: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    n_eta: int
    n_xi: int

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def nodes(self) -> np.ndarray:
        return np.column_stack([self.eta, self.xi1, self.xi2])

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    @cached_property
    def cos_eta(self) -> np.ndarray:
        return np.cos(self.eta)

    @cached_property
    def sin_eta(self) -> np.ndarray:
        return np.sin(self.eta)

    @cached_property
    def z1(self) -> np.ndarray:
        return self.cos_eta * np.exp(1j * self.xi1)

    @cached_property
    def z2(self) -> np.ndarray:
        return self.sin_eta * np.exp(1j * self.xi2)

    def integrate(self, values) -> complex:
        values = np.asarray(values)
        total = np.dot(self.weights, values)
        return float(total) if not np.iscomplexobj(total) else complex(total)
