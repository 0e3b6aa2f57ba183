from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SyntheticModel:
    """Discrete stand-in for a pseudo-Einstein manifold, acting on node values"""
    dim: int
    weights: np.ndarray
    R: np.ndarray
    T: np.ndarray
    laplacian: np.ndarray
    A: np.ndarray
    qprime_total: float
    source: str = ""

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    @property
    def a(self) -> float:
        return self.qprime_total / (16.0 * np.pi ** 2)
