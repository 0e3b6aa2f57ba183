from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class SpectralSequence:
    """Positive eigenvalue levels with multiplicities; zero modes counted in kernel_dim.

    A sphere sequence (kappa * j(j+1), 2(j+1)) is generated on demand to any depth;
    a general sequence is finite.
    """
    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    kernel_dim: int = 1
    family: str = "general"
    kappa: float = 1.0
    growth: Optional[Tuple[float, float]] = None  # (p, r): lambda_j ~ j^p, m_j ~ j^r
    label: str = ""

    def __post_init__(self):
        eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        multiplicities = np.asarray(self.multiplicities, dtype=float)
        if eigenvalues.shape != multiplicities.shape:
            raise ValueError("Eigenvalues and multiplicities must have the same length")
        if eigenvalues.size and np.min(eigenvalues) <= 0:
            raise ValueError("Spectral levels must be strictly positive")
        if eigenvalues.size and np.min(multiplicities) < 1:
            raise ValueError("Multiplicities must be at least 1")
        if np.any(np.diff(eigenvalues) < 0):
            raise ValueError("Spectral levels must be ascending")
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "multiplicities", multiplicities)

    @classmethod
    def sphere(cls, n_levels: int, kappa: float = 1.0) -> "SpectralSequence":
        j = np.arange(1, n_levels + 1, dtype=float)
        return cls(kappa * j * (j + 1.0), 2.0 * (j + 1.0), kernel_dim=1,
                   family="sphere", kappa=kappa, growth=(2.0, 1.0), label="sphere")

    @classmethod
    def from_eigenvalues(cls, values, tol: float = 1e-9, label: str = "") -> "SpectralSequence":
        """Group a raw eigenvalue list into levels; values within tol of 0 form the kernel"""
        values = np.sort(np.asarray(values, dtype=float))
        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        kernel = int(np.sum(np.abs(values) <= tol * scale))
        positive = values[values > tol * scale]
        levels, counts = [], []
        for value in positive:
            if levels and abs(value - levels[-1]) <= tol * scale:
                counts[-1] += 1
            else:
                levels.append(value)
                counts.append(1)
        return cls(np.array(levels), np.array(counts, dtype=float), kernel_dim=kernel, label=label)

    @property
    def is_sphere(self) -> bool:
        return self.family == "sphere"

    @property
    def n_levels(self) -> int:
        return self.eigenvalues.size

    def levels(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """First n levels; sphere sequences are extended as needed"""
        if self.is_sphere and n > self.n_levels:
            extended = SpectralSequence.sphere(n, self.kappa)
            return extended.eigenvalues, extended.multiplicities
        return self.eigenvalues[:n], self.multiplicities[:n]

    def scaled(self, factor: float) -> "SpectralSequence":
        return SpectralSequence(self.eigenvalues * factor, self.multiplicities, self.kernel_dim,
                                self.family, self.kappa * factor, self.growth, self.label)


@dataclass(frozen=True)
class ZetaResult:
    value: float
    method: str
    s: float
    orders: Tuple[int, int] = (0, 0)
    error_estimate: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "value": self.value,
            "method": self.method,
            "orders": list(self.orders),
            "error_estimate": self.error_estimate,
        }
