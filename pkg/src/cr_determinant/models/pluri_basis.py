from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from src.cr_determinant.models.polynomial import Monomial, PolyFn, make_poly


class BasisKind(str, Enum):
    CONSTANT = "constant"
    HOLOMORPHIC = "holomorphic"
    ANTIHOLOMORPHIC = "antiholomorphic"


@dataclass(frozen=True)
class BasisEntry:
    poly: PolyFn
    degree: int
    kind: BasisKind
    monomial: Monomial


@dataclass(frozen=True, eq=False)
class PluriBasis:
    """Truncated pluriharmonic basis: constants, z^alpha and conj(z)^alpha up to degree N.

    Entries are ordered [1, then per degree j: holomorphic z1^(j-k) z2^k for k = 0..j,
    followed by their conjugates in the same order]. Real coefficient vectors use the
    frame [1, Re z^alpha, Im z^alpha, ...] with the alphas in degree order.
    """
    entries: Tuple[BasisEntry, ...]
    norms: np.ndarray
    truncation: int

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([e.degree for e in self.entries], dtype=float)

    @property
    def holomorphic_indices(self) -> List[int]:
        return [i for i, e in enumerate(self.entries) if e.kind == BasisKind.HOLOMORPHIC]

    @property
    def conjugate_indices(self) -> List[int]:
        """Index of conj(z^alpha) for each holomorphic index, in the same order"""
        lookup = {e.monomial: i for i, e in enumerate(self.entries)}
        return [lookup[self.entries[i].monomial.conjugate()] for i in self.holomorphic_indices]

    def real_to_complex_matrix(self) -> np.ndarray:
        """Matrix C with complex coefficients c = C @ x for a real-frame vector x"""
        matrix = np.zeros((self.dim, self.dim), dtype=complex)
        matrix[0, 0] = 1.0
        for slot, (hol, anti) in enumerate(zip(self.holomorphic_indices, self.conjugate_indices)):
            re_col, im_col = 1 + 2 * slot, 2 + 2 * slot
            matrix[hol, re_col] = 0.5
            matrix[anti, re_col] = 0.5
            matrix[hol, im_col] = -0.5j
            matrix[anti, im_col] = 0.5j
        return matrix

    def to_complex(self, real_coeffs: np.ndarray) -> np.ndarray:
        return self.real_to_complex_matrix() @ np.asarray(real_coeffs, dtype=float)

    def to_real(self, complex_coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(complex_coeffs, dtype=complex)
        real = np.zeros(self.dim)
        real[0] = coeffs[0].real
        for slot, hol in enumerate(self.holomorphic_indices):
            real[1 + 2 * slot] = 2.0 * coeffs[hol].real
            real[2 + 2 * slot] = -2.0 * coeffs[hol].imag
        return real

    def real_frame_labels(self) -> List[str]:
        labels = ["1"]
        for hol in self.holomorphic_indices:
            mono = self.entries[hol].monomial
            labels.extend([f"Re({mono})", f"Im({mono})"])
        return labels

    def as_poly(self, real_coeffs: np.ndarray) -> PolyFn:
        coeffs = self.to_complex(real_coeffs)
        return make_poly({entry.monomial: complex(coef) for coef, entry in zip(coeffs, self.entries)})
