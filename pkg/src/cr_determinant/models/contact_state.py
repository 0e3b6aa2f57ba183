from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.cr_determinant.models.basis_tables import BasisTables
from src.cr_determinant.models.pluri_basis import PluriBasis
from src.cr_determinant.models.quadrature import GridQuadrature


@dataclass(frozen=True, eq=False)
class ContactState:
    """The contact form e^w theta for a real pluriharmonic w.

    `oscillation` holds the real-frame coefficients of w without the constants entry;
    the constant is kept separately so scalings never touch the grid caches that
    depend only on derivatives of w.
    """
    basis: PluriBasis
    grid: GridQuadrature
    tables: BasisTables
    oscillation: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        oscillation = np.asarray(self.oscillation, dtype=float)
        if oscillation.shape != (self.basis.dim - 1,):
            raise ValueError(
                f"Expected {self.basis.dim - 1} nonconstant coefficients, got {oscillation.shape}"
            )
        object.__setattr__(self, "oscillation", oscillation)
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def from_coeffs(cls, basis, grid, tables, coeffs) -> "ContactState":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(basis, grid, tables, coeffs[1:].copy(), float(coeffs[0]))

    @property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([[self.constant], self.oscillation])

    @property
    def complex_coeffs(self) -> np.ndarray:
        return self.tables.real_to_complex @ self.coeffs

    def with_coeffs(self, coeffs) -> "ContactState":
        return ContactState.from_coeffs(self.basis, self.grid, self.tables, coeffs)

    def with_oscillation(self, oscillation, constant: float = None) -> "ContactState":
        constant = self.constant if constant is None else constant
        return ContactState(self.basis, self.grid, self.tables, oscillation, constant)

    def shifted(self, c: float) -> "ContactState":
        return self.with_oscillation(self.oscillation, self.constant + c)

    # --- grid caches ---------------------------------------------------

    @cached_property
    def oscillation_values(self) -> np.ndarray:
        return self.tables.real_values[:, 1:] @ self.oscillation

    @cached_property
    def w(self) -> np.ndarray:
        return self.oscillation_values + self.constant

    @cached_property
    def z1w(self) -> np.ndarray:
        return self.tables.real_z1[:, 1:] @ self.oscillation

    @cached_property
    def lap_w(self) -> np.ndarray:
        return self.tables.real_sublaplacian[:, 1:] @ self.oscillation

    @cached_property
    def reeb_w(self) -> np.ndarray:
        return self.tables.real_reeb[:, 1:] @ self.oscillation

    @cached_property
    def grad_sq(self) -> np.ndarray:
        return 2.0 * np.abs(self.z1w) ** 2

    @cached_property
    def exp_2w(self) -> np.ndarray:
        return np.exp(2.0 * self.w)

    @cached_property
    def expm1_2w(self) -> np.ndarray:
        return np.expm1(2.0 * self.w)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.w)))

    @property
    def is_constant(self) -> bool:
        return not np.any(self.oscillation)
