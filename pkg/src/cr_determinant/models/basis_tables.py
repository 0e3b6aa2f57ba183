from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True, eq=False)
class BasisTables:
    """Grid traces of every basis entry and of Z1, Delta_b and T applied to it.

    Columns follow the complex PluriBasis order; the real_* views follow the real frame.
    """
    values: np.ndarray
    z1: np.ndarray
    sublaplacian: np.ndarray
    reeb: np.ndarray
    real_to_complex: np.ndarray

    @cached_property
    def real_values(self) -> np.ndarray:
        return (self.values @ self.real_to_complex).real

    @cached_property
    def real_z1(self) -> np.ndarray:
        return self.z1 @ self.real_to_complex

    @cached_property
    def real_sublaplacian(self) -> np.ndarray:
        return (self.sublaplacian @ self.real_to_complex).real

    @cached_property
    def real_reeb(self) -> np.ndarray:
        return (self.reeb @ self.real_to_complex).real
