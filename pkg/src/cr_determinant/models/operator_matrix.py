from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import linalg


class InnerProduct(str, Enum):
    BASE = "base"
    CONFORMAL = "conformal"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Matrix of an operator on the pluriharmonic basis.

    entries = gram^-1 form, with `form` Hermitian positive semidefinite and `gram`
    the Gram matrix of the inner product the operator is symmetric for.
    """
    entries: np.ndarray
    inner_product: InnerProduct
    kappa: float
    form: Optional[np.ndarray] = None
    gram: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        if self.form is None or self.gram is None:
            return np.sort(np.linalg.eigvals(self.entries).real)
        return linalg.eigh(self.form, self.gram, eigvals_only=True)
