import numpy as np
from sklearn.linear_model import LinearRegression

DEFAULT_GROWTH = (2.0, 1.0)


class SpectralGrowthPredictor:
    def __init__(self):
        self.eigenvalue_model = None
        self.multiplicity_model = None

    def train(self, eigenvalues, multiplicities, fraction: float = 0.5):
        """Fit log-log regressions of lambda_j and m_j against j over the upper levels"""
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        multiplicities = np.asarray(multiplicities, dtype=float)
        n = eigenvalues.size
        start = min(int(n * (1.0 - fraction)), max(n - 2, 0))
        j = np.arange(1, n + 1, dtype=float)[start:]
        X = np.log(j).reshape(-1, 1)
        self.eigenvalue_model = LinearRegression().fit(X, np.log(eigenvalues[start:]))
        self.multiplicity_model = LinearRegression().fit(X, np.log(multiplicities[start:]))
        return self

    def predict(self):
        """Growth exponents (p, r) with lambda_j ~ j^p and m_j ~ j^r"""
        if self.eigenvalue_model is None or self.multiplicity_model is None:
            return DEFAULT_GROWTH  # fallback default
        return (float(self.eigenvalue_model.coef_[0]), float(self.multiplicity_model.coef_[0]))

    @staticmethod
    def convergence_order(steps, defects) -> float:
        """Slope of log(defect) against log(step)"""
        steps = np.asarray(steps, dtype=float)
        defects = np.maximum(np.asarray(defects, dtype=float), np.finfo(float).tiny)
        model = LinearRegression().fit(np.log(steps).reshape(-1, 1), np.log(defects))
        return float(model.coef_[0])
