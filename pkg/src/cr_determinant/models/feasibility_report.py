from dataclasses import asdict, dataclass
from typing import Optional, Tuple


@dataclass
class FeasibilityReport:
    c2: float
    c3: float
    a: float
    lam: float
    mu: float
    bound: float
    feasible: bool
    alpha_window: Optional[Tuple[float, float]] = None

    @property
    def window_nonempty(self) -> bool:
        return self.alpha_window is not None and self.alpha_window[0] < self.alpha_window[1]

    @property
    def status(self) -> str:
        return "FEASIBLE" if self.feasible else "INFEASIBLE"

    def summary_line(self) -> str:
        return f"condition (cond): {self.status} (a={self.a:g})"

    def to_dict(self) -> dict:
        data = asdict(self)
        data["alpha_window"] = list(self.alpha_window) if self.alpha_window else None
        data["window_nonempty"] = self.window_nonempty
        return data


@dataclass
class CoercivityAudit:
    alpha: float
    lhs: float
    rhs: float
    coef_laplacian: float
    coef_quartic: float
    C4: float
    C5: float
    young_lhs: float
    young_rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def young_slack(self) -> float:
        return self.young_rhs - self.young_lhs

    def to_dict(self) -> dict:
        data = asdict(self)
        data["slack"] = self.slack
        data["young_slack"] = self.young_slack
        return data
