from dataclasses import asdict, dataclass
from typing import Optional


@dataclass
class FunctionalReport:
    A1: float
    A2: float
    A3: float
    II: float
    III: float
    IV: float
    F: float
    c1: float
    c2: float
    c3: float
    a: float
    log_det_ratio: float
    log_volume_average: float
    volume_mode: str = "free"
    cocycle_A1: Optional[float] = None
    cocycle_A2: Optional[float] = None

    @property
    def decomposition_defect(self) -> float:
        return abs(self.F - (self.c1 * self.II + self.c2 * self.III + self.c3 * self.IV))

    def to_dict(self) -> dict:
        return asdict(self)
