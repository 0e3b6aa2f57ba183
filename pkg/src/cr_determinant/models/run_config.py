from dataclasses import asdict, dataclass
from typing import Optional


@dataclass(frozen=True)
class RunConfig:
    degree: int
    n_eta: int
    n_xi: int
    kappa: float
    c2: float
    c3: float
    mu: Optional[float]
    seed: int
    grad_tol: float
    max_iter: int
    memory: int
    model: str = "sphere"
    output_format: str = "json"
    verify_scale: float = 1.0

    @property
    def uses_sphere(self) -> bool:
        return self.model == "sphere"

    def to_dict(self) -> dict:
        return asdict(self)
