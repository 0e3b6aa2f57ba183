from dataclasses import asdict, dataclass


@dataclass
class VariationDefects:
    t: float
    step: float
    delta_tau: float
    delta_A: float
    heat_trace: float

    @property
    def worst(self) -> float:
        return max(self.delta_tau, self.delta_A, self.heat_trace)

    def to_dict(self) -> dict:
        return asdict(self)
