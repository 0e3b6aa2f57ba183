from dataclasses import asdict, dataclass


@dataclass
class SuiteResult:
    name: str
    passed: bool
    defect: float
    tolerance: float
    samples: int = 1
    detail: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def summary_line(self) -> str:
        line = f"{self.name}: {self.status} (defect={self.defect:.3e}, tol={self.tolerance:.1e}, n={self.samples})"
        return f"{line} {self.detail}" if self.detail else line

    def to_dict(self) -> dict:
        data = asdict(self)
        data["status"] = self.status
        return data
