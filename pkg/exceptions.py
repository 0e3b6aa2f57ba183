# cr_determinant/exceptions.py

class CRDeterminantException(Exception):
    """Base exception for the determinant toolkit"""
    pass


class DegreeCapExceededException(CRDeterminantException):
    """Raised when a polynomial exceeds the configured degree cap"""
    def __init__(self, degree: int, cap: int):
        self.degree = degree
        self.cap = cap
        super().__init__(f"Polynomial degree {degree} exceeds the cap {cap}")


class NonRealFunctionException(CRDeterminantException):
    """Raised when a real-valued function is required"""
    pass


class NonPluriharmonicException(CRDeterminantException):
    """Raised when a function is outside the pluriharmonic space"""
    pass


class ProjectionConditioningException(CRDeterminantException):
    """Raised when a weighted Gram matrix is too ill-conditioned to invert"""
    def __init__(self, condition_number: float, limit: float):
        self.condition_number = condition_number
        self.limit = limit
        super().__init__(
            f"Weighted Gram condition number {condition_number:.3e} exceeds {limit:.1e}"
        )


class ZetaPoleException(CRDeterminantException):
    """Raised when a zeta function is evaluated at a pole or in a divergent regime"""
    def __init__(self, s: float, reason: str):
        self.s = s
        self.reason = reason
        super().__init__(f"Zeta evaluation at s={s!r} failed: {reason}")


class InsufficientOrderException(CRDeterminantException):
    """Raised when an expansion order is below its minimum"""
    def __init__(self, order: int, minimum: int):
        self.order = order
        self.minimum = minimum
        super().__init__(f"Expansion order {order} is below the minimum {minimum}")


class HypothesisViolationException(CRDeterminantException):
    """Raised when the constants violate c2 > 0, c3 >= 0"""
    pass


class UnsupportedCocyclePartException(CRDeterminantException):
    """Raised when a check needs the conformal law of the characteristic field"""
    pass


class SingularLaplacianException(CRDeterminantException):
    """Raised when the sub-Laplacian block is singular off the constants"""
    pass


class ModelSchemaException(CRDeterminantException):
    """Raised when a synthetic model document is malformed"""
    def __init__(self, source: str, diagnostics):
        self.source = source
        self.diagnostics = list(diagnostics)
        super().__init__(f"Invalid model '{source}': " + "; ".join(self.diagnostics))


class ConfigException(CRDeterminantException):
    """Raised when a run configuration is invalid"""
    pass


class NonConvergenceException(CRDeterminantException):
    """Raised when the ascent hits its iteration cap"""
    def __init__(self, message: str, trace=None):
        self.trace = trace
        super().__init__(message)
