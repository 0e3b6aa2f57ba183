from dataclasses import dataclass
from typing import Dict, Iterator, Tuple, Union

import sympy

from config import Config
from exceptions import DegreeCapExceededException

# Generators z1, z2, conj(z1), conj(z2); polynomials are restricted to the sphere
Z1, Z2, Z1_BAR, Z2_BAR = GENERATORS = sympy.symbols("z1 z2 zb1 zb2")

PolyFn = sympy.Poly
Scalar = Union[int, float, complex, sympy.Expr]


@dataclass(frozen=True, order=True)
class Monomial:
    """Exponents of z1^a z2^b conj(z1)^c conj(z2)^d"""
    a: int = 0
    b: int = 0
    c: int = 0
    d: int = 0

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError(f"Monomial exponents must be nonnegative, got {self.exponents}")

    @property
    def exponents(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def degree(self) -> int:
        return self.a + self.b + self.c + self.d

    @property
    def holomorphic_degree(self) -> int:
        return self.a + self.b

    @property
    def antiholomorphic_degree(self) -> int:
        return self.c + self.d

    def conjugate(self) -> "Monomial":
        return Monomial(self.c, self.d, self.a, self.b)

    def times(self, other: "Monomial") -> "Monomial":
        return Monomial(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __str__(self):
        parts = []
        for name, power in zip(("z1", "z2", "z1b", "z2b"), self.exponents):
            if power == 1:
                parts.append(name)
            elif power > 1:
                parts.append(f"{name}^{power}")
        return "*".join(parts) if parts else "1"


# --- construction -------------------------------------------------------

def make_poly(terms: Dict[Monomial, Scalar]) -> PolyFn:
    rep = {m.exponents: sympy.sympify(c) for m, c in terms.items() if c != 0}
    if not rep:
        return sympy.Poly(0, *GENERATORS)
    return sympy.Poly.from_dict(rep, *GENERATORS)


def monomial_poly(a: int = 0, b: int = 0, c: int = 0, d: int = 0, coef: Scalar = 1) -> PolyFn:
    return make_poly({Monomial(a, b, c, d): coef})


def constant_poly(value: Scalar) -> PolyFn:
    return make_poly({Monomial(): value})


# --- structure ------------------------------------------------------------

def terms(p: PolyFn) -> Iterator[Tuple[Monomial, complex]]:
    """Nonzero terms in monomial order, coefficients as Python complex"""
    for exps, coef in sorted(p.terms()):
        value = complex(coef)
        if value != 0:
            yield Monomial(*exps), value


def coefficient(p: PolyFn, mono: Monomial) -> complex:
    return complex(p.as_dict().get(mono.exponents, 0))


def total_degree(p: PolyFn) -> int:
    return max((m.degree for m, _ in terms(p)), default=0)


def check_degree(p: PolyFn, cap: int = None) -> None:
    cap = Config.MAX_DEGREE if cap is None else cap
    degree = total_degree(p)
    if degree > cap:
        raise DegreeCapExceededException(degree, cap)


def max_abs_coefficient(p: PolyFn) -> float:
    return max((abs(c) for _, c in terms(p)), default=0.0)


def conjugate(p: PolyFn) -> PolyFn:
    return make_poly({m.conjugate(): c.conjugate() for m, c in terms(p)})


def is_real(p: PolyFn, tol: float = 0.0) -> bool:
    coeffs = dict(terms(p))
    scale = max((abs(v) for v in coeffs.values()), default=0.0)
    for mono, coef in coeffs.items():
        partner = coeffs.get(mono.conjugate(), 0j)
        if abs(coef - partner.conjugate()) > tol * max(scale, 1.0):
            return False
    return True
