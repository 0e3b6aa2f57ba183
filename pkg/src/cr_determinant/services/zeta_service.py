# cr_determinant/services/zeta_service.py
import logging
import math
from typing import Tuple

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import gamma, zeta, zetac

from src.cr_determinant.ml.spectral_growth_predictor import SpectralGrowthPredictor
from src.cr_determinant.models.spectral_sequence import SpectralSequence, ZetaResult
from exceptions import InsufficientOrderException, ZetaPoleException
from config import Config

logger = logging.getLogger(__name__)


def _binomial_coefficients(s: float, order: int) -> np.ndarray:
    """c_m(s) = (s)_m / m!, the coefficients of (1 - x)^(-s)"""
    coeffs = np.empty(order + 1)
    coeffs[0] = 1.0
    for m in range(1, order + 1):
        coeffs[m] = coeffs[m - 1] * (s + m - 1) / m
    return coeffs


def _binomial_coefficient_slope(s: float, m: int) -> float:
    """d/ds of c_m(s)"""
    return float(mpmath.diff(lambda t: mpmath.rf(t, m), s)) / math.factorial(m)


class ZetaService:
    """Spectral zeta functions, their continuation on the sphere and determinants"""

    def __init__(self):
        self.config = Config()
        self.predictor = SpectralGrowthPredictor()

    # --- Riemann zeta -----------------------------------------------------

    @staticmethod
    def _check_pole(s: float):
        if s == 1.0:
            raise ZetaPoleException(s, "Riemann zeta has a simple pole at s = 1")

    def riemann_zeta(self, s: float) -> float:
        self._check_pole(s)
        return float(zeta(s))

    def riemann_zeta_minus_one(self, s: float) -> float:
        """zeta_R(s) - 1 without cancellation for large s"""
        self._check_pole(s)
        return float(zetac(s))

    def riemann_zeta_prime(self, s: float) -> float:
        self._check_pole(s)
        return float(mpmath.zeta(s, derivative=1))

    def riemann_zeta_prime_minus_one(self) -> float:
        return self.riemann_zeta_prime(-1.0)

    @staticmethod
    def euler_gamma() -> float:
        return float(np.euler_gamma)

    # --- direct summation -------------------------------------------------

    def _growth(self, seq: SpectralSequence) -> Tuple[float, float]:
        if seq.growth is not None:
            return seq.growth
        if seq.n_levels < 4:
            raise ZetaPoleException(float("nan"), "too few levels to estimate spectral growth")
        return self.predictor.train(seq.eigenvalues, seq.multiplicities).predict()

    def _tail_exponent(self, seq: SpectralSequence, s: float) -> float:
        p, r = self._growth(seq)
        return p * s - r - 1.0

    def partial_sum(self, seq: SpectralSequence, s: float, N: int) -> float:
        if N <= 0:
            return 0.0
        eigenvalues, multiplicities = seq.levels(N)
        return float(np.sum(multiplicities * eigenvalues ** -s))

    def zeta_truncated(self, seq: SpectralSequence, s: float, N: int) -> ZetaResult:
        value = self.partial_sum(seq, s, N)
        error = math.inf
        if N <= 0:
            pass
        elif not seq.is_sphere and N >= seq.n_levels:
            error = 0.0  # finite spectrum summed completely
        elif seq.growth is not None:
            q = self._tail_exponent(seq, s)
            if q > 0:
                eigenvalues, multiplicities = seq.levels(N)
                last = multiplicities[-1] * eigenvalues[-1] ** -s
                error = float(last * N / q)
        return ZetaResult(value, "truncated", s, (N, 0), error)

    def zeta_extrapolated(self, seq: SpectralSequence, s: float, N: int) -> ZetaResult:
        """Richardson extrapolation of partial sums under a power-law tail"""
        q = self._tail_exponent(seq, s)
        if q <= 0:
            raise ZetaPoleException(s, f"direct sums diverge (tail exponent {q:g} <= 0)")
        levels = self.config.RICHARDSON_LEVELS
        sizes = [N // 2 ** i for i in range(levels + 1)]
        if sizes[-1] < 2:
            raise InsufficientOrderException(N, 2 ** (levels + 1))
        sums = np.array([self.partial_sum(seq, s, n) for n in sizes])

        def extrapolate(count):
            n = np.array(sizes[:count + 1], dtype=float)
            matrix = np.column_stack([np.ones_like(n)] + [-(n ** -(q + i)) for i in range(count)])
            return float(np.linalg.solve(matrix, sums[:count + 1])[0])

        best = extrapolate(levels)
        previous = extrapolate(levels - 1)
        return ZetaResult(best, "extrapolated", s, (N, levels), abs(best - previous),
                          details={"tail_exponent": q})

    # --- continuation on the sphere -------------------------------------------

    def sphere_zeta_continued(self, s: float, M: int = None) -> ZetaResult:
        """zeta of kappa = 1 sphere levels j(j+1), mult. 2(j+1), by Riemann-zeta reduction"""
        M = self.config.CONTINUATION_ORDER if M is None else M
        if M < self.config.MIN_CONTINUATION_ORDER:
            raise InsufficientOrderException(M, self.config.MIN_CONTINUATION_ORDER)
        if 2.0 * s + M <= 2.0:
            raise ZetaPoleException(s, f"order M={M} too low for the remainder to converge")

        coeffs = _binomial_coefficients(s, M)
        total = 0.0
        for m in range(M + 1):
            argument = 2.0 * s - 1.0 + m
            if abs(argument - 1.0) < 1e-13:
                if abs(coeffs[m]) > 1e-13:
                    raise ZetaPoleException(s, "pole of the continued sphere zeta")
                # c_m vanishes at s: the product tends to c_m'(s) / 2
                term = _binomial_coefficient_slope(s, m) / 2.0
            elif coeffs[m] == 0.0:
                term = 0.0
            else:
                term = coeffs[m] * self.riemann_zeta_minus_one(argument)
            total += term
        tail, tail_bound = self._binomial_tail(s, M)
        value = 2.0 * (total + tail)
        # size of the first term left to the directly summed remainder
        next_coeff = coeffs[M] * (s + M) / (M + 1)
        error = 2.0 * abs(next_coeff) * 2.0 ** -(2.0 * s + M) + self.config.TAIL_CUTOFF + 2.0 * tail_bound
        logger.debug("Continued sphere zeta at s=%g with M=%d: %.17g", s, M, value)
        return ZetaResult(value, "continued", s, (0, M), error, details={"tail": 2.0 * tail})

    def _binomial_tail(self, s: float, M: int) -> Tuple[float, float]:
        """sum_{k>=2} k^(1-2s) sum_{m>M} c_m(s) k^-m, and a bound on what was left out.

        The k-th contribution decays like k^-(2s+M); past ZETA_TAIL_MAX_K the rest is
        bounded by the integral of that power law.
        """
        coeffs = _binomial_coefficients(s, M + 1)
        if np.all(coeffs[1:] == 0.0):
            return 0.0, 0.0
        tail = 0.0
        contribution = 0.0
        for k in range(2, self.config.ZETA_TAIL_MAX_K + 1):
            remainder = 0.0
            c = coeffs[M]
            m = M
            term = math.inf
            while abs(term) > 1e-20 * max(abs(remainder), 1e-300) and m < M + 5000:
                m += 1
                c = c * (s + m - 1) / m
                term = c * float(k) ** -m
                remainder += term
                if c == 0.0:
                    break
            contribution = float(k) ** (1.0 - 2.0 * s) * remainder
            tail += contribution
            if abs(contribution) < self.config.TAIL_CUTOFF * max(abs(tail), 1.0) and k > 4:
                return tail, 0.0
        decay = 2.0 * s + M
        bound = abs(contribution) * self.config.ZETA_TAIL_MAX_K / (decay - 1.0)
        logger.warning("Binomial tail cut at k=%d for s=%g, M=%d (bound %.3e)",
                       self.config.ZETA_TAIL_MAX_K, s, M, bound)
        return tail, bound

    def zeta_prime_zero_sphere(self, M: int = None) -> float:
        M = self.config.CONTINUATION_ORDER if M is None else M
        if M < self.config.MIN_ZETA_PRIME_ORDER:
            raise InsufficientOrderException(M, self.config.MIN_ZETA_PRIME_ORDER)
        total = 2.0 * self.riemann_zeta_prime_minus_one()
        total += self.riemann_zeta(0.0) - 1.0
        total += 0.25 + 0.5 * (self.euler_gamma() - 1.0)
        for m in range(3, M + 1):
            total += self.riemann_zeta_minus_one(m - 1.0) / m
        total += self._log_tail(M)
        return 2.0 * total

    def _log_tail(self, M: int) -> float:
        """sum_{k>=2} k sum_{m>M} k^-m / m"""
        tail = 0.0
        k = 2
        while True:
            inner = 0.0
            m = M
            term = math.inf
            while term > 1e-20 * max(inner, 1e-300):
                m += 1
                term = float(k) ** -m / m
                inner += term
            contribution = k * inner
            tail += contribution
            if contribution < self.config.TAIL_CUTOFF * max(tail, 1.0):
                return tail
            k += 1

    # --- general sequences ------------------------------------------------

    def zeta_zero(self, seq: SpectralSequence) -> float:
        if not seq.is_sphere:
            # a finite spectrum is entire: zeta(0) counts the positive levels
            return float(np.sum(seq.multiplicities))
        # zeta_{kappa A}(0) = zeta_A(0)
        return self.sphere_zeta_continued(0.0).value

    def zeta_prime_zero(self, seq: SpectralSequence, M: int = None) -> float:
        if not seq.is_sphere:
            return float(-np.sum(seq.multiplicities * np.log(seq.eigenvalues)))
        base = self.zeta_prime_zero_sphere(M)
        return base - math.log(seq.kappa) * self.zeta_zero(seq)

    def zeta(self, seq: SpectralSequence, s: float, M: int = None) -> ZetaResult:
        """Continued value for sphere sequences (kappa^-s zeta_A(s)); complete sum otherwise"""
        if not seq.is_sphere:
            return self.zeta_truncated(seq, s, seq.n_levels)
        base = self.sphere_zeta_continued(s, M)
        scale = seq.kappa ** -s
        return ZetaResult(base.value * scale, base.method, s, base.orders, base.error_estimate * scale)

    def sphere_det(self, M: int = None, kappa: float = 1.0) -> float:
        return math.exp(-self.zeta_prime_zero(SpectralSequence.sphere(1, kappa), M))

    def conformal_index(self, total_qprime: float) -> float:
        return -total_qprime / (24.0 * math.pi ** 2) - 1.0

    def burns_epstein(self, total_qprime: float) -> float:
        return -16.0 * math.pi ** 2 * total_qprime

    def det_scaling_check(self, seq: SpectralSequence, c: float, M: int = None,
                          step: float = 1e-5) -> Tuple[float, float, float]:
        """det of the c^-4 scaled spectrum against c^(-4 zeta(0)) det.

        The left side differentiates s -> k^-s zeta(s) numerically at s = 0; the right
        side uses the closed-form scaling law.
        """
        if c <= 0:
            raise ValueError(f"Scale must be positive, got {c}")
        k = c ** -4.0
        scaled = seq.scaled(k)
        derivative = (self.zeta(scaled, step, M).value - self.zeta(scaled, -step, M).value) / (2.0 * step)
        lhs = math.exp(-derivative)
        det = math.exp(-self.zeta_prime_zero(seq, M))
        rhs = c ** (-4.0 * self.zeta_zero(seq)) * det
        return lhs, rhs, abs(lhs - rhs) / abs(rhs)

    def scaling_invariant(self, seq: SpectralSequence, volume: float, M: int = None) -> float:
        """S = (Vol / V)^zeta(0) det, with V the reference volume 4 pi^2"""
        det = math.exp(-self.zeta_prime_zero(seq, M))
        return (volume / self.config.VOLUME) ** self.zeta_zero(seq) * det

    # --- heat trace ---------------------------------------------------------

    def heat_trace(self, seq: SpectralSequence, t: float) -> float:
        if t <= 0:
            raise ValueError(f"Heat trace needs t > 0, got {t}")
        if not seq.is_sphere:
            return float(np.sum(seq.multiplicities * np.exp(-t * seq.eigenvalues)) + seq.kernel_dim)
        n = 64
        while True:
            eigenvalues, multiplicities = seq.levels(n)
            terms = multiplicities * np.exp(-t * eigenvalues)
            total = float(np.sum(terms))
            if terms[-1] < self.config.TAIL_CUTOFF * max(total, 1.0):
                return total + seq.kernel_dim
            n *= 2

    def zeta_mellin(self, seq: SpectralSequence, s: float) -> ZetaResult:
        """(1 / Gamma(s)) int_0^inf t^(s-1) (heat trace - kernel) dt"""
        if s <= 1.0:
            raise ZetaPoleException(s, "the Mellin integral converges only for s > 1")

        def integrand(t):
            return t ** (s - 1.0) * (self.heat_trace(seq, t) - seq.kernel_dim)

        head, head_err = integrate.quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
        tail, tail_err = integrate.quad(integrand, 1.0, np.inf, limit=200, epsabs=1e-13, epsrel=1e-12)
        norm = gamma(s)
        return ZetaResult((head + tail) / norm, "mellin", s, (0, 0), (head_err + tail_err) / norm)
