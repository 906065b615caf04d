"""Selberg Zeta factors of single geodesics and their pinching behaviour.

The factor of one unoriented closed geodesic of length l is the entire
function prod_k (1 - e^(-(s+k) l))^2.  All products are accumulated in log
space: at small l the factor behaves like e^(-pi^2 / 3l), which underflows
multiplicatively long before it underflows in logs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

from pinchlab.errors import DomainError, ToleranceNotMetError
from pinchlab.special_functions import log_gamma
from pinchlab.surface import LengthSpectrum

_MAX_FACTORS = 1_000_000


@dataclass(frozen=True)
class SpectralParameter:
    """Complex spectral parameter with its eigenvalue form s(1-s)."""

    s: complex

    @property
    def eigenvalue(self) -> complex:
        return self.s * (1.0 - self.s)

    def in_physical_domain(self) -> bool:
        return self.s.real > 0.5


def zeta_factor_log(ell: float, s: complex, tol: float = 1e-14):
    """(log of the factor, tail bound on the log, number of k terms).

    Truncates once |e^(-(s+k)l)| < tol * (1 - e^(-Re(s+k) l)); the geometric
    tail of the log series is folded into the reported bound.
    """
    if ell <= 0:
        raise DomainError("zeta_factor requires a positive length")
    s = complex(s)
    acc = complex(0.0)
    k = 0
    while True:
        x = cmath.exp(-(s + k) * ell)
        ax = abs(x)
        if ax >= 1.0:
            # Re(s) + k still negative; the factor is fine, log needs care
            if ax == 1.0:
                raise DomainError(f"zeta factor vanishes at s = {s}, k = {k}")
            acc += 2.0 * cmath.log(1.0 - x)
            k += 1
            continue
        if ax < tol * (1.0 - math.exp(-(s.real + k) * ell)):
            tail = 2.0 * ax / ((1.0 - math.exp(-ell)) * (1.0 - ax))
            return acc, tail, k
        acc += 2.0 * cmath.log(1.0 - x)
        k += 1
        if k > _MAX_FACTORS:
            raise ToleranceNotMetError("zeta factor truncation did not certify")


def zeta_factor(ell: float, s: complex, tol: float = 1e-14) -> complex:
    """Single-geodesic factor prod_k (1 - e^(-(s+k) ell))^2."""
    log_value, _, _ = zeta_factor_log(ell, s, tol)
    return cmath.exp(log_value)


def zeta_truncated(spectrum: LengthSpectrum, s: complex, tol: float = 1e-14) -> complex:
    """Product of the factors of all primitive entries, with multiplicity."""
    acc = complex(0.0)
    for entry in spectrum.entries:
        if not entry.primitive:
            continue
        log_value, _, _ = zeta_factor_log(entry.length, s, tol)
        acc += entry.multiplicity * log_value
    return cmath.exp(acc)


def pinch_asymptotic(ell: float, s: complex) -> complex:
    """Gamma(s)^2 Z_l(s) e^(pi^2 / 3l) l^(2s-1); tends to 2 pi as l -> 0."""
    if ell <= 0:
        raise DomainError("pinch_asymptotic requires a positive length")
    s = complex(s)
    log_z, _, _ = zeta_factor_log(ell, s)
    exponent = (
        2.0 * log_gamma(s)
        + log_z
        + math.pi * math.pi / (3.0 * ell)
        + (2.0 * s - 1.0) * math.log(ell)
    )
    return cmath.exp(exponent)


def log_deriv_factor(ell: float, s: complex, tol: float = 1e-12) -> complex:
    """Logarithmic derivative Z'_d / Z_d(s) of a single factor.

    Computed as the k-sum 2 l e^(-(s+k)l) / (1 - e^(-(s+k)l)); the n-sum
    form (both orientations folded in) is checked against it and a
    disagreement raises.
    """
    if ell <= 0:
        raise DomainError("log_deriv_factor requires a positive length")
    if complex(s).real <= 0.5:
        raise DomainError("the n-series requires Re s > 1/2")
    s = complex(s)
    k_sum = complex(0.0)
    k = 0
    while True:
        x = cmath.exp(-(s + k) * ell)
        term = 2.0 * ell * x / (1.0 - x)
        k_sum += term
        if abs(term) < tol * max(abs(k_sum), 1e-300):
            break
        k += 1
        if k > _MAX_FACTORS:
            raise ToleranceNotMetError("log-derivative k-sum did not converge")
    n_sum = complex(0.0)
    n = 1
    while True:
        x = cmath.exp(-n * s * ell)
        term = 2.0 * ell * x / (1.0 - math.exp(-n * ell))
        n_sum += term
        if abs(term) < tol * max(abs(n_sum), 1e-300):
            break
        n += 1
        if n > _MAX_FACTORS:
            raise ToleranceNotMetError("log-derivative n-sum did not converge")
    if abs(k_sum - n_sum) > 1e-9 * max(1.0, abs(k_sum)):
        raise ToleranceNotMetError(
            f"k-sum and n-sum disagree: {k_sum} vs {n_sum}", value=k_sum
        )
    return k_sum


def _log_zeta_gamma_sq(ell: float, w: complex, tol: float = 1e-14) -> complex:
    """log of Z_l(w) Gamma(w)^2, regularized at w in -N_0.

    The squared factor k = n of Z_l has a double zero at w = -n that cancels
    the double pole of Gamma(w)^2; the finite limit is (l / n!)^2 times the
    product over the remaining k.  Points within 1e-8 of -n use the limit.
    """
    w = complex(w)
    n = round(w.real)
    if abs(w.imag) < 1e-8 and n <= 0 and abs(w.real - n) < 1e-8:
        n = -n
        acc = 2.0 * (math.log(ell) - math.lgamma(n + 1.0))
        k = 0
        while True:
            if k != n:
                x = cmath.exp(-(-n + k) * ell)
                ax = abs(x)
                if ax < 1.0 and ax < tol * (1.0 - ax):
                    break
                acc += 2.0 * cmath.log(1.0 - x)
            k += 1
            if k > _MAX_FACTORS:
                raise ToleranceNotMetError("regularized zeta factor did not converge")
        return acc
    log_z, _, _ = zeta_factor_log(ell, w, tol)
    return log_z + 2.0 * log_gamma(w)


def lhp_reduction_ratio(ell: float, s: complex) -> complex:
    """Z_d(s) l^(4s-2) Gamma(s)^2 / (Z_d(1-s) Gamma(1-s)^2); tends to 1.

    At s in 1 + N_0 the denominator is a 0 * infinity cancellation (double
    zero of the Zeta factor against the double Gamma pole) and is replaced
    by its finite limit.
    """
    if ell <= 0:
        raise DomainError("lhp_reduction_ratio requires a positive length")
    s = complex(s)
    exponent = (
        _log_zeta_gamma_sq(ell, s)
        - _log_zeta_gamma_sq(ell, 1.0 - s)
        + (4.0 * s - 2.0) * math.log(ell)
    )
    return cmath.exp(exponent)


def pinch_log_decomposition(ell: float, s: complex) -> Tuple[complex, complex, complex]:
    """The three exact pieces of log Z_l(s): plain log, dilogarithm, Binet sum.

    Their sum equals log Z_l(s); the second piece carries the e^(-pi^2/3l)
    divergence and the third converges to Binet's integral for log Gamma.
    """
    from pinchlab.special_functions import dilog

    s = complex(s)
    z = cmath.exp(-s * ell)
    log_term = cmath.log(1.0 - z)
    euler_term = (
        -math.pi * math.pi / (3.0 * ell)
        - 2.0 * s * cmath.log(1.0 - z)
        + 2.0 / ell * dilog(1.0 - z)
    )
    binet = complex(0.0)
    n = 1
    while True:
        x = n * ell
        if x < 1e-4:
            bracket = x / 12.0 - x**3 / 720.0
        else:
            bracket = 1.0 / math.expm1(x) - 1.0 / x + 0.5
        term = -2.0 * cmath.exp(-s * n * ell) / n * bracket
        binet += term
        if abs(term) < 1e-16 * max(abs(binet), 1e-300) and n > 10:
            break
        n += 1
        if n > _MAX_FACTORS:
            raise ToleranceNotMetError("Binet-type series did not converge")
    return log_term, euler_term, binet
