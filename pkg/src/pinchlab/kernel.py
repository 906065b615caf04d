"""Resolvent point-pair kernel and cylinder kernels with certified tails.

The free resolvent kernel on the hyperbolic plane is k_s evaluated at the
chordal invariant t = 2(cosh d - 1); on an elementary cylinder the kernel
is the deck-group sum over integer fibre shifts.  Every truncated sum here
carries an explicit a-priori tail bound and refuses to return when the
bound cannot be certified.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pinchlab.errors import DomainError, ToleranceNotMetError
from pinchlab.hyperbolic import CylinderPoint, sigma
from pinchlab.special_functions import (
    QuadratureSpec,
    Tail,
    integrate,
    log_gamma,
    gamma,
)

_SERIES_BUDGET = 20_000


@dataclass(frozen=True)
class PointPairInvariant:
    """The kernel argument t = 4 sinh^2(d/2) = 2(cosh d - 1)."""

    t: float

    def __post_init__(self):
        if self.t < 0:
            raise DomainError("point-pair invariant must be non-negative")


def _require_physical(s: complex) -> complex:
    s = complex(s)
    if s.real <= 0.5:
        raise DomainError(f"Re s = {s.real} is not in the physical domain Re s > 1/2")
    return s


def point_pair_k(
    s: complex,
    t: float,
    method: str = "series",
    tol: float = 1e-12,
) -> complex:
    """Free resolvent kernel k_s(t) = (4^(s-1)/pi) int_0^1 (x(1-x))^(s-1) (4x+t)^(-s) dx.

    ``method`` is "series" (power series in 4/(4+t), needs t bounded away
    from 0) or "quadrature" (direct integral with declared endpoint
    singularities).
    """
    s = _require_physical(s)
    if isinstance(t, PointPairInvariant):
        t = t.t
    if t < 0:
        raise DomainError("kernel argument t must be non-negative")
    if method == "series":
        return _k_series(s, t, tol)
    if method == "quadrature":
        return _k_quadrature(s, t, tol)
    raise DomainError(f"unknown method {method!r}")


def _k_series(s: complex, t: float, tol: float) -> complex:
    ratio = 4.0 / (4.0 + t)
    if ratio > 0.999:
        raise DomainError(
            f"series evaluation needs t bounded away from 0 (got t = {t})"
        )
    # term_j = (4^(s-1)/pi) (4^j / j!) Gamma(s+j)^2 / Gamma(2s+j) (4+t)^(-s-j)
    log_t0 = (
        (s - 1.0) * math.log(4.0)
        - math.log(math.pi)
        + 2.0 * log_gamma(s)
        - log_gamma(2.0 * s)
        - s * math.log(4.0 + t)
    )
    term = cmath.exp(log_t0)
    acc = term
    for j in range(_SERIES_BUDGET):
        term = term * (s + j) ** 2 / ((2.0 * s + j) * (j + 1.0)) * ratio
        acc += term
        if abs(term) < tol * max(abs(acc), 1e-300):
            # geometric tail bound with the asymptotic ratio
            tail = abs(term) * ratio / (1.0 - ratio)
            if tail < 10.0 * tol * max(abs(acc), 1e-300):
                return acc
    raise ToleranceNotMetError(f"kernel series did not converge at t = {t}", value=acc)


def _k_quadrature(s: complex, t: float, tol: float) -> complex:
    if t == 0.0 and s.real >= 1.0:
        raise DomainError("k_s(0) diverges for Re s >= 1; use the difference form")
    alpha = max(0.0, 1.0 - s.real)
    alpha = alpha if alpha > 1e-12 else None
    spec = QuadratureSpec(relative_tolerance=tol, absolute_tolerance=tol * 1e-2)

    def f(x):
        return (x * (1.0 - x)) ** (s - 1.0) * (4.0 * x + t) ** (-s)

    value, _ = integrate(
        f, 0.0, 1.0, spec, left_singularity=alpha, right_singularity=alpha
    )
    return cmath.exp((s - 1.0) * math.log(4.0)) / math.pi * value


def k_decay_constant(s: complex) -> float:
    """C(s) with |k_s(t)| <= C(s) t^(-Re s), from the defining integral."""
    s = _require_physical(s)
    # |(x(1-x))^(s-1)| = (x(1-x))^(Re s - 1), and (4x+t)^(-s) <= t^(-Re s)
    log_beta = 2.0 * math.lgamma(s.real) - math.lgamma(2.0 * s.real)
    return 4.0 ** (s.real - 1.0) / math.pi * math.exp(log_beta)


def k_zero_difference(s: complex, s0: complex, terms: int = 120_000) -> complex:
    """k_s(0) - k_s0(0) by the termwise-combined power series.

    Each series alone diverges harmonically; the leading 1/(4 pi j) parts
    cancel and the combined terms fall off like j^(-2).  A first-order tail
    correction is added.
    """
    s = _require_physical(s)
    s0 = _require_physical(s0)
    j = np.arange(terms)

    def coeffs(w):
        ratios = np.empty(terms, dtype=complex)
        ratios[0] = 1.0
        ratios[1:] = (w + j[:-1]) ** 2 / ((2.0 * w + j[:-1]) * (j[:-1] + 1.0))
        first = cmath.exp(2.0 * log_gamma(w) - log_gamma(2.0 * w)) / (
            4.0 * math.pi
        )
        return first * np.cumprod(ratios)

    d = coeffs(s) - coeffs(s0)
    total = complex(np.sum(d[::-1]))
    # tail: sum_{j >= J} A/j^2 ~ A/J with A estimated from the last term
    tail = d[-1] * (terms - 1)
    return total + tail


def _k_series_batch(s: complex, ts: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized kernel series for arguments bounded away from 0 (all t > 4)."""
    ratio = 4.0 / (4.0 + ts)
    log_t0 = (
        (s - 1.0) * math.log(4.0)
        - math.log(math.pi)
        + 2.0 * log_gamma(s)
        - log_gamma(2.0 * s)
    )
    term = np.exp(log_t0 - s * np.log(4.0 + ts))
    acc = term.copy()
    rmax = float(np.max(ratio))
    j = 0
    while True:
        term = term * (s + j) ** 2 / ((2.0 * s + j) * (j + 1.0)) * ratio
        acc += term
        j += 1
        if float(np.max(np.abs(term))) < tol * max(float(np.min(np.abs(acc))), 1e-300):
            break
        if j > _SERIES_BUDGET:
            raise ToleranceNotMetError("batched kernel series did not converge")
    del rmax
    return acc


def _cylinder_tail_bound(
    ell: float, prod: float, margin: float, r: float, c_decay: float
) -> float:
    """Bound on sum_{|n| > N} k_s over the deck group, margin = N - |dx|.

    Combines the quadratic lower bound sigma >= prod * m^2 with, for
    ell > 0, the exponential bound sigma >= 2(cosh(ell m) - 1) >= 0.72 e^(ell m).
    """
    if margin <= 1.0:
        return math.inf
    quad = (
        2.0 * c_decay * prod ** (-r) * margin ** (1.0 - 2.0 * r) / (2.0 * r - 1.0)
        if prod > 0
        else math.inf
    )
    expo = math.inf
    if ell > 0 and ell * margin >= 2.0:
        expo = (
            2.0
            * c_decay
            * 0.72 ** (-r)
            * math.exp(-r * ell * margin)
            / (1.0 - math.exp(-r * ell))
        )
    return min(quad, expo)


def _tail_cutoff(
    ell: float, prod: float, dx: float, r: float, c_decay: float, tol: float
) -> int:
    """Smallest N with a certified deck-sum tail below tol, in closed form."""
    candidates = []
    if prod > 0:
        margin = (2.0 * c_decay * prod ** (-r) / ((2.0 * r - 1.0) * tol)) ** (
            1.0 / (2.0 * r - 1.0)
        )
        candidates.append(margin)
    if ell > 0:
        amp = 2.0 * c_decay * 0.72 ** (-r) / (1.0 - math.exp(-r * ell))
        margin = max(2.0 / ell, math.log(max(amp / tol, 1.0)) / (r * ell))
        candidates.append(margin)
    if not candidates:
        raise ToleranceNotMetError("cylinder kernel tail not certifiable")
    margin = min(candidates)
    n_cut = int(math.ceil(dx + max(margin, 1.0))) + 1
    if n_cut > 50_000_000:
        raise ToleranceNotMetError("cylinder kernel tail not certifiable")
    return n_cut


def cylinder_kernel(
    ell: float,
    s: complex,
    p1: CylinderPoint,
    p2: CylinderPoint,
    tol: float = 1e-10,
) -> complex:
    """Resolvent kernel sum_n k_s(sigma_ell(z1, gamma^n z2)) on the cylinder.

    The symmetric truncation is certified through the lower bounds
    sigma >= |a1 a2| (n - dx)^2 and, for ell > 0, the exponential growth of
    cosh along the fibre.  Vanishing |a1 a2| on a cusp makes the quadratic
    tail uncertifiable and raises.
    """
    s = _require_physical(s)
    if ell < 0:
        raise DomainError("cylinder parameter must be non-negative")
    prod = abs(p1.a * p2.a)
    if prod == 0.0 and ell == 0.0:
        raise ToleranceNotMetError("tail not certifiable: |a1 a2| vanishes")
    if ell == 0.0 and p1.a * p2.a < 0.0:
        return complex(0.0)  # different components: every summand vanishes
    c_decay = k_decay_constant(s)
    dx = abs(p1.x - p2.x)
    r = s.real
    n_cut = _tail_cutoff(ell, prod, dx, r, c_decay, tol)

    acc = complex(0.0)
    batched: list = []
    for n in range(-n_cut, n_cut + 1):
        t = sigma(ell, p1, CylinderPoint(p2.x + n, p2.a))
        if t == math.inf:
            continue
        if t <= 0.0:
            raise DomainError("cylinder kernel evaluated on the diagonal orbit")
        if t > 8.0:
            batched.append(t)
        else:
            acc += point_pair_k(
                s, t, method="series" if t > 0.5 else "quadrature", tol=tol
            )
    if batched:
        acc += complex(np.sum(_k_series_batch(s, np.array(batched), tol)))
    return acc


def g_bound(ell: float, a1: float, a2: float, r: float) -> float:
    """The Hilbert-Schmidt comparison function g_ell(a1, a2, r).

    Closed form for ell > 0; for ell = 0 it is
    [a1 a2 + (a1-a2)^2]^(1/2-r) (a1 a2)^(r-1) when a1 a2 > 0, else 0.
    """
    if r <= 0.5:
        raise DomainError("g_bound requires r > 1/2")
    if ell < 0:
        raise DomainError("cylinder parameter must be non-negative")
    if ell == 0.0:
        if a1 * a2 == 0.0:
            raise DomainError("g_0 requires a1 a2 != 0")
        if a1 * a2 < 0.0:
            return 0.0
        return (a1 * a2 + (a1 - a2) ** 2) ** (0.5 - r) * (a1 * a2) ** (-1.0 + r)
    disc = (ell * ell + a1 * a2) ** 2 + ell * ell * (a1 - a2) ** 2
    root = math.sqrt(disc)
    inner = 1.0 + 2.0 / (ell * ell) * (root - (ell * ell + a1 * a2))
    return inner ** (0.5 - r) * disc ** (-0.25)


def _real_zeta(x: float, terms: int = 64) -> float:
    """Riemann zeta for real x > 1 (Euler-Maclaurin tail)."""
    if x <= 1.0:
        raise DomainError("zeta argument must exceed 1")
    n = np.arange(1, terms)
    head = float(np.sum(n ** (-x)))
    m = float(terms)
    return head + m ** (1.0 - x) / (x - 1.0) + 0.5 * m ** (-x) - x / 12.0 * m ** (-x - 1.0)


def remainder_integral(
    ell: float,
    s: complex,
    lower: float,
    tol: float = 1e-9,
) -> Tuple[complex, float]:
    """int_lower^inf sum_{n != 0} k_s(sigma_ell(0, a, n, a)) da with bounds.

    Returns (value, certified bound on the truncation error).  The a-tail
    uses sigma >= a^2 n^2, giving 2 C zeta(2r) B^(1-2r) / (2r - 1) beyond B.
    """
    s = _require_physical(s)
    if lower <= 0:
        raise DomainError("remainder integral needs a positive lower bound")
    r = s.real
    c_decay = k_decay_constant(s)
    zeta2r = _real_zeta(2.0 * r)

    def a_tail_bound(b: float) -> float:
        return 2.0 * c_decay * zeta2r * b ** (1.0 - 2.0 * r) / (2.0 * r - 1.0)

    b_cut = max(lower + 1.0, 2.0)
    while a_tail_bound(b_cut) > 0.25 * tol:
        b_cut *= 1.5
        if b_cut > 1e12:
            raise ToleranceNotMetError("a-tail not certifiable")

    inner_tol = 0.25 * tol / (b_cut - lower)

    def integrand(a):
        return equal_height_deck_sum(ell, s, a, inner_tol, c_decay)

    spec = QuadratureSpec(relative_tolerance=1e-10, absolute_tolerance=0.25 * tol)
    value, quad_err = integrate(integrand, lower, b_cut, spec)
    return value, quad_err + a_tail_bound(b_cut)


def equal_height_deck_sum(
    ell: float,
    s: complex,
    a: float,
    tol: float,
    c_decay: float = None,
) -> complex:
    """sum_{n != 0} k_s(sigma_ell((0,a), (n,a))), vectorized over n.

    For equal heights the invariant collapses to
    sigma = (ell^2 + a^2) (2 sinh(ell n / 2) / ell)^2 (a^2 n^2 at ell = 0).
    """
    s = _require_physical(s)
    if c_decay is None:
        c_decay = k_decay_constant(s)
    r = s.real
    n_cut = _tail_cutoff(ell, a * a, 0.0, r, c_decay, tol)
    n = np.arange(1, n_cut + 1, dtype=float)
    if ell == 0.0:
        ts = a * a * n * n
    else:
        arg = 0.5 * ell * n
        with np.errstate(over="ignore"):
            ts = (ell * ell + a * a) * (2.0 * np.sinh(np.minimum(arg, 360.0)) / ell) ** 2
        ts[arg > 355.0] = math.inf
    finite = ts[np.isfinite(ts)]
    small = finite[finite <= 8.0]
    large = finite[finite > 8.0]
    acc = complex(0.0)
    for t in small:
        if t <= 0.0:
            raise DomainError("deck sum hit the diagonal")
        acc += point_pair_k(s, float(t), "series" if t > 0.5 else "quadrature", 1e-12)
    if large.size:
        acc += complex(np.sum(_k_series_batch(s, large, 1e-12)))
    return 2.0 * acc


def hs_bound_rhs(ell: float, a1: float, a2: float, r: float) -> float:
    """Right side of the Hilbert-Schmidt estimate for the squared fibre integral."""
    g2 = g_bound(ell, a1, a2, 2.0 * r)
    g1 = g_bound(ell, a1, a2, r)
    term1 = (
        math.sqrt(math.pi)
        * math.exp(math.lgamma(2.0 * r - 0.5) - math.lgamma(2.0 * r))
        * g2
    )
    term2 = (
        math.pi
        * math.exp(2.0 * (math.lgamma(r - 0.5) - math.lgamma(r)))
        * g1
        * g1
    )
    return term1 + term2
