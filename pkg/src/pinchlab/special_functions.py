"""Complex special functions and deterministic adaptive quadrature.

Everything here is a pure function of its arguments.  The quadrature is
Gauss-Kronrod (G7, K15) with explicit changes of variables for declared
algebraic endpoint singularities and for semi-infinite tails, so that two
runs with the same spec return bit-identical values.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

from pinchlab.errors import DomainError, PoleError, ToleranceNotMetError

LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# Lanczos approximation, g = 7, 9 terms: ~15 significant digits on Re z >= 1/2.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SERIES_BUDGET = 200_000


def _as_complex(z) -> complex:
    return complex(z)


def _is_nonpositive_integer(z: complex, tol: float = 1e-12) -> bool:
    if abs(z.imag) > tol:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) < tol


def log_gamma(z) -> complex:
    """Logarithm of the Gamma function, principal determination.

    Uses a Lanczos sum for Re z >= 1/2 and the reflection formula on the
    left half-plane.  exp(log_gamma(z)) equals Gamma(z) to ~13 digits.
    """
    z = _as_complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma pole at z = {z}")
    if z.real < 0.5:
        # log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        return math.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - log_gamma(1.0 - z)
    w = z - 1.0
    x = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        x += c / (w + i)
    t = w + _LANCZOS_G + 0.5
    return LOG_SQRT_TWO_PI + (w + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma(z) -> complex:
    """Gamma function via ``exp(log_gamma(z))``."""
    return cmath.exp(log_gamma(z))


def _hyp2f1_series(a: complex, b: complex, c: complex, z: complex, tol: float) -> complex:
    """Raw power series sum_k (a)_k (b)_k / ((c)_k k!) z^k for |z| < 1."""
    term = complex(1.0)
    acc = complex(1.0)
    small_streak = 0
    for k in range(_SERIES_BUDGET):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        acc += term
        if term == 0:
            return acc
        if abs(term) < tol * max(abs(acc), 1e-300):
            small_streak += 1
            if small_streak >= 2:
                return acc
        else:
            small_streak = 0
    raise ToleranceNotMetError(
        f"2F1 series did not converge within {_SERIES_BUDGET} terms at z = {z}",
        value=acc,
    )


def hyp2f1(a, b, c, z, tol: float = 1e-14) -> complex:
    """Gauss hypergeometric function F(a, b; c; z).

    Supported arguments: |z| <= 1/2 (raw series) and real z < 0 (Pfaff
    transformation into [0, 1)).  This covers every evaluation the mode
    functions and connection formulas need.
    """
    a, b, c, z = map(_as_complex, (a, b, c, z))
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 parameter pole at c = {c}")
    if z == 0:
        return complex(1.0)
    if abs(z) <= 0.5:
        return _hyp2f1_series(a, b, c, z, tol)
    if abs(z.imag) < 1e-300 and z.real < 0.0:
        # Pfaff: F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1)), argument in (0,1).
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w, tol)
    raise DomainError(f"2F1 argument z = {z} outside the supported region")


def hyp2f1_derivative(a, b, c, z, tol: float = 1e-14) -> complex:
    """d/dz F(a, b; c; z) via the contiguous relation (ab/c) F(a+1,b+1;c+1;z)."""
    a, b, c = map(_as_complex, (a, b, c))
    return a * b / c * hyp2f1(a + 1, b + 1, c + 1, z, tol=tol)


def dilog(z, tol: float = 1e-15) -> complex:
    """Euler dilogarithm Li2(z) = sum_n z^n / n^2 on the principal region.

    Supported: |z| <= 1, plus the reflection neighbourhood |1-z| <= 1/2.
    """
    z = _as_complex(z)
    if z == 1.0:
        return complex(math.pi * math.pi / 6.0)
    if abs(1.0 - z) <= 0.5:
        # Li2(z) = pi^2/6 - log(z) log(1-z) - Li2(1-z)
        w = 1.0 - z
        return (
            math.pi * math.pi / 6.0
            - cmath.log(z) * cmath.log(w)
            - _dilog_series(w, tol)
        )
    if abs(z) <= 1.0 and z.real <= 1.0:
        return _dilog_series(z, tol)
    raise DomainError(f"dilog argument z = {z} outside the supported branch region")


def _dilog_series(z: complex, tol: float) -> complex:
    acc = complex(0.0)
    power = complex(1.0)
    for n in range(1, _SERIES_BUDGET):
        power *= z
        term = power / (n * n)
        acc += term
        if abs(term) < tol * max(abs(acc), 1e-300):
            return acc
    raise ToleranceNotMetError(f"dilog series did not converge at z = {z}", value=acc)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

# Kronrod 15-point abscissae and weights, Gauss 7 weights (QUADPACK values).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


@dataclass(frozen=True)
class Tail:
    """Declared decay of an integrand toward +/- infinity.

    kind "exp":   |f(x)| <= coefficient * exp(-rate * |x|)
    kind "power": |f(x)| <= coefficient * |x| ** (-rate), rate > 1
    """

    kind: str
    rate: float
    coefficient: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "power"):
            raise DomainError(f"unknown tail kind {self.kind!r}")
        if self.rate <= 0 or (self.kind == "power" and self.rate <= 1.0):
            raise DomainError("tail decay too weak to integrate")
        if self.coefficient <= 0:
            raise DomainError("tail coefficient must be positive")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for one adaptive integration."""

    relative_tolerance: float = 1e-11
    absolute_tolerance: float = 1e-13
    max_subdivisions: int = 600
    semi_infinite_cutoff_policy: str = "substitute"

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if self.semi_infinite_cutoff_policy not in ("substitute", "truncate"):
            raise DomainError(
                f"unknown cutoff policy {self.semi_infinite_cutoff_policy!r}"
            )


DEFAULT_QUADRATURE = QuadratureSpec()


def _panel(f: Callable[[float], complex], lo: float, hi: float):
    mid = 0.5 * (lo + hi)
    hw = 0.5 * (hi - lo)
    k15 = complex(0.0)
    g7 = complex(0.0)
    for i, x in enumerate(_XGK):
        if x == 0.0:
            fv = f(mid)
            k15 += _WGK[i] * fv
            g7 += _WG[3] * fv
        else:
            fp = f(mid + hw * x)
            fm = f(mid - hw * x)
            k15 += _WGK[i] * (fp + fm)
            if i % 2 == 1:
                g7 += _WG[i // 2] * (fp + fm)
    diff = abs(k15 - g7) * hw
    err = min(diff, (200.0 * diff) ** 1.5) if diff > 0 else 0.0
    return k15 * hw, err


def _adaptive(f, lo: float, hi: float, spec: QuadratureSpec):
    """Adaptive bisection on [lo, hi]; deterministic worst-panel refinement."""
    val, err = _panel(f, lo, hi)
    panels = [(lo, hi, val, err)]
    while True:
        total = complex(0.0)
        total_err = 0.0
        worst = 0
        worst_err = -1.0
        for i, (_, _, v, e) in enumerate(panels):
            total += v
            total_err += e
            if e > worst_err:
                worst_err = e
                worst = i
        if total_err <= max(spec.relative_tolerance * abs(total), spec.absolute_tolerance):
            return total, total_err
        if len(panels) >= spec.max_subdivisions:
            raise ToleranceNotMetError(
                f"quadrature used {len(panels)} panels without reaching tolerance",
                value=total,
                error_estimate=total_err,
            )
        a, b, _, _ = panels[worst]
        m = 0.5 * (a + b)
        panels[worst] = (a, m, *_panel(f, a, m))
        panels.append((m, b, *_panel(f, m, b)))


def _guarded(f):
    """Wrap an integrand so overflow in a mapped tail evaluates to 0."""

    def g(x):
        try:
            v = f(x)
        except OverflowError:
            return 0.0
        if isinstance(v, complex):
            if math.isfinite(v.real) and math.isfinite(v.imag):
                return v
            return 0.0
        return v if math.isfinite(v) else 0.0

    return g


def _sub_left(f, a: float, b: float, alpha: float):
    """Transform away an (x-a)^(-alpha) singularity at the left endpoint."""
    p = 1.0 / (1.0 - alpha)
    u_hi = (b - a) ** (1.0 - alpha)

    def g(u):
        return f(a + u**p) * p * u ** (p - 1.0)

    return g, 0.0, u_hi


def _sub_right(f, a: float, b: float, alpha: float):
    p = 1.0 / (1.0 - alpha)
    u_hi = (b - a) ** (1.0 - alpha)

    def g(u):
        return f(b - u**p) * p * u ** (p - 1.0)

    return g, 0.0, u_hi


def _integrate_finite(f, a, b, spec, left_singularity, right_singularity):
    pieces = []
    if left_singularity and right_singularity:
        m = 0.5 * (a + b)
        pieces.append(_sub_left(f, a, m, left_singularity))
        pieces.append(_sub_right(f, m, b, right_singularity))
    elif left_singularity:
        pieces.append(_sub_left(f, a, b, left_singularity))
    elif right_singularity:
        pieces.append(_sub_right(f, a, b, right_singularity))
    else:
        pieces.append((f, a, b))
    total = complex(0.0)
    total_err = 0.0
    for g, lo, hi in pieces:
        v, e = _adaptive(g, lo, hi, spec)
        total += v
        total_err += e
    return total, total_err


def _integrate_upper_tail(f, a, spec, left_singularity, tail: Tail):
    """Integral over [a, infinity) with a declared tail."""
    if spec.semi_infinite_cutoff_policy == "truncate":
        delta = 0.5 * spec.absolute_tolerance
        if tail.kind == "exp":
            bound_at = lambda B: tail.coefficient / tail.rate * math.exp(-tail.rate * B)
            B = max(a + 1.0, math.log(max(tail.coefficient / (tail.rate * delta), 1.0)) / tail.rate)
        else:
            bound_at = lambda B: tail.coefficient * B ** (1.0 - tail.rate) / (tail.rate - 1.0)
            B = max(a + 1.0, (tail.coefficient / (delta * (tail.rate - 1.0))) ** (1.0 / (tail.rate - 1.0)))
        val, err = _integrate_finite(f, a, B, spec, left_singularity, None)
        return val, err + bound_at(B)

    g = _guarded(f)
    if tail.kind == "exp":
        kappa = tail.rate

        def h(t):
            x = a - math.log1p(-t) / kappa
            return g(x) / (kappa * (1.0 - t))

        return _integrate_finite(h, 0.0, 1.0, spec, left_singularity, None)

    # power tail: x = a - 1 + 1/(1-t); integrand decays like (1-t)^(p-2)
    def h(t):
        s = 1.0 - t
        x = a - 1.0 + 1.0 / s
        return g(x) / (s * s)

    alpha = max(0.0, 2.0 - tail.rate)
    alpha = alpha if alpha > 1e-12 else None
    return _integrate_finite(h, 0.0, 1.0, spec, left_singularity, alpha)


def integrate(
    f: Callable[[float], complex],
    lower: float,
    upper: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    *,
    left_singularity: Optional[float] = None,
    right_singularity: Optional[float] = None,
    tail: Optional[Tail] = None,
):
    """Integrate ``f`` over (lower, upper), returning ``(value, error_estimate)``.

    Endpoint singularities of algebraic type (x - x0)^(-alpha), alpha < 1,
    must be declared through ``left_singularity`` / ``right_singularity``.
    Semi-infinite intervals require a declared :class:`Tail`.  The result is
    a deterministic function of the arguments and the spec.
    """
    for alpha in (left_singularity, right_singularity):
        if alpha is not None and not (0.0 <= alpha < 1.0):
            raise DomainError(f"endpoint singularity exponent {alpha} not in [0, 1)")
    lo_inf = lower == -math.inf
    hi_inf = upper == math.inf
    if not lo_inf and not hi_inf:
        if not (lower < upper):
            raise DomainError(f"invalid interval [{lower}, {upper}]")
        return _integrate_finite(f, lower, upper, spec, left_singularity, right_singularity)
    if tail is None:
        raise DomainError("semi-infinite integration requires a declared tail")
    if lo_inf and hi_inf:
        v1, e1 = _integrate_upper_tail(lambda x: f(-x), 0.0, spec, None, tail)
        v2, e2 = _integrate_upper_tail(f, 0.0, spec, None, tail)
        return v1 + v2, e1 + e2
    if lo_inf:
        return _integrate_upper_tail(
            lambda x: f(-x), -upper, spec, right_singularity, tail
        )
    return _integrate_upper_tail(f, lower, spec, left_singularity, tail)
