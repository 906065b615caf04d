"""Hyperbolic-plane primitives.

Upper half-plane throughout.  Geodesics are stored as projective 4-vectors
(a0, a1, a2, a3) representing the sphere a0*|x|^2 - 2<x, (a1, a2)> + a3 = 0,
normalized so that the self-product q(a, a) = 2(a1^2 + a2^2) - 2 a0 a3
equals 2.  Cylinder models X_ell carry coordinates (x, a) with the metric
(ell^2 + a^2) dx^2 + (ell^2 + a^2)^(-1) da^2; their volume form is Euclidean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from pinchlab.errors import DegenerateInputError, DomainError

INF = math.inf

# Traces within this band of 2 are classified parabolic: pinched lengths make
# traces approach 2 and a deterministic band avoids flapping.
PARABOLIC_TRACE_BAND = 1e-9


# ---------------------------------------------------------------------------
# Mobius matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MobiusMatrix:
    """Real 2x2 matrix acting on the upper half-plane, det normalized to +1.

    Matrices are identified up to sign (PSL(2, R))."""

    a: float
    b: float
    c: float
    d: float

    @staticmethod
    def identity() -> "MobiusMatrix":
        return MobiusMatrix(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def from_entries(a, b, c, d) -> "MobiusMatrix":
        det = a * d - b * c
        if det <= 0:
            raise DegenerateInputError(f"matrix determinant {det} not positive")
        s = 1.0 / math.sqrt(det)
        return MobiusMatrix(a * s, b * s, c * s, d * s)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MobiusMatrix") -> "MobiusMatrix":
        return MobiusMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusMatrix":
        return MobiusMatrix(self.d, -self.b, -self.c, self.a)

    def apply(self, z):
        """Apply to a point of the closed half-plane (complex or INF)."""
        if z == INF:
            return self.a / self.c if self.c != 0 else INF
        den = self.c * z + self.d
        if den == 0:
            return INF
        return (self.a * z + self.b) / den

    def classify(self) -> str:
        t = abs(self.trace())
        if abs(t - 2.0) <= PARABOLIC_TRACE_BAND:
            return "parabolic"
        return "hyperbolic" if t > 2.0 else "elliptic"

    def fixed_points(self) -> Tuple[float, float]:
        """Boundary fixed points (repelling, attracting) of a hyperbolic matrix."""
        if self.classify() != "hyperbolic":
            raise DomainError("fixed points on the boundary require a hyperbolic matrix")
        a, b, c, d = self.a, self.b, self.c, self.d
        if c == 0.0:
            p_fin = b / (d - a)
            # z -> (a/d) z + ...: infinity attracting iff |a| > |d|
            return (p_fin, INF) if abs(a) > abs(d) else (INF, p_fin)
        disc = math.sqrt((a + d) ** 2 - 4.0)
        p1 = (a - d + disc) / (2.0 * c)
        p2 = (a - d - disc) / (2.0 * c)
        # attracting fixed point p has |derivative| = (c p + d)^(-2) > 1
        if abs(c * p1 + d) < 1.0:
            return (p2, p1)
        return (p1, p2)


def translation_length(m: MobiusMatrix) -> float:
    """Translation length 2 arcosh(|tr|/2) of a hyperbolic matrix."""
    t = abs(m.trace())
    if m.classify() != "hyperbolic":
        raise DomainError(f"matrix with |trace| = {t} is not hyperbolic")
    return 2.0 * math.acosh(t / 2.0)


def standard_form(m: MobiusMatrix) -> Tuple[MobiusMatrix, float]:
    """Conjugator N with N m N^(-1) = diag(e^(l/2), e^(-l/2)) and the length l.

    N maps the attracting fixed point to infinity and the repelling one to 0;
    it is unique up to scaling z -> lambda z.
    """
    ell = translation_length(m)
    if m.trace() < 0:
        m = MobiusMatrix(-m.a, -m.b, -m.c, -m.d)
    p_rep, p_att = m.fixed_points()
    if p_att == INF:
        n = MobiusMatrix.from_entries(1.0, -p_rep, 0.0, 1.0)
    elif p_rep == INF:
        n = MobiusMatrix.from_entries(0.0, -1.0, 1.0, -p_att)
    elif p_rep > p_att:
        n = MobiusMatrix.from_entries(1.0, -p_rep, 1.0, -p_att)
    else:
        n = MobiusMatrix.from_entries(-1.0, p_rep, 1.0, -p_att)
    conj = n @ m @ n.inverse()
    if abs(conj.a) < 1.0:  # safety: ensure e^(l/2) sits in the top corner
        flip = MobiusMatrix.from_entries(0.0, -1.0, 1.0, 0.0)
        n = flip @ n
    return n, ell


def fractional_power(m: MobiusMatrix, t: float) -> MobiusMatrix:
    """m^t for hyperbolic m, via conjugation to the standard axis form."""
    n, ell = standard_form(m)
    half = math.exp(0.5 * t * ell)
    d = MobiusMatrix(half, 0.0, 0.0, 1.0 / half)
    return n.inverse() @ d @ n


# ---------------------------------------------------------------------------
# Projective circles and the inversive product
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveCircle:
    """Projective 4-vector for a circle/line in the extended plane."""

    a0: float
    a1: float
    a2: float
    a3: float

    def vector(self):
        return (self.a0, self.a1, self.a2, self.a3)

    def q_self(self) -> float:
        return q_form(self, self)

    def normalized(self) -> "ProjectiveCircle":
        """Scale so that the self-product equals 2 (genuine circles only)."""
        qs = self.q_self()
        if qs <= 0:
            raise DegenerateInputError(f"cannot normalize circle with q(a,a) = {qs}")
        s = math.sqrt(2.0 / qs)
        return ProjectiveCircle(self.a0 * s, self.a1 * s, self.a2 * s, self.a3 * s)

    def scaled(self, factor: float) -> "ProjectiveCircle":
        return ProjectiveCircle(
            self.a0 * factor, self.a1 * factor, self.a2 * factor, self.a3 * factor
        )


def q_form(s: ProjectiveCircle, t: ProjectiveCircle) -> float:
    """Bilinear form q(a, b) = 2(a1 b1 + a2 b2) - a0 b3 - a3 b0."""
    return 2.0 * (s.a1 * t.a1 + s.a2 * t.a2) - s.a0 * t.a3 - s.a3 * t.a0


def inversive_product(s: ProjectiveCircle, t: ProjectiveCircle) -> float:
    """|q(a,b)| / sqrt(|q(a,a)| |q(b,b)|); equals cosh d for disjoint geodesics."""
    qs = q_form(s, s)
    qt = q_form(t, t)
    if qs == 0.0 or qt == 0.0:
        raise DegenerateInputError("inversive product of a degenerate sphere")
    return abs(q_form(s, t)) / math.sqrt(abs(qs) * abs(qt))


def geodesic_from_endpoints(p, q) -> ProjectiveCircle:
    """Geodesic of the upper half-plane with boundary endpoints p, q.

    Either endpoint may be INF, giving a vertical line."""
    if p == q:
        raise DegenerateInputError("geodesic endpoints must be distinct")
    if p == INF or q == INF:
        v = q if p == INF else p
        return ProjectiveCircle(0.0, 1.0, 0.0, 2.0 * v)
    lo, hi = (p, q) if p < q else (q, p)
    center = 0.5 * (lo + hi)
    radius = 0.5 * (hi - lo)
    return ProjectiveCircle(1.0, center, 0.0, center * center - radius * radius).normalized()


def geodesic_endpoints(circle: ProjectiveCircle) -> Tuple[float, float]:
    """Boundary endpoints of a geodesic stored as a projective circle."""
    if abs(circle.a0) < 1e-14 * max(abs(circle.a1), 1.0):
        if circle.a1 == 0.0:
            raise DegenerateInputError("circle vector does not describe a geodesic")
        v = 0.5 * circle.a3 / circle.a1
        return (v, INF)
    center = circle.a1 / circle.a0
    rad_sq = center * center - circle.a3 / circle.a0
    if rad_sq <= 0:
        raise DegenerateInputError("imaginary circle has no boundary endpoints")
    r = math.sqrt(rad_sq)
    return (center - r, center + r)


def apply_mobius_to_geodesic(m: MobiusMatrix, circle: ProjectiveCircle) -> ProjectiveCircle:
    p, q = geodesic_endpoints(circle)
    return geodesic_from_endpoints(m.apply(p), m.apply(q))


def reflection(circle: ProjectiveCircle):
    """Reflection in a geodesic, as the real matrix of the anti-Mobius map.

    The reflection acts by z -> (a conj(z) + b) / (c conj(z) + d); composing
    two reflections multiplies their matrices and yields a MobiusMatrix.
    """
    p, q = geodesic_endpoints(circle)
    if q == INF:
        # reflection in the vertical line x = p: z -> -conj(z) + 2p
        return (-1.0, 2.0 * p, 0.0, 1.0)
    center = 0.5 * (p + q)
    radius = 0.5 * abs(q - p)
    # z -> center + radius^2 / conj(z - center)
    return (
        center / radius,
        (radius * radius - center * center) / radius,
        1.0 / radius,
        -center / radius,
    )


def compose_reflections(r1, r2) -> MobiusMatrix:
    """Mobius matrix of the composition (reflection r1) o (reflection r2)."""
    a1, b1, c1, d1 = r1
    a2, b2, c2, d2 = r2
    return MobiusMatrix.from_entries(
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )


# ---------------------------------------------------------------------------
# Cylinder models X_ell
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderPoint:
    """Point (x, a) in a cylinder model; x is mod 1 on quotients."""

    x: float
    a: float


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"empty interval ({self.lower}, {self.upper})")


def collar_interval(t: float) -> Interval:
    """Symmetric collar interval A(t) in the height coordinate."""
    if t < 0:
        raise DomainError("collar parameter must be non-negative")
    if t == 0.0:
        return Interval(-1.0, 1.0)
    half = t / (2.0 * math.sinh(0.5 * t))
    return Interval(-half, half)


def _check_point(ell: float, p: CylinderPoint):
    if ell < 0:
        raise DomainError("cylinder parameter must be non-negative")
    if ell == 0.0 and p.a == 0.0:
        raise DomainError("X_0 excludes the axis a = 0")


def sigma(ell: float, p1: CylinderPoint, p2: CylinderPoint) -> float:
    """Chordal invariant 2(cosh d - 1) between two points of X_ell.

    For ell = 0 and points in different components returns +infinity.
    """
    _check_point(ell, p1)
    _check_point(ell, p2)
    dx = p1.x - p2.x
    a1, a2 = p1.a, p2.a
    if ell == 0.0:
        if a1 * a2 < 0.0:
            return INF
        return (a1 - a2) ** 2 / (a1 * a2) + a1 * a2 * dx * dx
    s1 = math.sqrt(ell * ell + a1 * a1)
    s2 = math.sqrt(ell * ell + a2 * a2)
    if ell * abs(dx) > 700.0:
        return INF  # sinh^2 overflows double precision; the distance is astronomical
    # 2 sinh^2(ell dx / 2) / ell^2 is the stable form of (cosh(ell dx) - 1)/ell^2
    first = 2.0 * math.sinh(0.5 * ell * dx) ** 2 / (ell * ell) * s1 * s2
    if a1 * a2 > 0.0:
        # rationalized to avoid the catastrophic cancellation at small ell
        second = (ell * ell + a1 * a1 + a2 * a2) / (s1 * s2 + a1 * a2)
    else:
        second = (s1 * s2 - a1 * a2) / (ell * ell)
    return 2.0 * (first + second - 1.0)


def distance(ell: float, p1: CylinderPoint, p2: CylinderPoint) -> float:
    """Hyperbolic distance arcosh(1 + sigma/2)."""
    s = sigma(ell, p1, p2)
    if s == INF:
        return INF
    return math.acosh(1.0 + 0.5 * s)


def model_to_halfplane(ell: float, p: CylinderPoint) -> Tuple[float, float]:
    """Isometry of X_ell (ell > 0) onto the upper half-plane.

    The ell = 0 components have their own charts, see ``cusp_to_halfplane``.
    """
    if ell <= 0:
        raise DomainError("model_to_halfplane requires ell > 0; use cusp_to_halfplane")
    s = math.sqrt(ell * ell + p.a * p.a)
    factor = math.exp(ell * p.x)
    return (factor * p.a / s, factor * ell / s)


def cusp_to_halfplane(p: CylinderPoint) -> Tuple[float, float]:
    """Chart (x, a) -> (x, +-1/a) sending either component of X_0 to v > 0."""
    if p.a == 0.0:
        raise DomainError("X_0 excludes the axis a = 0")
    return (p.x, 1.0 / p.a) if p.a > 0 else (p.x, -1.0 / p.a)


def halfplane_distance(u1, v1, u2, v2) -> float:
    """Distance in the upper half-plane model (independent oracle form)."""
    if v1 <= 0 or v2 <= 0:
        raise DomainError("half-plane points need positive height")
    return math.acosh(1.0 + ((u1 - u2) ** 2 + (v1 - v2) ** 2) / (2.0 * v1 * v2))


# ---------------------------------------------------------------------------
# Right-angled hexagons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hexagon:
    """Geodesic configuration attached to a triple of boundary lengths.

    T[i] passes through the anchor v_(i+1) and realizes
    cosh d(T_(i+1), T_(i+2)) = cosh(lengths[i] / 2); L[i] joins the other two
    anchors.  Anchors are fixed at (v1, v2, v3) = (0, 1, infinity).
    """

    lengths: Tuple[float, float, float]
    m: float
    T: Tuple[ProjectiveCircle, ProjectiveCircle, ProjectiveCircle]
    L: Tuple[ProjectiveCircle, ProjectiveCircle, ProjectiveCircle]
    cosh_TL: Tuple[float, float, float]


def hexagon_radical(l1: float, l2: float, l3: float) -> float:
    """The auxiliary radical m(l1, l2, l3)."""
    c1 = math.cosh(0.5 * l1)
    c2 = math.cosh(0.5 * l2)
    c3 = math.cosh(0.5 * l3)
    return math.sqrt(c1 * c1 + c2 * c2 + c3 * c3 + 2.0 * c1 * c2 * c3 - 1.0)


def hexagon(l1: float, l2: float, l3: float) -> Hexagon:
    """Realize the geodesics T_i, L_i for boundary data (l1, l2, l3)."""
    if min(l1, l2, l3) < 0:
        raise DomainError("hexagon lengths must be non-negative")
    lengths = (l1, l2, l3)
    c = [math.cosh(0.5 * l) for l in lengths]
    m = hexagon_radical(l1, l2, l3)
    # cosh d(T_i, L_i) per the closed form; indices are cyclic in {0,1,2}
    r = [
        (m + c[(i + 2) % 3] - c[(i + 1) % 3]) / (c[i] + 1.0)
        for i in range(3)
    ]
    # anchors (v1, v2, v3) = (0, 1, INF):
    #   L1 joins v2, v3; L2 joins v3, v1; L3 joins v1, v2
    big_l = (
        geodesic_from_endpoints(1.0, INF),
        geodesic_from_endpoints(0.0, INF),
        geodesic_from_endpoints(0.0, 1.0),
    )
    # T1 through v1 = 0 inside L3; T2 through v2 = 1 beyond L1; T3 through INF
    u = 2.0 / (r[0] + 1.0)
    t1 = geodesic_from_endpoints(0.0, u)
    if r[1] > 1.0:
        w = 2.0 / (r[1] - 1.0)
        t2 = geodesic_from_endpoints(1.0, 1.0 + w)
    else:
        t2 = geodesic_from_endpoints(1.0, INF)
    v = 0.5 * (1.0 - r[2])
    t3 = geodesic_from_endpoints(v, INF)
    return Hexagon(lengths, m, (t1, t2, t3), big_l, tuple(r))
