"""Concave revenue curves on quantile space.

A curve maps a sale probability q in [0,1] to the expected revenue
Rev(q) = q * F^{-1}(1-q) of posting the price that sells with probability q.
Regularity of the underlying value distribution is exactly concavity of this
curve, so every query (value, quantile-of-value, virtual value, monopoly
point, sampling) reduces to piecewise-linear algebra on breakpoints, with two
analytic kinds layered on top:

* ``point_mass`` at v: Rev(q) = q*v.
* ``equal_revenue`` with parameter ``scale``: the distribution
  F(v) = 1 - 1/(v/scale + 1), giving Rev(q) = scale*(1-q) on (0,1].  Its
  support is unbounded and Rev jumps at q=0 (sup Rev = scale is attained only
  in the limit q -> 0), so the ``EPS_MIN`` quantile floor below stands in for
  that limit wherever a concrete number is needed.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import ConcavityViolation, DomainError

# Smallest representable quantile: unbounded-support curves are clamped here
# when a limiting q -> 0 quantity must be materialized.
EPS_MIN = 1e-12

TRIANGLE = "triangle"
PIECEWISE = "piecewise"
POINT_MASS = "point_mass"
EQUAL_REVENUE = "equal_revenue"

# Slack used when validating concavity of user-supplied breakpoints.
_SLOPE_TOL = 1e-9


@dataclass(frozen=True)
class RevenueCurve:
    """Immutable revenue curve; build via the make_* constructors."""

    kind: str
    breakpoints: tuple[tuple[float, float], ...]
    scale: float = 0.0  # equal_revenue parameter, 0 otherwise

    def __post_init__(self) -> None:
        if self.kind not in (TRIANGLE, PIECEWISE, POINT_MASS, EQUAL_REVENUE):
            raise DomainError(f"unknown curve kind {self.kind!r}")


@dataclass(frozen=True)
class BidderProfile:
    """Ordered bidders; indices are the stable identities used everywhere."""

    curves: tuple[RevenueCurve, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.curves) == 0:
            raise DomainError("profile must contain at least one bidder")
        if self.names is not None and len(self.names) != len(self.curves):
            raise DomainError("names length must match curves length")

    @property
    def n(self) -> int:
        return len(self.curves)


def make_profile(curves, names=None) -> BidderProfile:
    return BidderProfile(tuple(curves), None if names is None else tuple(names))


def make_triangle(peak_q: float, peak_r: float) -> RevenueCurve:
    """Curve with vertices (0,0), (peak_q, peak_r), (1,0).

    peak_q = 1 encodes a point mass at value peak_r (the top vertex absorbs
    the falling edge), so Rev(1) = peak_r > 0 is allowed for that case only.
    """
    if not (0.0 < peak_q <= 1.0):
        raise DomainError(f"peak_q must be in (0,1], got {peak_q}")
    if not peak_r > 0.0:
        raise DomainError(f"peak_r must be positive, got {peak_r}")
    if peak_q == 1.0:
        points = ((0.0, 0.0), (1.0, float(peak_r)))
    else:
        points = ((0.0, 0.0), (float(peak_q), float(peak_r)), (1.0, 0.0))
    return RevenueCurve(TRIANGLE, points)


def make_point_mass(v: float) -> RevenueCurve:
    """Deterministic value v >= 0 (v=0 gives the worthless bidder)."""
    if v < 0.0:
        raise DomainError(f"point mass value must be >= 0, got {v}")
    return RevenueCurve(POINT_MASS, ((0.0, 0.0), (1.0, float(v))))


def make_equal_revenue(scale: float) -> RevenueCurve:
    if not scale > 0.0:
        raise DomainError(f"equal_revenue scale must be positive, got {scale}")
    # Breakpoints record the linear branch Rev(q) = scale*(1-q) on (0,1].
    return RevenueCurve(
        EQUAL_REVENUE, ((0.0, float(scale)), (1.0, 0.0)), scale=float(scale)
    )


def make_piecewise(points) -> RevenueCurve:
    """Validated concave piecewise-linear curve through the given (q, R)."""
    pts = [(float(q), float(r)) for q, r in points]
    if len(pts) < 2:
        raise DomainError("need at least two breakpoints")
    if pts[0][0] != 0.0 or pts[-1][0] != 1.0:
        raise DomainError("breakpoints must start at q=0 and end at q=1")
    if abs(pts[0][1]) > 1e-15:
        raise DomainError("Rev(0) must be 0")
    pts[0] = (0.0, 0.0)
    prev_slope = math.inf
    for j in range(1, len(pts)):
        q0, r0 = pts[j - 1]
        q1, r1 = pts[j]
        if not (0.0 <= q1 <= 1.0):
            raise DomainError(f"breakpoint {j} has q={q1} outside [0,1]")
        if r1 < 0.0:
            raise DomainError(f"breakpoint {j} has negative revenue {r1}")
        if q1 <= q0:
            raise DomainError(f"breakpoint {j} has non-increasing q ({q0} -> {q1})")
        slope = (r1 - r0) / (q1 - q0)
        if slope > prev_slope + _SLOPE_TOL * max(1.0, abs(prev_slope)):
            raise ConcavityViolation(
                f"chord slope increases at breakpoint {j} (q={q1}): "
                f"{prev_slope:.6g} -> {slope:.6g}"
            )
        prev_slope = slope
    return RevenueCurve(PIECEWISE, tuple(pts))


def is_unbounded(curve: RevenueCurve) -> bool:
    """True when the value support has no finite upper end."""
    return curve.kind == EQUAL_REVENUE


def has_unbounded(profile: BidderProfile) -> bool:
    return any(is_unbounded(c) for c in profile.curves)


def _qs(curve: RevenueCurve) -> tuple[float, ...]:
    return tuple(p[0] for p in curve.breakpoints)


def segments(curve: RevenueCurve):
    """Per-segment data (q_lo, q_hi, slope, c) with value(q) = slope + c/q.

    For the equal_revenue kind the single entry covers (0, 1] with the
    closed-form branch; for everything else the list follows breakpoints.
    """
    if curve.kind == EQUAL_REVENUE:
        return [(0.0, 1.0, -curve.scale, curve.scale)]
    out = []
    bp = curve.breakpoints
    for j in range(1, len(bp)):
        q0, r0 = bp[j - 1]
        q1, r1 = bp[j]
        slope = (r1 - r0) / (q1 - q0)
        out.append((q0, q1, slope, r0 - slope * q0))
    return out


def rev(curve: RevenueCurve, q: float) -> float:
    """Revenue at sale probability q, exact at breakpoints."""
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"q={q} outside [0,1]")
    if curve.kind == EQUAL_REVENUE:
        return 0.0 if q == 0.0 else curve.scale * (1.0 - q)
    bp = curve.breakpoints
    qs = _qs(curve)
    j = min(max(bisect_right(qs, q) - 1, 0), len(bp) - 2)
    q0, r0 = bp[j]
    q1, r1 = bp[j + 1]
    return r0 + (r1 - r0) * (q - q0) / (q1 - q0)


def value(curve: RevenueCurve, q: float, allow_infinite: bool = False) -> float:
    """Posted price selling with probability q, i.e. Rev(q)/q.

    At q=0 the limiting value is returned for bounded curves; unbounded
    curves raise DomainError there unless ``allow_infinite`` asks for inf.
    """
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"q={q} outside [0,1]")
    if q == 0.0:
        if curve.kind == EQUAL_REVENUE:
            if allow_infinite:
                return math.inf
            raise DomainError("value at q=0 is infinite for unbounded support")
        (q0, r0), (q1, r1) = curve.breakpoints[0], curve.breakpoints[1]
        return (r1 - r0) / (q1 - q0)
    if curve.kind == EQUAL_REVENUE:
        return curve.scale * (1.0 - q) / q
    return rev(curve, q) / q


def quantile_of_value(curve: RevenueCurve, v: float) -> float:
    """Sale probability q(v) = Pr[value >= v]: largest q with value(q) >= v."""
    if v < 0.0:
        raise DomainError(f"value must be >= 0, got {v}")
    if curve.kind == EQUAL_REVENUE:
        return curve.scale / (v + curve.scale)
    segs = segments(curve)
    # value(1) is the floor of the value range; the limit at q -> 0 its ceiling
    if v <= value(curve, 1.0):
        return 1.0
    if v > value(curve, 0.0):
        return 0.0
    for q0, q1, slope, c in segs:
        v_hi = slope + c / q1  # value at the right end, the segment minimum
        if v > v_hi:
            # v==slope cannot occur here: that needs c==0, making the
            # segment's value constant and v > v_hi == slope impossible.
            return c / (v - slope)
    return 1.0


def quantile_lower_of_value(curve: RevenueCurve, v: float) -> float:
    """Smallest q with value(q) <= v, i.e. Pr[value > v] = 1 - F(v).

    Together with quantile_of_value this brackets the quantile interval a
    bid can occupy; the two differ exactly when v carries an atom.  Values
    below the support floor clamp to 1.
    """
    if v < 0.0:
        raise DomainError(f"value must be >= 0, got {v}")
    if curve.kind == EQUAL_REVENUE:
        return curve.scale / (v + curve.scale)
    if v >= value(curve, 0.0):
        return 0.0
    if v < value(curve, 1.0):
        return 1.0
    for q0, q1, slope, c in segments(curve):
        v_hi = slope + c / q1
        if v >= v_hi:
            # value exceeds v on [q0, q) only; c>0 because a c==0 segment
            # has constant value equal to its left endpoint's, already > v.
            return c / (v - slope)
    return 1.0


def monopoly(curve: RevenueCurve) -> tuple[float, float]:
    """Peak of the curve as (q*, R*); ties resolve to the smallest q.

    The equal_revenue supremum sits at q -> 0, reported as (EPS_MIN, scale).
    """
    if curve.kind == EQUAL_REVENUE:
        return (EPS_MIN, curve.scale)
    best_q, best_r = curve.breakpoints[0]
    for q, r in curve.breakpoints[1:]:
        if r > best_r:
            best_q, best_r = q, r
    return (best_q, best_r)


def monopoly_reserve(curve: RevenueCurve) -> float:
    """Price attaining the monopoly revenue: value at the curve's peak."""
    q_star, _ = monopoly(curve)
    return value(curve, max(q_star, EPS_MIN))


def virtual_value(curve: RevenueCurve, q: float) -> float:
    """Right-derivative of Rev at q in (0,1); kinks resolve rightward."""
    if not (0.0 < q < 1.0):
        raise DomainError(f"virtual value defined on (0,1), got q={q}")
    return slope_at(curve, q)


def slope_at(curve: RevenueCurve, q: float) -> float:
    """Right-derivative extended to [0,1] (q=1 uses the final slope)."""
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"q={q} outside [0,1]")
    if curve.kind == EQUAL_REVENUE:
        return -curve.scale
    qs = _qs(curve)
    j = min(max(bisect_right(qs, q) - 1, 0), len(qs) - 2)
    q0, r0 = curve.breakpoints[j]
    q1, r1 = curve.breakpoints[j + 1]
    return (r1 - r0) / (q1 - q0)


def sample_value(curve: RevenueCurve, u: float) -> float:
    """Inverse-quantile sample: the value at quantile max(u, EPS_MIN).

    Quantiles of i.i.d. draws are uniform, so feeding u ~ U[0,1) here draws
    from the curve's distribution; the clamp keeps unbounded curves finite.
    """
    if not (0.0 <= u < 1.0):
        raise DomainError(f"uniform draw must be in [0,1), got {u}")
    return value(curve, max(u, EPS_MIN))


def kink_values(curve: RevenueCurve) -> tuple[float, ...]:
    """Finite values where q(v) kinks or jumps (atom and breakpoint values).

    Quadrature splits integration panels here so each panel is smooth.
    """
    if curve.kind == EQUAL_REVENUE:
        return (curve.scale,)
    vals = {value(curve, 0.0)}
    for q, _ in curve.breakpoints[1:]:
        vals.add(value(curve, q))
    return tuple(sorted(v for v in vals if v > 0.0))


def rev_dominates(a: RevenueCurve, b: RevenueCurve, grid: int = 257) -> bool:
    """Pointwise Rev_a >= Rev_b on (0,1], checked at breakpoints and a grid.

    Both curves are piecewise-linear between the merged breakpoints, so the
    check there is exact up to float noise.
    """
    qs = {EPS_MIN, 1.0}
    qs.update(q for q, _ in a.breakpoints if q > 0.0)
    qs.update(q for q, _ in b.breakpoints if q > 0.0)
    qs.update((j + 1) / grid for j in range(grid - 1))
    return all(rev(a, q) >= rev(b, q) - 1e-12 for q in qs)
