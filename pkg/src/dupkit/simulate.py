"""Seeded Monte Carlo and exact quadrature for expected auction revenue.

Randomness is counter-based: the uniform for (seed, sample, bidder) is a
hash of those three numbers, so any slice of samples can be generated on any
worker and estimates are bit-identical for every worker count.  It also
couples comparisons pathwise: the same bidder index sees the same values in
two environments run with the same seed.

Quadrature integrates Pr[at least r bids >= t] over t via the substitution
t = u/(1-u), which compresses the heavy 1/t^2 tails of unbounded curves onto
[0,1]; the integrand at each node is an exact Poisson-binomial tail.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import curves as cv
from .analysis import poisson_binomial
from .errors import (
    DomainError,
    NonConvergence,
    ProfileMismatch,
    UnboundedExpectation,
)
from .mechanisms import NO_CONSTRAINT, PairConstraint

PLAIN = "plain"
MEDIAN_OF_MEANS = "median_of_means"

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_SEED_MIX = _U64(0xD1342543DE82EF95)
_BIDDER_MIX = _U64(0x9E6C63D0876A9A63)
_MASK = (1 << 64) - 1

_CHUNK = 1 << 16


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    estimator: str
    blocks: int = 0


def _sm64(z):
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def uniforms(seed: int, bidder: int, lo: int, hi: int) -> np.ndarray:
    """U[0,1) draws for one bidder substream over sample counters [lo, hi)."""
    with np.errstate(over="ignore"):
        stream = _sm64(_U64(seed & _MASK) * _SEED_MIX ^ _U64(bidder + 1) * _BIDDER_MIX)
        counters = np.arange(lo, hi, dtype=np.uint64)
        z = _sm64(stream + _GOLDEN * counters)
    return (z >> _U64(11)).astype(np.float64) * (2.0**-53)


class _Sampler:
    """Per-curve vectorized tables: values from quantiles, slopes at quantiles."""

    def __init__(self, curve: cv.RevenueCurve):
        self.curve = curve
        self.unbounded = cv.is_unbounded(curve)
        self.scale = curve.scale
        if not self.unbounded:
            self.qs = np.array([q for q, _ in curve.breakpoints])
            self.rs = np.array([r for _, r in curve.breakpoints])
            self.slopes = np.diff(self.rs) / np.diff(self.qs)

    def values(self, u: np.ndarray) -> np.ndarray:
        q = np.maximum(u, cv.EPS_MIN)
        if self.unbounded:
            return self.scale * (1.0 - q) / q
        j = np.clip(np.searchsorted(self.qs, q, side="right") - 1, 0, len(self.slopes) - 1)
        return (self.rs[j] + self.slopes[j] * (q - self.qs[j])) / q

    def phi(self, u: np.ndarray) -> np.ndarray:
        """Revenue-curve slope at quantile max(u, EPS_MIN): the virtual value."""
        if self.unbounded:
            return np.full(u.shape, -self.scale)
        q = np.maximum(u, cv.EPS_MIN)
        j = np.clip(np.searchsorted(self.qs, q, side="right") - 1, 0, len(self.slopes) - 1)
        return self.slopes[j]

    def win_region_edge(self, strict: np.ndarray, weak: np.ndarray) -> np.ndarray:
        """Largest quantile whose slope is >= 0, > strict, and >= weak.

        Slopes are a non-increasing step function of q, so each condition
        admits a prefix of segments; the edge is the left endpoint of the
        first segment failing any of them.
        """
        neg = -self.slopes  # ascending
        j_nonneg = np.searchsorted(neg, 0.0, side="right")
        j_strict = np.searchsorted(neg, -np.asarray(strict), side="left")
        j_weak = np.searchsorted(neg, -np.asarray(weak), side="right")
        j = np.minimum(np.minimum(j_strict, j_weak), j_nonneg)
        return self.qs[j]


def _second_highest(v: np.ndarray) -> np.ndarray:
    if v.shape[0] < 2:
        return np.zeros(v.shape[1])
    return np.partition(v, v.shape[0] - 2, axis=0)[-2]


def _rev_spa(samplers, constraint, u, params):
    v = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])
    return _second_highest(v)


def _rev_vcg_k(samplers, constraint, u, params):
    k = params["k"]
    v = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])
    n = v.shape[0]
    if n <= k:
        return np.zeros(v.shape[1])
    price = np.partition(v, n - k - 1, axis=0)[n - k - 1]
    return k * price


def _rev_vcg_constrained(samplers, constraint, u, params):
    k = params["k"]
    n = len(samplers)
    partner = constraint.partner(n)
    v = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])
    # Pool one entry per pair (its max; the min is the within-pair rival)
    # and one per unpaired bidder (rival 0).  Top-k pool entries win and
    # each pays the larger of the (k+1)-st pool value and its rival.
    rows = []
    rivals = []
    for i in range(n):
        j = partner[i]
        if j < 0:
            rows.append(v[i])
            rivals.append(np.zeros(v.shape[1]))
        elif i < j:
            rows.append(np.maximum(v[i], v[j]))
            rivals.append(np.minimum(v[i], v[j]))
    pool = np.stack(rows)
    rival = np.stack(rivals)
    m = pool.shape[0]
    if m <= k:
        return rival.sum(axis=0)
    thr = np.partition(pool, m - k - 1, axis=0)[m - k - 1]
    order = np.argsort(-pool, axis=0, kind="stable")[:k]
    win_rival = np.take_along_axis(rival, order, axis=0)
    return np.maximum(win_rival, thr[None, :]).sum(axis=0)


def _rev_myerson(samplers, constraint, u, params):
    n = len(samplers)
    m = u.shape[1]
    phi = np.stack([s.phi(u[i]) for i, s in enumerate(samplers)])
    win = np.argmax(phi, axis=0)
    cols = np.arange(m)
    win_phi = phi[win, cols]
    sold = win_phi >= 0.0
    rows = np.arange(n)[:, None]
    strict = np.where(rows < win[None, :], phi, -np.inf).max(axis=0)
    weak = np.where(rows > win[None, :], phi, -np.inf).max(axis=0)
    v_win = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])[win, cols]
    out = np.zeros(m)
    for i, s in enumerate(samplers):
        sel = sold & (win == i)
        if not sel.any() or s.unbounded:
            continue
        q_pay = s.win_region_edge(strict[sel], weak[sel])
        out[sel] = np.minimum(s.values(q_pay), v_win[sel])
    return out


def _rev_lookahead(samplers, constraint, u, params):
    v = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])
    reserves = np.array([cv.monopoly_reserve(s.curve) for s in samplers])
    top = np.argmax(v, axis=0)
    cols = np.arange(v.shape[1])
    top_val = v[top, cols]
    second = _second_highest(v)
    price = np.maximum(second, reserves[top])
    # an atom draw equals its own reserve only up to float rounding, so the
    # acceptance test is tolerant and the payment capped, as in the scalar
    sold = top_val >= price * (1.0 - 1e-12)
    return np.where(sold, np.minimum(price, top_val), 0.0)


def _rev_spald(samplers, constraint, u, params):
    seed = params["seed"]
    lo, hi = params["range"]
    n = len(samplers)
    v = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])
    top = np.argmax(v, axis=0)
    cols = np.arange(v.shape[1])
    top_val = v[top, cols]
    second = _second_highest(v)
    # The duplicate of bidder j draws substream n+j: the same uniform its
    # clone would get under an every-bidder-once extension, which couples
    # this mechanism under the duplicate SPA pathwise.
    dup = np.stack([s.values(uniforms(seed, n + j, lo, hi)) for j, s in enumerate(samplers)])
    dup_val = dup[top, cols]
    return np.minimum(np.maximum(second, dup_val), top_val)


def _rev_posted(samplers, constraint, u, params):
    prices = np.asarray(params["prices"], dtype=np.float64)
    if len(prices) != len(samplers):
        raise ProfileMismatch(f"{len(prices)} prices for {len(samplers)} bidders")
    v = np.stack([s.values(u[i]) for i, s in enumerate(samplers)])
    meets = v >= prices[:, None]
    first = np.argmax(meets, axis=0)
    cols = np.arange(v.shape[1])
    sold = meets[first, cols]
    return np.where(sold, prices[first], 0.0)


_MECHANISMS = {
    "spa": _rev_spa,
    "vcg": _rev_vcg_k,
    "vcg_constrained": _rev_vcg_constrained,
    "myerson": _rev_myerson,
    "lookahead": _rev_lookahead,
    "spald": _rev_spald,
    "posted": _rev_posted,
}


def mechanism_names() -> tuple:
    return tuple(sorted(_MECHANISMS))


def sample_revenues(
    profile: cv.BidderProfile,
    constraint: PairConstraint,
    mechanism: str,
    n_samples: int,
    seed: int,
    workers: int = 0,
    **params,
) -> np.ndarray:
    """Per-sample revenue array; the estimators above are views over this."""
    if mechanism not in _MECHANISMS:
        raise DomainError(f"unknown mechanism {mechanism!r}; use one of {mechanism_names()}")
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if constraint is None:
        constraint = NO_CONSTRAINT
    kernel = _MECHANISMS[mechanism]
    samplers = [_Sampler(c) for c in profile.curves]
    out = np.empty(n_samples)

    def fill(lo: int, hi: int) -> None:
        u = np.stack([uniforms(seed, i, lo, hi) for i in range(profile.n)])
        p = dict(params, seed=seed, range=(lo, hi))
        out[lo:hi] = kernel(samplers, constraint, u, p)

    spans = [(lo, min(lo + _CHUNK, n_samples)) for lo in range(0, n_samples, _CHUNK)]
    if workers and workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda ab: fill(*ab), spans))
    else:
        for lo, hi in spans:
            fill(lo, hi)
    return out


def _default_estimator(profile: cv.BidderProfile) -> str:
    return MEDIAN_OF_MEANS if cv.has_unbounded(profile) else PLAIN


def _summarize(rev: np.ndarray, seed: int, estimator: str) -> Estimate:
    n = rev.shape[0]
    if estimator == PLAIN:
        mean = float(rev.mean())
        stderr = float(rev.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return Estimate(mean, stderr, n, seed, PLAIN)
    if estimator == MEDIAN_OF_MEANS:
        blocks = math.isqrt(n - 1) + 1 if n > 1 else 1
        means = np.array([b.mean() for b in np.array_split(rev, blocks)])
        mean = float(np.median(means))
        stderr = float(means.std(ddof=1) / math.sqrt(blocks)) if blocks > 1 else 0.0
        return Estimate(mean, stderr, n, seed, MEDIAN_OF_MEANS, blocks)
    raise DomainError(f"unknown estimator {estimator!r}")


def estimate_revenue(
    profile: cv.BidderProfile,
    constraint: PairConstraint,
    mechanism: str,
    n_samples: int,
    seed: int,
    estimator: str = "",
    workers: int = 0,
    **params,
) -> Estimate:
    """Monte Carlo expected revenue, reproducible from (inputs, seed) alone.

    The estimator defaults to median-of-means on ceil(sqrt(n)) blocks when
    any curve has unbounded support (their order statistics have heavy
    tails and plain CLT error bars are untrustworthy), else plain mean.
    """
    rev = sample_revenues(profile, constraint, mechanism, n_samples, seed, workers, **params)
    return _summarize(rev, seed, estimator or _default_estimator(profile))


def paired_compare(
    profile_a: cv.BidderProfile,
    profile_b: cv.BidderProfile,
    constraint_a: PairConstraint,
    constraint_b: PairConstraint,
    mechanism: str,
    n_samples: int,
    seed: int,
    estimator: str = "",
    workers: int = 0,
    **params,
) -> Estimate:
    """Estimate of E[rev_a - rev_b] under common random numbers.

    Bidder i draws the same uniforms in both environments, so comparisons
    that hold pathwise (adding a bidder to a second-price auction, say)
    show up with zero or tiny variance instead of two fat error bars.
    """
    if profile_a.curves[0] != profile_b.curves[0]:
        raise ProfileMismatch("profiles must share a common original prefix")
    rev_a = sample_revenues(profile_a, constraint_a, mechanism, n_samples, seed, workers, **params)
    rev_b = sample_revenues(profile_b, constraint_b, mechanism, n_samples, seed, workers, **params)
    est = estimator or (
        MEDIAN_OF_MEANS
        if cv.has_unbounded(profile_a) or cv.has_unbounded(profile_b)
        else PLAIN
    )
    return _summarize(rev_a - rev_b, seed, est)


def _tail_prob(profile: cv.BidderProfile, r: int, t: float) -> float:
    probs = [cv.quantile_of_value(c, t) for c in profile.curves]
    return poisson_binomial(probs).tail_at_least(r)


def _adaptive_simpson(g, a, b, fa, fm, fb, whole, tol, depth):
    if depth > 50:
        raise NonConvergence("quadrature failed to reach tolerance")
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = g(lm), g(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _adaptive_simpson(g, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) + _adaptive_simpson(
        g, m, b, fm, frm, fb, right, tol / 2.0, depth + 1
    )


def expected_order_stat(profile: cv.BidderProfile, r: int, tol: float = 1e-8) -> float:
    """E[r-th highest value] = integral of Pr[at least r values >= t] dt.

    Exact up to quadrature tolerance: the tail probability at each node is
    an exact Poisson-binomial computation, and integration panels split at
    every kink value so the integrand is smooth inside each panel.
    """
    if r < 1:
        raise DomainError(f"rank must be >= 1, got {r}")
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    if r > profile.n:
        return 0.0
    if r == 1 and cv.has_unbounded(profile):
        raise UnboundedExpectation("the maximum of an unbounded-support profile has no mean")

    er_scales = [c.scale for c in profile.curves if cv.is_unbounded(c)]
    if r == 2 and len(er_scales) >= 2:
        total = math.fsum(er_scales)
        limit_at_one = 0.5 * (total * total - math.fsum(s * s for s in er_scales))
    else:
        limit_at_one = 0.0

    def g(x: float) -> float:
        if x >= 1.0:
            return limit_at_one
        t = x / (1.0 - x)
        return _tail_prob(profile, r, t) / ((1.0 - x) * (1.0 - x))

    cuts = {0.0, 1.0}
    for c in profile.curves:
        for v in cv.kink_values(c):
            cuts.add(v / (1.0 + v))
    grid = sorted(cuts)
    panel_tol = tol / (len(grid) - 1)
    total = 0.0
    for a, b in zip(grid, grid[1:]):
        # tail() jumps at atom values, which is exactly where the cuts sit;
        # endpoint nodes are nudged into the panel interior so each panel
        # integrates its own smooth piece (one-sided limits at the cuts).
        shift = (b - a) * 1e-9
        fa, fb = g(a + shift), g(b - shift)
        m = 0.5 * (a + b)
        fm = g(m)
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        total += _adaptive_simpson(g, a, b, fa, fm, fb, whole, panel_tol, 0)
    return total


def mechanism_revenue_quadrature(profile: cv.BidderProfile, k: int = 1, tol: float = 1e-8) -> float:
    """Exact expected revenue of the k-item uniform-price auction.

    Every winner pays the (k+1)-st highest value, so revenue is k times
    that order statistic's mean.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if profile.n < k + 1:
        raise DomainError(f"need at least k+1={k + 1} bidders, got {profile.n}")
    return k * expected_order_stat(profile, k + 1, tol)
