"""Duplicate environments and selection rules for whom to duplicate.

A plan says which bidders get cloned; extend_profile materializes the clones
(appended after the originals) and, when asked, the original/clone pair
constraint.  Selection rules pick the bidder to duplicate from different
amounts of information: a revenue-curve quantile, a noisy oracle for it, or
a single sample per bidder.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import curves as cv
from .errors import DomainError
from .mechanisms import PairConstraint

SINGLE_OF = "single_of"
K_COPIES_OF = "k_copies_of"
SET_ONCE = "set_once"
ALL_ONCE = "all_once"


@dataclass(frozen=True)
class DuplicatePlan:
    mode: str
    index: int = 0
    copies: int = 1
    indices: tuple = ()
    pair_constrained: bool = False


def single_of(i: int) -> DuplicatePlan:
    return DuplicatePlan(SINGLE_OF, index=i)


def k_copies_of(i: int, k: int) -> DuplicatePlan:
    if k < 1:
        raise DomainError(f"need k >= 1 copies, got {k}")
    return DuplicatePlan(K_COPIES_OF, index=i, copies=k)


def set_once(indices, pair_constrained: bool = False) -> DuplicatePlan:
    return DuplicatePlan(SET_ONCE, indices=tuple(indices), pair_constrained=pair_constrained)


def all_once(pair_constrained: bool = False) -> DuplicatePlan:
    return DuplicatePlan(ALL_ONCE, pair_constrained=pair_constrained)


def duplicate_sources(plan: DuplicatePlan, n: int) -> list:
    """Original indices to clone, in append order."""
    if plan.mode == SINGLE_OF:
        sources = [plan.index]
    elif plan.mode == K_COPIES_OF:
        sources = [plan.index] * plan.copies
    elif plan.mode == SET_ONCE:
        sources = list(plan.indices)
    elif plan.mode == ALL_ONCE:
        sources = list(range(n))
    else:
        raise DomainError(f"unknown plan mode {plan.mode!r}")
    for j in sources:
        if not 0 <= j < n:
            raise IndexError(f"bidder index {j} out of range for n={n}")
    return sources


def extend_profile(profile: cv.BidderProfile, plan: DuplicatePlan):
    """Profile with clones appended, plus the original/clone pair constraint.

    The constraint is empty unless the plan is pair-constrained, in which
    case each clone may win only if its original does not.
    """
    n = profile.n
    sources = duplicate_sources(plan, n)
    curves = list(profile.curves) + [profile.curves[j] for j in sources]
    names = None
    if profile.names is not None:
        names = tuple(profile.names) + tuple(f"{profile.names[j]}*" for j in sources)
    pairs = ()
    if plan.pair_constrained:
        pairs = tuple((j, n + pos) for pos, j in enumerate(sources))
    return cv.BidderProfile(tuple(curves), names), PairConstraint(pairs)


def select_by_beta(profile: cv.BidderProfile, beta: float) -> int:
    """Bidder maximizing Rev_i(beta); ties go to the lowest index."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0,1), got {beta}")
    return min(range(profile.n), key=lambda i: (-cv.rev(profile.curves[i], beta), i))


def select_by_noisy_beta(noisy_revs) -> int:
    """Argmax of reported revenues from (revenue, reported_quantile) pairs."""
    reports = [float(r) for r, _ in noisy_revs]
    if not reports:
        raise DomainError("need at least one report")
    return min(range(len(reports)), key=lambda i: (-reports[i], i))


def select_by_sample(samples) -> int:
    """Bidder with the highest single sampled value."""
    vals = [float(s) for s in samples]
    if not vals:
        raise DomainError("need at least one sample")
    return min(range(len(vals)), key=lambda i: (-vals[i], i))


def select_k_set_noisy(noisy_revs, k: int) -> frozenset:
    """Top-k bidders by reported revenue."""
    reports = [float(r) for r, _ in noisy_revs]
    if not 1 <= k <= len(reports):
        raise DomainError(f"k={k} out of range for {len(reports)} reports")
    order = sorted(range(len(reports)), key=lambda i: (-reports[i], i))
    return frozenset(order[:k])


def noisy_beta_reports(profile: cv.BidderProfile, beta: float, eps: float, seed: int):
    """Simulated oracle: each bidder reports Rev_i(b_i) at a perturbed b_i.

    b_i is uniform on [beta(1-eps), beta(1+eps)] clipped into (0,1), the
    weakest model consistent with a multiplicative-error promise.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0,1), got {beta}")
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must lie in [0,1), got {eps}")
    rng = random.Random(seed)
    lo = max(beta * (1.0 - eps), cv.EPS_MIN)
    hi = min(beta * (1.0 + eps), 1.0 - cv.EPS_MIN)
    out = []
    for c in profile.curves:
        b = rng.uniform(lo, hi)
        out.append((cv.rev(c, b), b))
    return out


def _plan_for(plan_kind: str, i: int, k: int) -> DuplicatePlan:
    if plan_kind == SINGLE_OF:
        return single_of(i)
    if plan_kind == K_COPIES_OF:
        return k_copies_of(i, k)
    raise DomainError(f"plan kind {plan_kind!r} does not name a single bidder")


def best_single_duplicate(
    profile: cv.BidderProfile,
    evaluator,
    plan_kind: str = SINGLE_OF,
    k: int = 1,
    workers: int = 0,
):
    """Exhaustive search for the best bidder to duplicate.

    evaluator(extended_profile, constraint) -> expected revenue; it must be
    deterministic so the argmax is reproducible.  Candidates can run on a
    thread pool; results merge by index, so worker count never changes the
    answer.
    """

    def score(i: int) -> float:
        extended, constraint = extend_profile(profile, _plan_for(plan_kind, i, k))
        return float(evaluator(extended, constraint))

    if workers and workers > 1 and profile.n > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            revs = list(pool.map(score, range(profile.n)))
    else:
        revs = [score(i) for i in range(profile.n)]
    best = min(range(profile.n), key=lambda i: (-revs[i], i))
    return best, revs[best]
