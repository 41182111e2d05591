"""Exception types shared across the package."""


class DupkitError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DupkitError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class ConcavityViolation(DupkitError, ValueError):
    """A breakpoint sequence fails the non-increasing chord-slope test."""


class HypothesisViolated(DupkitError, ValueError):
    """Constants fall outside the region a bound formula is valid on."""


class LemmaViolation(DupkitError, RuntimeError):
    """No case of a structural lemma holds; signals a curve invariant bug."""


class NonConvergence(DupkitError, RuntimeError):
    """An iterative routine exhausted its budget without closing the tolerance."""


class UnboundedExpectation(DupkitError, ValueError):
    """Requested expectation is infinite (rank-1 statistic of an unbounded curve)."""


class ProfileMismatch(DupkitError, ValueError):
    """Bid vector length (or similar pairing) disagrees with the profile."""


class DominanceViolation(DupkitError, ValueError):
    """A pointwise revenue-dominance precondition does not hold."""


class ParseError(DupkitError, ValueError):
    """Config text is malformed; message names the offending field."""
