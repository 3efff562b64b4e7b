"""Exception types raised by the wellpoles engine."""

from __future__ import annotations


class WellpolesError(Exception):
    """Base class for all engine errors."""


class PoleHit(WellpolesError):
    """S-matrix evaluation landed on a denominator zero.

    Attributes
    ----------
    k : complex
        Momentum at which the denominator vanished.
    channel : str
        Channel name ('plus', 'minus' or 'full').
    """

    def __init__(self, k: complex, channel: str):
        self.k = k
        self.channel = channel
        super().__init__(f"S-matrix pole hit at k={k!r} in channel {channel}")


class NoConvergence(WellpolesError):
    """Newton iteration failed to converge within the iteration cap."""

    def __init__(self, k_last: complex, iterations: int, message: str = ""):
        self.k_last = k_last
        self.iterations = iterations
        msg = message or (
            f"no convergence after {iterations} iterations, last k={k_last!r}"
        )
        super().__init__(msg)


class ConvergedElsewhere(WellpolesError):
    """Newton converged, but outside the requested trust radius."""

    def __init__(self, k_found: complex, k_seed: complex, trust_radius: float):
        self.k_found = k_found
        self.k_seed = k_seed
        self.trust_radius = trust_radius
        super().__init__(
            f"converged to {k_found!r}, beyond trust radius {trust_radius:g} "
            f"of seed {k_seed!r}"
        )


class EdgeTooClose(WellpolesError):
    """A zero sits too close to a counting-contour edge to resolve winding."""

    def __init__(self, where: complex, message: str = ""):
        self.where = where
        super().__init__(message or f"zero too close to contour near {where!r}")


class SeedNotOnPole(WellpolesError):
    """Trajectory seed does not satisfy the pole residual requirement."""


class StallAtDoubleZero(WellpolesError):
    """Continuation stalled at a coalescing pole pair (double zero)."""

    def __init__(self, alpha: float, k: complex):
        self.alpha = alpha
        self.k = k
        super().__init__(f"continuation stalled at double zero near k={k!r}, alpha={alpha:.6f}")


class ModelInvalid(WellpolesError):
    """Local quadratic branch model broke down at a double zero."""


class NoRootInBracket(WellpolesError):
    """Requested root index does not exist in the search bracket."""


class DocumentError(WellpolesError):
    """Chart document violates the schema."""
