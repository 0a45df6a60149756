"""Exception types raised by the sampler components."""


class SpinsError(Exception):
    """Base class for errors raised by this package."""


class CenterCoincidence(SpinsError, ValueError):
    """A point coincides with the center of the inversion sphere."""


class BoundaryPoint(SpinsError, ValueError):
    """A point lies on (or numerically at) the boundary of its domain."""


class InvalidProjection(SpinsError, ValueError):
    """Restoring a dropped simplex component would make it negative."""


class DegenerateState(SpinsError, ValueError):
    """A state sits where a proposal is undefined, e.g. a zero simplex weight."""


class NonFiniteTarget(SpinsError, ValueError):
    """The target log density is not finite at the current chain state."""


class NonSpdScale(SpinsError, ValueError):
    """A scale matrix is not symmetric positive definite."""
