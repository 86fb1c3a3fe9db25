"""Exception types raised across the package."""


class SpatialMCError(Exception):
    """Base class for package errors."""


class InvalidInputError(SpatialMCError, ValueError):
    """Input data or configuration violates a precondition."""


class SolverFailureError(SpatialMCError, RuntimeError):
    """A numerical routine failed to produce a usable result.

    ``iteration`` is the solver iteration at which the failure surfaced,
    or None when the failure is not tied to an iterative loop.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class RankUnreachableError(SolverFailureError):
    """No penalty on the search grid produced a fit of the requested rank."""

    def __init__(self, message, target_rank, attained_ranks):
        super().__init__(message)
        self.target_rank = target_rank
        self.attained_ranks = tuple(sorted(set(attained_ranks)))
