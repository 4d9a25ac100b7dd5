"""Exception types shared across zetalab modules."""


class ZetalabError(Exception):
    """Base class for all zetalab errors."""


class CapacityError(ZetalabError):
    """A requested computation exceeds a configured memory or integer budget."""


class OutOfRangeError(ZetalabError):
    """An index exceeds the range covered by the precomputed tables."""


class ParameterError(ZetalabError):
    """An argument violates a documented precondition."""


class IllConditionedBasisError(ZetalabError):
    """A Gram matrix is rank-deficient beyond the regularization tolerance."""

    def __init__(self, message, condition_estimate):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class CheckpointError(ZetalabError):
    """A checkpoint file is missing, corrupt, or inconsistent with the run."""
