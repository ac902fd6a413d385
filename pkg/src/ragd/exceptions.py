"""Exception types raised across the package."""


class RagdError(Exception):
    """Base class for all package errors."""


class ContractError(RagdError, ValueError):
    """A point or tangent vector violates its manifold's constraints,
    or two arguments live on different manifolds / base points."""


class CutLocusError(RagdError, ValueError):
    """The logarithm (or transport) was requested across the cut locus."""


class ParameterError(RagdError, ValueError):
    """Optimizer parameters admit no valid solution (e.g. h * mu >= 1)."""


class ConfigError(RagdError, ValueError):
    """An experiment configuration is malformed or references missing files."""


class IterationError(RagdError):
    """A numerical failure inside an optimizer iteration.

    Wraps the original exception and records the iteration index."""

    def __init__(self, k, cause):
        super().__init__(f"iteration {k}: {cause}")
        self.k = k
        self.cause = cause
