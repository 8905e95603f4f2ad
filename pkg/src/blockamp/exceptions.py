"""Exception types raised across the package."""


class BlockampError(Exception):
    """Base class for all package errors."""


class ValidationError(BlockampError, ValueError):
    """An object violates its structural invariants."""


class ParameterError(BlockampError, ValueError):
    """Arguments fall outside the supported or feasible range."""


class DomainError(BlockampError, ValueError):
    """A numeric function was evaluated outside its domain."""


class ResourceError(BlockampError, RuntimeError):
    """An exhaustive computation would exceed its configured cap."""


class InfeasibleConfigError(ParameterError):
    """A protocol configuration fails one of its feasibility gates.

    ``gate`` names the failing inequality so callers can report it.
    """

    def __init__(self, gate, message):
        super().__init__(f"{gate}: {message}")
        self.gate = gate
