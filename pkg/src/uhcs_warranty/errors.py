"""Exception hierarchy shared by the library and the CLI."""


class WarrantyError(Exception):
    """Base class for all package errors."""


class ValidationError(WarrantyError, ValueError):
    """Input violates a documented precondition or type invariant."""


class TiesError(ValidationError):
    """Ordered sample contains tied values where strict ordering is required."""


class NumericalError(WarrantyError, ArithmeticError):
    """A numerical routine failed (non-convergence, overflow, degenerate result)."""


class SamplerError(NumericalError):
    """The Metropolis-Hastings sampler could not produce a usable chain."""
