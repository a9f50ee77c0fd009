"""Exception hierarchy shared by all qmap modules.

Exit-code mapping used by the CLI: configuration and domain errors are
usage problems (exit 2); numerical certificate violations and tracking
failures are runtime failures (exit 1).
"""


class QmapError(Exception):
    """Base class for all qmap errors."""


class ConfigurationError(QmapError):
    """Invalid or inconsistent run configuration (CLI exit 2)."""


class DomainError(QmapError):
    """Argument outside its mathematical domain (CLI exit 2)."""


class NumericalError(QmapError):
    """A numerical certificate (unitarity, residual, fit) failed (CLI exit 1)."""


class StepTooLargeError(NumericalError):
    """Level tracking could not pair eigenvectors across a parameter step.

    Callers should refine the parameter grid and retry.
    """


class TrackingError(NumericalError):
    """Level tracking failed even after grid refinement (CLI exit 1)."""


class FitError(NumericalError):
    """Scaling-law fit could not be computed (singular normal equations)."""
