"""Exception hierarchy shared by all modules."""


class NlsymError(Exception):
    """Base class for all errors raised by nlsym."""


class DomainError(NlsymError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(NlsymError, ValueError):
    """Grid, padding or experiment configuration cannot support the request."""


class UnsupportedError(NlsymError):
    """The request is outside the supported regime (e.g. singularity order >= 1)."""


class ConvergenceError(NlsymError):
    """An iteration hit its cap. The last iterate is attached as ``last``."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class CertificateImpossibleError(NlsymError):
    """A maximum-principle certificate cannot exist for the given frame."""


class SolutionRejectedError(NlsymError):
    """A field failed the discrete weak-residual gate."""
