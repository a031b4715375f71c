"""Numerical laboratory for nonlocal Dirichlet problems and moving-plane symmetry checks."""

__version__ = "0.1.0"

from nlsym.errors import (
    CertificateImpossibleError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    NlsymError,
    SolutionRejectedError,
    UnsupportedError,
)

__all__ = [
    "__version__",
    "CertificateImpossibleError",
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "NlsymError",
    "SolutionRejectedError",
    "UnsupportedError",
]
