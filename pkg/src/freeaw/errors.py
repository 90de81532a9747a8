"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``reason`` so the CLI can report
failures without parsing messages.
"""

from __future__ import annotations


class FreeAwError(Exception):
    """Base class for library errors."""

    reason = "error"


class DomainError(FreeAwError, ValueError):
    """Input lies outside the domain where the quantity is defined."""

    reason = "domain_violation"


class ConstraintError(FreeAwError, ValueError):
    """Parameters violate a structural constraint (e.g. abcd = 1)."""

    reason = "constraint_violation"


class UnsupportedConfiguration(FreeAwError):
    """No implemented formula covers the requested parameter configuration."""

    reason = "unsupported_configuration"


class QuadratureError(FreeAwError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    reason = "quadrature_failure"

    def __init__(self, message: str, best_estimate: complex, est_error: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.est_error = est_error
