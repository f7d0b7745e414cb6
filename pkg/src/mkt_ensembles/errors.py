"""Exception types shared across the package.

Four failure categories are distinguished so callers can react
differently to bad arguments, out-of-domain evaluation points,
runtime numerical breakdown, and requests beyond supported sizes.
"""


class ParameterError(ValueError):
    """A constructor or function argument violates its stated range."""


class DomainError(ValueError):
    """An evaluation point lies outside the mathematical domain (e.g. z on the real axis)."""


class NumericalError(RuntimeError):
    """An iteration failed to converge or a state left its admissible region."""


class CapabilityError(ValueError):
    """The request exceeds a documented size or feature limit."""
