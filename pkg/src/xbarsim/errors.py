"""Exception hierarchy shared across the simulator.

Split by how the caller should react: configuration mistakes are fixable
by the user (CLI exit code 2), infeasibilities are legitimate simulation
outcomes for the given numbers (exit code 3).
"""


class XbarError(Exception):
    """Base class for all simulator errors."""


class InvalidParameterError(XbarError):
    """A value violates a model invariant (non-positive resistance, bad
    bias vector, malformed bit matrix, ...)."""


class ConfigError(XbarError):
    """A scenario file or request is malformed or references missing
    files."""


class InfeasibleError(XbarError):
    """The requested operating point cannot exist for these parameters."""


class InfeasibleCalibrationError(InfeasibleError):
    """The target read current would require a non-positive access-device
    resistance."""


class AmbiguousReferenceError(InfeasibleError):
    """A read reference current does not separate worst-case '0' and '1'
    column currents."""


class NoValidReferenceError(InfeasibleError):
    """No reference current placement can classify the requested levels
    (gap closed by leakage, or nominal levels already misclassified)."""
