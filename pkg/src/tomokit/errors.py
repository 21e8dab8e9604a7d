"""Exception hierarchy shared by every tomokit module."""


class TomokitError(Exception):
    """Base class for all errors raised by tomokit."""


class InvalidStateError(TomokitError, ValueError):
    """A state, density matrix or decomposition violates its invariants."""


class DimensionError(TomokitError, ValueError):
    """Array or mode-count arguments are mutually inconsistent."""


class DegenerateFrameError(TomokitError, ValueError):
    """A reference frame has vanishing (mu, nu) where a non-zero pair is required."""


class NonConvergenceError(TomokitError, ArithmeticError):
    """A numerical integration or reconstruction failed to reach its tolerance."""


class NegativeProbabilityError(TomokitError, ArithmeticError):
    """A computed tomogram value fell below the round-off clipping threshold."""
