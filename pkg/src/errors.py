"""Error types raised by the simulator modules."""


class ConfigError(ValueError):
    """Invalid scheme, plan or configuration file value."""


class PreconditionError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class UnaddressablePatternError(ValueError):
    """A combination ranks beyond the 2^floor(log2 C(n, k)) usable patterns."""


class LengthMismatchError(ValueError):
    """A bit string does not have the length the configuration requires."""


class ShapeError(ValueError):
    """Matrix or vector dimensions are incompatible."""


class CodebookTooLargeError(ValueError):
    """The frame codebook is too large to materialise in memory."""


class SimulationError(RuntimeError):
    """A Monte Carlo frame failed; the message carries point, frame and seed."""
