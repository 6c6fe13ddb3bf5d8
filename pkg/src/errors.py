"""Exception types raised across the benchmark toolkit."""


class BenchError(Exception):
    """Root of every error the toolkit raises on purpose."""


class ConfigurationError(BenchError, ValueError):
    """Invalid sizes, unknown kinds, malformed config files."""


class QubitIndexError(BenchError, IndexError):
    """Qubit index outside the register."""


class ShapeError(BenchError, ValueError):
    """Vector lengths that do not line up (params, inputs, predictions)."""


class EncodingError(BenchError, ValueError):
    """Input that cannot be written into a state (e.g. near-zero norm)."""


class DomainError(BenchError, ValueError):
    """Input component outside the encoder's domain."""


class DegenerateDatasetError(BenchError, ValueError):
    """Targets with zero spread; the dataset cannot be scored."""


class NumericError(BenchError, ArithmeticError):
    """Non-finite values, norm drift, or an unsolvable linear system."""


class UnsupportedProfileError(BenchError, ValueError):
    """Operation requested on a dataset profile it does not support."""
