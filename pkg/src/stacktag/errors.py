"""Exception hierarchy shared across the toolkit."""


class StacktagError(Exception):
    """Base class for all toolkit errors."""


class ConlluParseError(StacktagError):
    """Malformed CoNLL-U input; carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__("line {}: {}".format(line_number, message))
        self.line_number = line_number


class KBParseError(StacktagError):
    """Malformed gazetteer line; carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__("line {}: {}".format(line_number, message))
        self.line_number = line_number


class ShapeMismatchError(StacktagError):
    """Predictions do not mirror the gold corpus shape."""


class LayoutMismatchError(StacktagError):
    """Stacked feature layout at prediction time differs from training time."""


class ModelFormatError(StacktagError):
    """Model file is corrupt or has the wrong magic."""


class UnsupportedVersionError(ModelFormatError):
    """Model file written by a newer format version."""


class ConfigError(StacktagError):
    """Invalid pipeline configuration."""
