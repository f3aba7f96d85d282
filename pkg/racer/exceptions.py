class RacerError(ValueError):
    """Base class for all errors raised by racer."""


class NoMassError(RacerError):
    def __init__(self, message="image has zero total mass after normalization; nothing to center"):
        super().__init__(message)


class ConfigurationError(RacerError):
    pass


class DomainError(RacerError):
    pass


class OracleSizeError(RacerError):
    pass


class FormatError(RacerError):
    pass


class UnsupportedFormat(FormatError):
    def __init__(self, detail, mode=None):
        self.mode = mode
        if mode is not None:
            detail = f"{detail} (mode {mode})"
        super().__init__(detail)


class CorruptFile(FormatError):
    def __init__(self, path, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{path}: expected {expected} bytes, found {actual}")


class ParseError(FormatError):
    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at byte offset {offset}")
