"""Exception hierarchy shared by every module of the package."""


class TmvkscError(Exception):
    """Base class for all package errors."""


class ConfigError(TmvkscError, ValueError):
    pass


class DimensionError(TmvkscError, ValueError):
    pass


class DegenerateKernelError(TmvkscError, ArithmeticError):
    pass


class NonPositiveDegreeError(TmvkscError, ArithmeticError):
    pass


class DegenerateSpectrumError(TmvkscError, ArithmeticError):
    pass


class InsufficientCodewordsError(TmvkscError):
    pass


class ResourceError(TmvkscError, MemoryError):
    pass


class ParseError(TmvkscError, ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        loc = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{loc}: {message}")


class FormatVersionError(TmvkscError):
    pass


class CorruptModelError(TmvkscError):
    pass


class InternalError(TmvkscError, RuntimeError):
    pass
