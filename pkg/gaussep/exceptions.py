"""Exceptions raised by gaussep

Every exception carries the exit code the command line reports for it.
"""


class GaussepError(Exception):
    exit_code = 70


class DomainError(GaussepError, ValueError):
    """The input violates a precondition (not symmetric, not positive, not a QCM...)"""
    exit_code = 65


class ConditioningError(GaussepError, ArithmeticError):
    """A block that must be inverted is singular within tolerance"""
    exit_code = 70

    def __init__(self, message, min_eigenvalue=None, threshold=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.threshold = threshold


class FileFormatError(GaussepError, ValueError):
    exit_code = 65

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedVersionError(FileFormatError):
    pass


class ConfigError(GaussepError):
    exit_code = 78


class UsageError(GaussepError):
    exit_code = 64
