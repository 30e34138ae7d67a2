# utils/exceptions.py
# =============================================================================
"""Error hierarchy shared by every package; the CLI maps these to exit codes."""


class KBCError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 2


class UsageError(KBCError):
    """Invalid flag or configuration combination"""

    exit_code = 1


class DataError(KBCError):
    """Problem with input data or ids"""

    exit_code = 2


class ParseError(DataError):
    """Malformed record in an input stream"""

    def __init__(self, message, line_number=None, source=None):
        self.line_number = line_number
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line_number is not None:
            where += f"{line_number}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class VocabularyError(DataError):
    """Unknown symbol while the vocabulary is closed"""


class DomainError(DataError):
    """Out-of-range id, dimension mismatch or similar precondition violation"""


class InputError(DataError):
    """Semantically invalid input such as duplicate documents or NaN scores"""


class NumericalError(KBCError):
    """Non-finite values produced during training"""

    exit_code = 3

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
