"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to:
2 for bad input or configuration, 3 for data that is well formed
but too degenerate to analyse.
"""


class ReactfnError(Exception):
    exit_code = 2


class InputError(ReactfnError):
    """Unreadable file, malformed row, invalid config."""

    exit_code = 2


class FormatError(InputError):
    pass


class RowError(InputError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class SpecError(InputError):
    """A generator spec that violates its invariants."""


class DegenerateDataError(ReactfnError):
    exit_code = 3


class EmptySeriesError(DegenerateDataError):
    pass


class DegenerateRangeError(DegenerateDataError):
    pass


class CalibrationError(DegenerateDataError):
    pass
