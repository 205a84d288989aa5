#!/usr/bin/env python3
"""
Exception hierarchy for the toolkit

Every error carries the name of the operation that failed and the exit code
the command-line surface maps it to.
"""


class NcEntropyError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1

    def __init__(self, message, operation=None):
        super().__init__(message)
        self.operation = operation

    def __str__(self):
        message = super().__str__()
        if self.operation:
            return f"{self.operation}: {message}"
        return message


class InputError(NcEntropyError, ValueError):
    """Rejected input data (non-finite values, unreadable files)"""
    exit_code = 2


class IdxParseError(InputError):
    """Malformed IDX file; offset is the byte position of the problem"""

    def __init__(self, message, offset, operation="load_idx"):
        super().__init__(f"{message} (byte offset {offset})", operation)
        self.offset = offset


class CsvParseError(InputError):
    """Malformed CSV file; row is the 0-based data row, column the 0-based cell"""

    def __init__(self, message, row, column=None, operation="load_csv"):
        where = f"row {row}" if column is None else f"row {row}, column {column}"
        super().__init__(f"{message} ({where})", operation)
        self.row = row
        self.column = column


class ParameterError(NcEntropyError, ValueError):
    """Invalid argument value"""
    exit_code = 2


class DegenerateDataError(NcEntropyError):
    """Data carries no usable signal for the requested measure"""
    exit_code = 3


class NumericalDegeneracyError(DegenerateDataError):
    """Gram matrix is genuinely indefinite"""

    def __init__(self, eigenvalue, operation="feature_map_evd"):
        super().__init__(f"eigenvalue {eigenvalue:.3e} is below the clamping tolerance", operation)
        self.eigenvalue = eigenvalue


class DegenerateColumnError(DegenerateDataError):
    """Weight matrix has an all-zero column"""

    def __init__(self, column, operation="weight_correlation"):
        super().__init__(f"column {column} is all zeros", operation)
        self.column = column


class DegenerateInputError(DegenerateDataError):
    """Input has no spread at all (e.g. every sample identical)"""


class DivergenceError(NcEntropyError):
    """Training produced a non-finite loss"""
    exit_code = 4

    def __init__(self, epoch, operation="train"):
        super().__init__(f"loss became non-finite at epoch {epoch}", operation)
        self.epoch = epoch
