"""Exception hierarchy.

``DataError`` covers bad inputs (CLI exit code 2), ``TrainingError`` covers
failures while fitting a model (exit code 3).
"""


class StepwiseIDSError(Exception):
    """Base class for all package errors."""


class DataError(StepwiseIDSError):
    pass


class TrainingError(StepwiseIDSError):
    pass


# dataset

class SchemaError(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"missing column: {name!r}")
        self.name = name


class BadNumeric(DataError):
    def __init__(self, row, column, token=None):
        super().__init__(f"row {row}: column {column!r} is not a finite number ({token!r})")
        self.row = row
        self.column = column
        self.token = token


class UnknownLabel(DataError):
    def __init__(self, row, token):
        super().__init__(f"row {row}: unknown attack label {token!r}")
        self.row = row
        self.token = token


class EmptyFile(DataError):
    pass


class AllRecordsExcluded(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class AllFeaturesConstant(DataError):
    pass


# learners

class EmptyPartition(DataError):
    pass


class NotEncoded(DataError):
    pass


class NotBinary(DataError):
    pass


class WidthMismatch(DataError):
    def __init__(self, expected, got):
        super().__init__(f"record width {got} does not match model width {expected}")
        self.expected = expected
        self.got = got


class Diverged(TrainingError):
    pass


class CorruptModel(DataError):
    pass


class VersionMismatch(DataError):
    pass


# feature selection

class EmptyFeaturePool(DataError):
    pass


class CriterionUnavailable(DataError):
    pass


# metrics

class NoNegatives(DataError):
    pass


class NoPositives(DataError):
    pass


class EmptyEvaluation(DataError):
    pass


class NoSourceRecords(DataError):
    pass


# categorization

class MissingClass(DataError):
    pass


class StageEmpty(TrainingError):
    pass


class InvalidCascade(DataError):
    pass


class TaxonomyMismatch(DataError):
    pass
