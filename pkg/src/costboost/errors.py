"""Exception and warning types raised across the package."""


class CostboostError(Exception):
    """Base class for data and model errors (CLI exit code 1)."""


class MalformedHeader(CostboostError, ValueError):
    pass


class MalformedRow(CostboostError, ValueError):
    pass


class ValueOutOfRange(CostboostError, ValueError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"value {value!r} at row {row}, column {column!r} is outside 1-5"
        )


class MissingTargetColumn(CostboostError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing target column"


class EmptyDataset(CostboostError, ValueError):
    pass


class TooFewSamples(CostboostError, ValueError):
    pass


class InvalidFraction(CostboostError, ValueError):
    pass


class InvalidCostMatrix(CostboostError, ValueError):
    pass


class DimensionMismatch(CostboostError, ValueError):
    pass


class LengthMismatch(CostboostError, ValueError):
    pass


class MaskMismatch(CostboostError, ValueError):
    pass


class SingleClassData(CostboostError, ValueError):
    pass


class WeakLearnerFailure(CostboostError, RuntimeError):
    pass


class EmptyEnsemble(CostboostError, ValueError):
    pass


class EmptyInput(CostboostError, ValueError):
    pass


class SchemaMismatch(CostboostError, ValueError):
    def __init__(self, missing, extra=()):
        self.missing = list(missing)
        self.extra = list(extra)
        msg = "input is missing model features: " + ", ".join(self.missing)
        if self.extra:
            msg += "; extra columns ignored: " + ", ".join(self.extra)
        super().__init__(msg)


class VersionMismatch(CostboostError, ValueError):
    pass


class DegenerateDistribution(UserWarning):
    """One class has no members; the imbalance ratio is infinite."""


class NonConvergence(UserWarning):
    """An iterative solver stopped before meeting its tolerance."""


class AllWeightsZero(CostboostError, ValueError):
    pass
