"""Exception types shared across the toolkit."""


class PacplanError(Exception):
    """Base class for all toolkit errors."""


# --- dataset -----------------------------------------------------------

class SchemaError(PacplanError):
    """Schema document is malformed or violates its invariants."""


class HeaderMismatch(PacplanError):
    def __init__(self, missing, extra):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        super().__init__(
            f"CSV header does not match schema: missing={self.missing} extra={self.extra}"
        )


class RowArityError(PacplanError):
    def __init__(self, row_index, expected, got):
        self.row_index = row_index
        super().__init__(f"row {row_index}: expected {expected} cells, got {got}")


class EmptyCohort(PacplanError):
    """A cohort filter left zero rows."""


class UnknownColumn(PacplanError):
    pass


class WrongKind(PacplanError):
    """Column exists but has the wrong kind for the operation."""


class InsufficientData(PacplanError):
    """Too few non-missing values to compute the requested statistic."""


class ClassTooSmall(PacplanError):
    def __init__(self, class_label, count):
        self.class_label = class_label
        super().__init__(f"response class {class_label!r} has only {count} row(s); need at least 2")


class NonBinaryResponse(PacplanError):
    """Numeric encoding requires exactly two response values."""


# --- numerics ----------------------------------------------------------

class DegenerateTable(PacplanError):
    """Fewer than 2 non-empty rows or columns remain after dropping zero marginals."""


# --- models ------------------------------------------------------------

class TooFewRows(PacplanError):
    pass


class SchemaMismatch(PacplanError):
    """Record or dataset does not conform to the model's schema."""


class SingularCovariance(PacplanError):
    """Pooled covariance could not be factorized even after shrinkage."""


# --- evaluation --------------------------------------------------------

class OneClassOnly(PacplanError):
    """Scores cover a single class; ranking metrics are undefined."""


class EmptyTestSet(PacplanError):
    pass


# --- flow / cost -------------------------------------------------------

class NonConsecutiveYears(PacplanError):
    pass


class UnknownOwnership(PacplanError):
    def __init__(self, ownership, known):
        self.ownership = ownership
        super().__init__(f"unknown ownership {ownership!r}; known: {sorted(known)}")


# --- persistence -------------------------------------------------------

class UnsupportedVersion(PacplanError):
    pass


class CorruptArtifact(PacplanError):
    pass


class SchemaFingerprintMismatch(PacplanError):
    pass
