from typing import Any, Optional, Sequence, Tuple

from sly.lex import Token


class EllipartException(Exception):
    """
    Base class for all exceptions in this library.
    """

    pass


class InvalidConfig(EllipartException):
    """
    Thrown when a :class:`~ellipart.config.Config` field has an invalid value.
    """

    def __init__(self, field_name: str, value: Any, reason: str):
        self.field_name = field_name
        self.value = value
        self.reason = reason
        super().__init__(f"Invalid value for '{field_name}': {value!r} ({reason})")


###############################################################################
# Geometry
###############################################################################
class GeometryException(EllipartException):
    """
    Base class for errors in the ellipsoid primitives.
    """

    pass


class DimensionMismatch(GeometryException):
    """
    Thrown when two operands live in spaces of different dimension.
    """

    def __init__(self, expected: int, actual: int, what: str = "point"):
        self.expected = expected
        self.actual = actual
        self.what = what
        super().__init__(
            f"Dimension mismatch for {what}: expected {expected}, got {actual}"
        )


class TooFewPoints(GeometryException):
    """
    Thrown when a minimum volume ellipsoid is requested for ``N <= n`` points.
    """

    def __init__(self, n_points: int, dimension: int):
        self.n_points = n_points
        self.dimension = dimension
        super().__init__(
            f"Need more than {dimension} points to fit an ellipsoid in "
            f"{dimension} dimensions, got {n_points}"
        )


class RankDeficient(GeometryException):
    """
    Thrown when the affine hull of a point set is not full dimensional.
    """

    def __init__(self, rank: int, dimension: int):
        self.rank = rank
        self.dimension = dimension
        super().__init__(
            f"Points span an affine subspace of dimension {rank} < {dimension}. "
            "Jitter constant features or drop them before fitting."
        )


class NonConvergence(GeometryException):
    """
    Thrown when an iterative solver hits its iteration cap before reaching
    the requested tolerance.
    """

    def __init__(self, solver: str, iterations: int, gap: float):
        self.solver = solver
        self.iterations = iterations
        self.gap = gap
        super().__init__(
            f"{solver} did not converge after {iterations} iterations "
            f"(remaining gap {gap:.3e})"
        )


class InvalidEllipsoid(GeometryException):
    """
    Thrown when a shape matrix is not symmetric positive definite.
    """

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Invalid ellipsoid: {reason}")


###############################################################################
# Reduced convex hulls
###############################################################################
class RchException(EllipartException):
    """
    Base class for errors in the reduced convex hull solver.
    """

    pass


class InfeasibleD(RchException):
    """
    Thrown when the weight cap ``D`` is too small for the weights to sum to 1.
    """

    def __init__(self, D: float, n_x: int, n_y: int):
        self.D = D
        self.n_x = n_x
        self.n_y = n_y
        super().__init__(
            f"Weight cap D={D:g} is infeasible for sets of size {n_x} and {n_y}; "
            f"need D >= {1.0 / min(n_x, n_y):g}"
        )


class DegenerateSlab(RchException):
    """
    Thrown when the closest points of both reduced hulls coincide, so there is
    no separating direction.
    """

    def __init__(self, norm: float):
        self.norm = norm
        super().__init__(
            f"Reduced hulls touch (|c - d| = {norm:.3e}); no separating slab exists"
        )


###############################################################################
# Partitioning and classification
###############################################################################
class PartitionException(EllipartException):
    """
    Base class for errors raised while partitioning a training set.
    """

    pass


class EmptyInput(PartitionException):
    """
    Thrown when one of the labelled sets to partition has no points.
    """

    def __init__(self, n_pos: int, n_neg: int):
        self.n_pos = n_pos
        self.n_neg = n_neg
        super().__init__(
            f"Both labels need at least one point, got {n_pos} and {n_neg}"
        )


class EmptyModel(PartitionException):
    """
    Thrown when classifying with a model that holds no regions.
    """

    def __init__(self):
        super().__init__("The model contains no ellipsoids")


class TrustException(EllipartException):
    """
    Base class for errors in the trust score calculation.
    """

    pass


class InvalidCounts(TrustException):
    """
    Thrown when region counts and training totals are inconsistent.
    """

    def __init__(self, counts: Tuple[int, int], totals: Tuple[int, int]):
        self.counts = counts
        self.totals = totals
        super().__init__(f"Invalid region counts {counts} for totals {totals}")


###############################################################################
# Datasets
###############################################################################
class DatasetException(EllipartException):
    """
    Base class for errors while reading, generating or splitting datasets.
    """

    pass


class ParseError(DatasetException):
    """
    Thrown when a CSV cell cannot be read as a real number.
    """

    def __init__(self, row: int, column: str, value: Any):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"Cannot parse {value!r} at row {row}, column '{column}'")


class MissingLabel(DatasetException):
    """
    Thrown when the requested label column does not exist.
    """

    def __init__(self, column: Any):
        self.column = column
        super().__init__(f"Label column {column!r} not found")


class EmptyFile(DatasetException):
    """
    Thrown when a CSV file holds no records.
    """

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"No records in '{path}'")


class InvalidParam(DatasetException):
    """
    Thrown when a generator or splitter gets an out-of-range parameter.
    """

    def __init__(self, name: str, value: Any, reason: str):
        self.name = name
        self.value = value
        self.reason = reason
        super().__init__(f"Invalid {name}={value!r}: {reason}")


class ClassTooSmall(DatasetException):
    """
    Thrown when a class has too few records for the requested number of folds.
    """

    def __init__(self, label: Any, count: int, required: int):
        self.label = label
        self.count = count
        self.required = required
        super().__init__(
            f"Class {label!r} has {count} records, at least {required} required"
        )


###############################################################################
# Model files
###############################################################################
class ModelStoreException(EllipartException):
    """
    Base class for errors while saving or loading model files.
    """

    pass


class IoError(ModelStoreException):
    """
    Thrown when a model file cannot be read or written.
    """

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"Cannot access '{path}': {reason}")


class VersionMismatch(ModelStoreException):
    """
    Thrown when a model file was written by an incompatible format version.
    """

    def __init__(self, found: Any, expected: int):
        self.found = found
        self.expected = expected
        super().__init__(
            f"Model format version {found!r} is not supported (expected {expected})"
        )


class CorruptModel(ModelStoreException):
    """
    Thrown when a model file is structurally invalid.
    """

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"Corrupt model file: {reason}")


###############################################################################
# Row selection
###############################################################################
class SelectionException(EllipartException):
    """
    Base class for errors in row selection expressions.
    """

    pass


class SelectionSyntaxError(SelectionException):
    """
    Base class for syntax errors.
    """

    pass


class TokenizingException(SelectionSyntaxError):
    """
    Thrown when the lexer cannot tokenize the expression.
    """

    def __init__(self, token: Token):
        self.token = token
        super().__init__(f"Failed to tokenize at: {token}")


class ParsingException(SelectionSyntaxError):
    """
    Thrown when the parser cannot parse the expression.
    """

    def __init__(self, token: Optional[Token], eof: bool = False):
        self.token = token
        self.eof = eof
        if eof:
            super().__init__("Unexpected end of selection expression")
        else:
            super().__init__(f"Failed to parse at: {token}")


class UnknownColumnException(SelectionException):
    """
    Thrown when an expression refers to a column the dataset does not have.
    """

    def __init__(self, column: str, available: Sequence[str] = ()):
        self.column = column
        self.available = tuple(available)
        message = f"Unknown column: '{column}'"
        if self.available:
            message += f". Available: {', '.join(self.available)}"
        super().__init__(message)


class SelectionTypeException(SelectionException):
    """
    Thrown when a value cannot be compared with the contents of a column.
    E.g. `age < Male`
    """

    def __init__(self, column: str, value: Any):
        self.column = column
        self.value = value
        super().__init__(f"Cannot compare numeric column '{column}' with {value!r}")


###############################################################################
# Plotting
###############################################################################
class PlotDimension(EllipartException):
    """
    Thrown when a partition plot is requested for a model that is not 2-D.
    """

    def __init__(self, dimension: int):
        self.dimension = dimension
        super().__init__(f"Partition plots need 2 features, the model has {dimension}")
