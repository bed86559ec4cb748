class SymorbitError(Exception):
    pass


# matrix shape / content

class NonSquare(SymorbitError):
    pass


class NonFinite(SymorbitError):
    pass


class OddDimension(SymorbitError):
    pass


class DimensionMismatch(SymorbitError):
    pass


class NotSymplectic(SymorbitError):
    pass


class NotLagrangian(SymorbitError):
    pass


class InvalidBlocks(SymorbitError):
    pass


class AsymmetryTooLarge(SymorbitError):
    pass


class QNotSymmetric(SymorbitError):
    pass


class AlphaDegenerate(SymorbitError):
    pass


class DegeneracyError(SymorbitError):
    """Raised when an index is undefined at the given input (a discrete value
    would have to be read off a numerically singular object)."""


class DegenerateForm(DegeneracyError):
    pass


class CSingular(DegeneracyError):
    pass


class IterateDegenerate(DegeneracyError):
    pass


class NotTransverse(DegeneracyError):
    pass


class DegenerateEndpoint(DegeneracyError):
    pass


class UnresolvedCrossing(DegeneracyError):
    pass


class PathDependence(SymorbitError):
    pass


# orbit pipeline

class InvalidInvolution(SymorbitError):
    pass


class NotOnFixedSet(SymorbitError):
    pass


class CriticalPoint(SymorbitError):
    pass


class StepFailure(SymorbitError):
    pass


class EnergyDriftExceeded(SymorbitError):
    pass


class NoConvergence(SymorbitError):
    pass


class DegenerateTransversal(SymorbitError):
    pass


class UnequalEigenspaces(SymorbitError):
    pass


class ProjectionIllConditioned(SymorbitError):
    pass


class SectionInvariantViolated(SymorbitError):
    pass


# cli

class ConfigError(SymorbitError):
    pass


class MalformedInput(SymorbitError):
    def __init__(self, message, line=None, column=None, field=None):
        self.line = line
        self.column = column
        self.field = field

        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if field is not None:
            where.append(f"field '{field}'")

        if where:
            message = f"{message} ({', '.join(where)})"

        super().__init__(message)


degeneracy_errors = (
    DegeneracyError,
    AsymmetryTooLarge,
    QNotSymmetric,
)

input_errors = (
    MalformedInput,
    ConfigError,
    DimensionMismatch,
    InvalidBlocks,
    NonSquare,
    NonFinite,
    OddDimension,
    NotSymplectic,
    NotOnFixedSet,
)
