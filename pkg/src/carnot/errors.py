"""Exception hierarchy.

``StructuralError`` subclasses signal bugs or invalid input and abort a
harness run; statistical failures are never raised, only recorded.
"""


class CarnotError(Exception):
    pass


class StructuralError(CarnotError):
    pass


class GradingViolation(StructuralError):
    pass


class JacobiViolation(StructuralError):
    def __init__(self, triple, residual=None):
        self.triple = tuple(triple)
        self.residual = residual
        super().__init__(f"Jacobi identity fails on basis triple {self.triple}")


class DuplicateTriple(StructuralError):
    pass


class NotSkew(StructuralError):
    pass


class DimensionCap(StructuralError):
    pass


class DimensionMismatch(StructuralError):
    pass


class AlgebraMismatch(StructuralError):
    pass


class DomainViolation(StructuralError):
    pass


class UnsupportedStep(StructuralError):
    pass


class CalibrationFailed(StructuralError):
    pass


class NotAnIdeal(StructuralError):
    pass


class OptimizerDidNotConverge(StructuralError):
    pass


class RejectionBudgetExceeded(StructuralError):
    pass


class InvalidDensityBound(StructuralError):
    pass


class FiltrationNotNested(StructuralError):
    pass


class SupportMismatch(StructuralError):
    pass


class CertificationFailed(StructuralError):
    pass


class InvalidSampleSize(StructuralError):
    pass


class SupportLeakage(StructuralError):
    pass


class EmptySample(StructuralError):
    pass


class ConfigInvalid(CarnotError):
    pass


class AlgebraLoadError(CarnotError):
    pass
