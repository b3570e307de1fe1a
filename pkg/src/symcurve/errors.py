"""Exception hierarchy shared by every layer of the package."""


class SymcurveError(Exception):
    """Base class. ``exit_code`` is used by the command-line front end."""

    exit_code = 1


class BackendMismatch(SymcurveError):
    pass


class OrderMismatch(SymcurveError):
    pass


class NonInvertibleJet(SymcurveError):
    pass


class NilpotencyViolated(SymcurveError):
    pass


class EmptyDiagram(SymcurveError):
    pass


class InvalidDiagram(SymcurveError):
    pass


class NotLastBox(SymcurveError):
    pass


class RowOrderViolated(SymcurveError):
    pass


class AssignmentAmbiguous(SymcurveError):
    pass


class BoxOutOfRange(SymcurveError):
    pass


class ShapeMismatch(SymcurveError):
    pass


class ModelMismatch(SymcurveError):
    pass


class RankDeficientInput(SymcurveError):
    pass


class ClosedFormMismatch(SymcurveError):
    pass


class InconsistentReconstruction(SymcurveError):
    pass


class NotComplementary(SymcurveError):
    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree


class BadFormat(SymcurveError):
    pass


class NotLagrangian(SymcurveError):
    def __init__(self, message, pair=None, value=None):
        super().__init__(message)
        self.pair = pair
        self.value = value


class RankDeficientFrame(SymcurveError):
    pass


class PrecisionExhausted(SymcurveError):
    pass


class NotMonotone(SymcurveError):
    pass


class NotAmple(SymcurveError):
    pass


class NotEquiregular(SymcurveError):
    pass


class JetOrderTooLow(SymcurveError):
    pass


class StageResidualTooLarge(SymcurveError):
    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class StepSizeTooLarge(SymcurveError):
    pass


class NotArcLength(SymcurveError):
    pass


class RegularityFailed(SymcurveError):
    pass
