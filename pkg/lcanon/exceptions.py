class LcanonError(Exception):
    exit_code = 2


class ValidationError(LcanonError):
    exit_code = 1


class PreconditionError(ValidationError):
    pass


class MathError(LcanonError):
    exit_code = 2


class NumericalFailure(MathError):
    pass


class NotCompletelyPositiveError(MathError):
    pass


class NotAGeneratorError(MathError):
    pass


class InconsistentGeneratorError(MathError):
    pass


class VerificationFailed(MathError):
    pass
