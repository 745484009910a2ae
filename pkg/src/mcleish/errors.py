"""Exception hierarchy shared by every module.

Validation problems map to CLI exit code 2 and numerical failures to 3.
"""


class McLeishError(Exception):
    code = "error"


class ValidationError(McLeishError, ValueError):
    code = "validation"


class DomainError(ValidationError):
    code = "domain"


class SizeError(ValidationError):
    code = "size"


class NumericalError(McLeishError, ArithmeticError):
    code = "numerical"


class QuadratureError(NumericalError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""

    code = "quadrature"

    def __init__(self, message, achieved=float("nan"), value=float("nan")):
        super().__init__(message)
        self.achieved = achieved
        self.value = value


class InsufficientDataError(ValidationError):
    code = "insufficient_data"


class SubGaussianKurtosisError(ValidationError):
    """Sample kurtosis at or below 3; the moment fit for nu is undefined."""

    code = "sub_gaussian_kurtosis"

    def __init__(self, message, kurtosis=float("nan")):
        super().__init__(message)
        self.kurtosis = kurtosis
