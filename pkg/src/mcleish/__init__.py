"""McLeish noise laws, McLeish Q-functions and AWMN channel error-rate tools."""

from ._backend import BACKEND
from .errors import (
    DomainError,
    McLeishError,
    NumericalError,
    QuadratureError,
    SizeError,
    ValidationError,
)
from .special import Normality, QuadratureConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DomainError",
    "McLeishError",
    "Normality",
    "NumericalError",
    "QuadratureConfig",
    "QuadratureError",
    "SizeError",
    "ValidationError",
    "__version__",
]
