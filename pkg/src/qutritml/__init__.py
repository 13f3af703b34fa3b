"""Two-qutrit entanglement toolkit.

Generates labeled random-state datasets (separable / bound entangled /
NPT), certifies entanglement through generalized-robustness witness
optimization, encodes states as 80-coefficient tomograms, and trains
classifiers and a robustness regressor on those tomograms.
"""

__version__ = "1.0.0"

from .errors import (
    DimensionError,
    FormatError,
    NumericalError,
    PreconditionError,
    QutritmlError,
    SolverError,
)

__all__ = [
    "DimensionError",
    "FormatError",
    "NumericalError",
    "PreconditionError",
    "QutritmlError",
    "SolverError",
    "__version__",
]
