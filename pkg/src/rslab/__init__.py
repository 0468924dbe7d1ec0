"""Numerical and exact tools for the second moment of Hecke eigenvalues of Δ.

Modules: ``forms`` (τ(n), λ(n) and the derived symmetric-square and isobaric
coefficients), ``lfunctions`` (ζ(s), L(1, Sym²Δ), c_φ), ``weights`` and
``sums`` (partial and smoothed sums, Δ₂, exponent fits), ``oscillatory``
(quadrature, stationary phase, Poisson), ``bilinear`` (dual sums and their
regime bounds), ``exponents`` (exact exponent chain) and ``cli``.
"""

from .errors import (AccuracyError, DomainError, FormatError, InvalidArgumentError,
                     NoSolutionError, NoStationaryPointError, RangeError, RslabError,
                     VerificationFailure, WindowError)
from .forms import (DerivedCoeffTable, FourierTable, build_derived_table, build_fourier_table,
                    load_table, save_table)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "DerivedCoeffTable", "DomainError", "FormatError", "FourierTable",
    "InvalidArgumentError", "NoSolutionError", "NoStationaryPointError", "RangeError",
    "RslabError", "VerificationFailure", "WindowError", "build_derived_table",
    "build_fourier_table", "load_table", "save_table",
]
