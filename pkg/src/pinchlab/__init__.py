"""Numerical toolkit for pinching families of hyperbolic surfaces.

Submodules
----------
special_functions   log-Gamma, Gauss 2F1, dilogarithm, adaptive quadrature
hyperbolic          Mobius isometries, projective circles, cylinder models
surface             pants groups, graph gluing, length spectra
zeta                Selberg Zeta factors and pinching asymptotics
kernel              resolvent point-pair kernels on elementary cylinders
scattering          hypergeometric modes and approximate scattering matrices
transform           the Selberg transform chain and trace-formula checks
"""

from pinchlab.errors import (
    BudgetExceededError,
    DegenerateInputError,
    DomainError,
    PoleError,
    ToleranceNotMetError,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "DegenerateInputError",
    "DomainError",
    "PoleError",
    "ToleranceNotMetError",
    "__version__",
]
