"""Numerical toolkit for quasi-Poisson and quasi-Hamiltonian G-spaces.

Submodules:

* :mod:`.lie` compact group models with orthonormal bases
* :mod:`.multivector` multivectors, wedge and Schouten brackets
* :mod:`.qp` quasi-Poisson and quasi-Hamiltonian bundles (G, D(G), ...)
* :mod:`.deformation` the family interpolating between G and its Lie algebra
* :mod:`.implosion` alcove and chamber faces, implosion strata
* :mod:`.quiver` quiver moduli spaces, gluing and contraction
* :mod:`.cob` the two-dimensional cobordism calculus and its functor
* :mod:`.cli` the ``qham`` command line
"""

from .config import DEFAULT_TOLERANCES, QP_BRACKET_CONSTANT, RunConfig, Tolerances
from .errors import (CobordismError, DomainError, QhamError, QuiverError, SingularInputError,
                     UnsupportedModelError)
from .lie import make_group_model

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOLERANCES", "QP_BRACKET_CONSTANT", "RunConfig", "Tolerances", "CobordismError",
    "DomainError", "QhamError", "QuiverError", "SingularInputError", "UnsupportedModelError",
    "make_group_model", "__version__",
]
