"""One-dimensional formal group laws over finite fields, at finite precision.

Submodules:

* :mod:`fglab.gf`      finite fields F_{p^n}
* :mod:`fglab.pseries` truncated univariate and bivariate series
* :mod:`fglab.lift`    the standardized height-h law from its logarithm
* :mod:`fglab.fgl`     group laws, axioms, G-arithmetic, law files
* :mod:`fglab.endo`    endomorphism solvers, commutants, valuations, iterates
* :mod:`fglab.lab`     experiment suites and the ``fglab`` command line
"""
from .fgl import FormalGroupLaw, LawError, is_endomorphism, load_golden, standard_law
from .gf import FieldSpec
from .pseries import BivSeries, TruncSeries

__version__ = "0.1.0"

__all__ = [
    "BivSeries",
    "FieldSpec",
    "FormalGroupLaw",
    "LawError",
    "TruncSeries",
    "__version__",
    "is_endomorphism",
    "load_golden",
    "standard_law",
]
