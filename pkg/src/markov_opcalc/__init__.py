"""Operator calculus for Markov-type functions ``f(z) = int z/(t - z) dtau(t)``.

Matrix functions ``f(A)``, certified resolvent constants, perturbation
bounds, Fréchet derivatives and Taylor series, and a trace formula through
a spectral shift function.
"""

from ._version import __version__
from .contours import ContourSpec
from .errors import (CertificateMismatchError, ContourError, DivergenceError, DomainError,
                     IllConditionedError, NotInClassError, OpCalcError, PreconditionError,
                     QuadratureError, RadiusError, SpectrumHitError)
from .frechet import (fd_order_check, fprime_of_A, frechet_continuity_probe, frechet_derivative,
                      taylor_coeff, taylor_eval)
from .funcalc import apply, oracle_contour, oracle_eig
from .matrixcore import IdealNorm, norm, resolvent, trace
from .measure import (JacobiDensity, RepresentingMeasure, first_moment, integrate,
                      inverse_moment, total_mass)
from .opclass import OperatorCertificate, certify_V0b, certify_Vab, perturbation_budget
from .perturb import (BoundReport, bound_thm1, bound_thm2_pointwise, bound_thm3_ideal,
                      commutator_bound, moment_inequalities, stability_sweep)
from .shift import ShiftFunction, build_xi, phi, trace_formula_check
from .symbols import (MarkovSymbol, SymbolClass, atom_symbol, check_membership, eval_derivative,
                      evaluate, example1a, example1b)

__all__ = [
    "__version__",
    "ContourSpec",
    "CertificateMismatchError",
    "ContourError",
    "DivergenceError",
    "DomainError",
    "IllConditionedError",
    "NotInClassError",
    "OpCalcError",
    "PreconditionError",
    "QuadratureError",
    "RadiusError",
    "SpectrumHitError",
    "fd_order_check",
    "fprime_of_A",
    "frechet_continuity_probe",
    "frechet_derivative",
    "taylor_coeff",
    "taylor_eval",
    "apply",
    "oracle_contour",
    "oracle_eig",
    "IdealNorm",
    "norm",
    "resolvent",
    "trace",
    "JacobiDensity",
    "RepresentingMeasure",
    "first_moment",
    "integrate",
    "inverse_moment",
    "total_mass",
    "OperatorCertificate",
    "certify_V0b",
    "certify_Vab",
    "perturbation_budget",
    "BoundReport",
    "bound_thm1",
    "bound_thm2_pointwise",
    "bound_thm3_ideal",
    "commutator_bound",
    "moment_inequalities",
    "stability_sweep",
    "ShiftFunction",
    "build_xi",
    "phi",
    "trace_formula_check",
    "MarkovSymbol",
    "SymbolClass",
    "atom_symbol",
    "check_membership",
    "eval_derivative",
    "evaluate",
    "example1a",
    "example1b",
]
