"""Minimal twists of finite real spectral triples."""
from .catalog import BUILTINS, builtin, irreducible_m2, sm_one_generation, two_point, two_qubit, two_qubit_restricted
from .classify import SearchOptions, SolutionSpace, brute_force_enumerate, classify, linear_solution_space
from .triple import ConstraintReport, FiniteSpectralTriple, RealStructure, verify_axioms
from .twist import AlgebraPair, equivalence_crosscheck, factorize_selfadjoint, validate_twisting_operator

__version__ = "0.1.0"

__all__ = [
    "AlgebraPair",
    "BUILTINS",
    "ConstraintReport",
    "FiniteSpectralTriple",
    "RealStructure",
    "SearchOptions",
    "SolutionSpace",
    "brute_force_enumerate",
    "builtin",
    "classify",
    "equivalence_crosscheck",
    "factorize_selfadjoint",
    "irreducible_m2",
    "linear_solution_space",
    "sm_one_generation",
    "two_point",
    "two_qubit",
    "two_qubit_restricted",
    "validate_twisting_operator",
    "verify_axioms",
]
