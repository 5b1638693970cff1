"""A chase engine and first-order logic toolkit for existential Horn clauses."""
from .chase import ChaseConfig, ChaseResult, chase, chase_check, load_theory, pushout
from .evaluator import find_homomorphism, hom_equivalent, match, satisfies
from .instance import ChaseFailure, Instance
from .logic import ClassifyError, Dependency, classify, free_vars, well_formed
from .tptp import parse_facts, parse_tptp, print_facts, print_tptp

__all__ = [
    "ChaseConfig", "ChaseFailure", "ChaseResult", "ClassifyError", "Dependency", "Instance",
    "chase", "chase_check", "classify", "find_homomorphism", "free_vars", "hom_equivalent",
    "load_theory", "match", "parse_facts", "parse_tptp", "print_facts", "print_tptp",
    "pushout", "satisfies", "well_formed",
]
__version__ = "0.1.0"
