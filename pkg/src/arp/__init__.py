"""Sorted, coloured higher-order unification for parallelism and ellipsis."""
from .pcalc import Abducible, Derivation, Equation, Relation, derive
from .problemfile import load_problem, load_problem_file
from .reconstruct import Options, Problem, Solution, check_certificate, solve
from .sorts import SortHierarchy
from .syntax import Signature, load_hierarchy, load_hierarchy_file, parse_term

__version__ = "0.1.0"

__all__ = [
    "Abducible", "Derivation", "Equation", "Options", "Problem", "Relation",
    "Signature", "Solution", "SortHierarchy", "check_certificate", "derive",
    "load_hierarchy", "load_hierarchy_file", "load_problem", "load_problem_file",
    "parse_term", "solve",
]
