"""Compile structured system descriptions into decomposable NNF and extract minimal diagnoses."""

from .compile import Compilation, CompilationSession, compile_consequence, component_consequences, system_consequence
from .diagnose import DiagnosisResult, make_cardinality, make_kappa, minimal_diagnoses
from .errors import (
    AssignmentError,
    CapExceededError,
    CycleError,
    NotDecomposableError,
    ParseError,
    SsdiagError,
    ValidationError,
)
from .jointree import Jointree, assign_components, build_jointree, parse_jointree, validate_jointree
from .logic import Clause, Instantiation, Literal, Variable
from .nnf import NnfGraph, parse_nnf
from .oracle import brute_diagnoses, brute_minimal
from .ssd import SSD, ComponentDescription, cut_arcs, deshare_assumables, parse_observation, parse_ssd, validate

__all__ = [
    "AssignmentError", "CapExceededError", "Clause", "Compilation", "CompilationSession",
    "ComponentDescription", "CycleError", "DiagnosisResult", "Instantiation", "Jointree",
    "Literal", "NnfGraph", "NotDecomposableError", "ParseError", "SSD", "SsdiagError",
    "ValidationError", "Variable", "assign_components", "brute_diagnoses", "brute_minimal",
    "build_jointree", "compile_consequence", "component_consequences", "cut_arcs",
    "deshare_assumables", "make_cardinality", "make_kappa", "minimal_diagnoses", "parse_jointree",
    "parse_nnf", "parse_observation", "parse_ssd", "system_consequence", "validate",
    "validate_jointree",
]
