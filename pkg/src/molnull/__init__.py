"""Nullability analysis for MOL, a minimal object language.

Static classification of reference parameters, seeded dynamic tracing, a
call-safety checker with recombinant and conventional call models, table
reporting and a synthetic corpus generator.
"""

from molnull.ir import AbstractionKey, Diagnostic, MolError, Program, parse_files, parse_program, print_program
from molnull.kernels import BACKEND
from molnull.static import (
    DEFINITELY,
    NOT_LOCALLY,
    POSSIBLY,
    NullabilityClass,
    StaticResult,
    fixpoint_analyze,
    summarize_method,
)

__version__ = "0.1.0"

__all__ = [
    "AbstractionKey",
    "BACKEND",
    "DEFINITELY",
    "Diagnostic",
    "MolError",
    "NOT_LOCALLY",
    "NullabilityClass",
    "POSSIBLY",
    "Program",
    "StaticResult",
    "fixpoint_analyze",
    "parse_files",
    "parse_program",
    "print_program",
    "summarize_method",
]
