"""MPS parsing, MIPLIB-style constraint classification, and instance filtering."""

from .classify import ConstraintType, StructureHistogram, classify_constraint, histogram
from .filter import FilterDecision, miplib_filter
from .reader import (
    Constraint,
    MilpInstance,
    Sense,
    Variable,
    VarKind,
    parse_mps,
    write_mps,
)

__all__ = [
    "Constraint",
    "ConstraintType",
    "FilterDecision",
    "MilpInstance",
    "Sense",
    "StructureHistogram",
    "VarKind",
    "Variable",
    "classify_constraint",
    "histogram",
    "miplib_filter",
    "parse_mps",
    "write_mps",
]
