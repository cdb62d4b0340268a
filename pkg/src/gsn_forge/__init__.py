"""Predicate-based GSN pattern tooling and an LLM instantiation harness."""

from .core import (
    AnnotationKind,
    CardinalityLabel,
    Decorator,
    Element,
    ElementKind,
    GsnError,
    GsnGraph,
    PatternAnnotation,
    RelationKind,
    Relationship,
    Summary,
    compute_depths,
    count_summary,
    is_instantiated_case,
    is_pattern,
)
from .instantiator import BindingPlan, diff_structure, instantiate
from .predicate import parse_document, serialize
from .prose import parse_prose, render_prose
from .validator import Diagnostic, validate

__version__ = "0.1.0"

__all__ = [
    "AnnotationKind",
    "BindingPlan",
    "CardinalityLabel",
    "Decorator",
    "Diagnostic",
    "Element",
    "ElementKind",
    "GsnError",
    "GsnGraph",
    "PatternAnnotation",
    "RelationKind",
    "Relationship",
    "Summary",
    "compute_depths",
    "count_summary",
    "diff_structure",
    "instantiate",
    "is_instantiated_case",
    "is_pattern",
    "parse_document",
    "parse_prose",
    "render_prose",
    "serialize",
    "validate",
]
