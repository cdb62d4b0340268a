"""Similarity metrics for generated assurance cases and rater agreement."""

from ._backend import BACKEND, kendall_counts, lcs_length
from .scores import (
    TEXT_METRICS,
    Aggregate,
    AllTied,
    EmptyInput,
    LengthMismatch,
    Metric,
    MetricError,
    MetricValue,
    aggregate,
    bleu,
    bleu_value,
    canonicalize,
    cosine_tfidf,
    cosine_value,
    exact_match,
    exact_match_value,
    kendall_tau,
    kendall_value,
    score_text,
    tokenize,
)

__all__ = [
    "Aggregate",
    "AllTied",
    "BACKEND",
    "EmptyInput",
    "LengthMismatch",
    "Metric",
    "MetricError",
    "MetricValue",
    "TEXT_METRICS",
    "aggregate",
    "bleu",
    "bleu_value",
    "canonicalize",
    "cosine_tfidf",
    "cosine_value",
    "exact_match",
    "exact_match_value",
    "kendall_counts",
    "kendall_tau",
    "kendall_value",
    "lcs_length",
    "score_text",
    "tokenize",
]
