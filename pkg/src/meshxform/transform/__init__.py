"""Rewriting of algebraic kernels into self-mutating form."""

from .report import RULE_IDS, TransformReport
from .rewrite import (
    coalesce,
    count_temporaries,
    flatten_temporaries,
    merge_temporaries,
    transform_program,
)
from .wrappers import generate_wrappers, wrapper_for

__all__ = [
    "RULE_IDS",
    "TransformReport",
    "coalesce",
    "count_temporaries",
    "flatten_temporaries",
    "generate_wrappers",
    "merge_temporaries",
    "transform_program",
    "wrapper_for",
]
