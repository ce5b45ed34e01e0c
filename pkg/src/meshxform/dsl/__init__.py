"""The kernel language: syntax tree, parser, printer and declaration pass."""

from .ast import (
    EXPENSIVE,
    TYPES,
    Assign,
    Binary,
    Block,
    Call,
    CompoundAssign,
    IntLit,
    MutCall,
    OpDecl,
    Param,
    Proc,
    Program,
    RealLit,
    Return,
    Var,
    VarDecl,
    mutator_name,
    wrapper_name,
)
from .parser import parse, parse_expr
from .printer import format_expr, pretty_print
from .signatures import LIBRARY_SIGNATURES, SignatureTable, collect_signatures, infer_type

__all__ = [
    "EXPENSIVE",
    "TYPES",
    "Assign",
    "Binary",
    "Block",
    "Call",
    "CompoundAssign",
    "IntLit",
    "MutCall",
    "OpDecl",
    "Param",
    "Proc",
    "Program",
    "RealLit",
    "Return",
    "Var",
    "VarDecl",
    "mutator_name",
    "wrapper_name",
    "parse",
    "parse_expr",
    "format_expr",
    "pretty_print",
    "LIBRARY_SIGNATURES",
    "SignatureTable",
    "collect_signatures",
    "infer_type",
]
