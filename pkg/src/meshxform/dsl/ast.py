"""Syntax tree of the kernel language.

Nodes are frozen dataclasses; structural equality ignores source positions,
so a reparsed pretty-print compares equal to the original tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

TYPES = ("mesh", "field", "tensor", "real", "int")
EXPENSIVE = frozenset({"mesh", "field", "tensor"})
COMPOUND_OPS = ("+", "-", "*")
BINARY_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Pos:
    line: int
    col: int


def _pos():
    return field(default=None, compare=False, repr=False)


# -- expressions --------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class RealLit:
    text: str  # kept verbatim so constants survive printing unchanged
    pos: Optional[Pos] = _pos()

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple[Expr, ...]
    pos: Optional[Pos] = _pos()


Expr = Union[Var, RealLit, IntLit, Binary, Call]


# -- statements ---------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str
    init: Optional[Expr] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class CompoundAssign:
    target: str
    op: str  # one of COMPOUND_OPS, without the trailing '='
    value: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class MutCall:
    receiver: str
    method: str
    args: tuple[Expr, ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Block:
    stmts: tuple[Stmt, ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Optional[Pos] = _pos()


Stmt = Union[VarDecl, Assign, CompoundAssign, MutCall, Block, Return]


# -- declarations -------------------------------------------------------------


@dataclass(frozen=True)
class OpDecl:
    name: str
    operand_types: tuple[str, ...]
    result_type: str
    has_mutating_form: bool = False
    upd_index: int = 0
    pos: Optional[Pos] = _pos()

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.operand_types)

    @property
    def arity(self) -> int:
        return len(self.operand_types)


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    upd: bool = False
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Proc:
    name: str
    params: tuple[Param, ...]
    body: Block
    result_type: Optional[str] = None  # set for function procedures (wrappers)
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Program:
    op_decls: tuple[OpDecl, ...] = ()
    procs: tuple[Proc, ...] = ()

    def proc(self, name: str) -> Proc:
        for p in self.procs:
            if p.name == name:
                return p
        raise KeyError(name)


MUTATOR_NAMES = {"+": "uplus", "-": "uminus", "*": "umult", "/": "udiv"}
WRAPPER_NAMES = {"+": "plus", "-": "minus", "*": "times", "/": "divide"}


def mutator_name(op_name: str) -> str:
    """Method name of the self-mutating form of an operator or function."""
    return MUTATOR_NAMES.get(op_name, "u" + op_name)


def wrapper_name(op_name: str) -> str:
    """Name of the generated pure procedure that wraps a mutating form."""
    return WRAPPER_NAMES.get(op_name, op_name)


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Binary):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= expr_vars(a)
        return out
    return set()


def stmt_names(s: Stmt) -> set[str]:
    """Every variable name read, written or declared anywhere in ``s``."""
    if isinstance(s, VarDecl):
        return {s.name} | (expr_vars(s.init) if s.init is not None else set())
    if isinstance(s, Assign):
        return {s.target} | expr_vars(s.value)
    if isinstance(s, CompoundAssign):
        return {s.target} | expr_vars(s.value)
    if isinstance(s, MutCall):
        out = {s.receiver}
        for a in s.args:
            out |= expr_vars(a)
        return out
    if isinstance(s, Return):
        return expr_vars(s.value)
    out = set()
    for t in s.stmts:
        out |= stmt_names(t)
    return out
