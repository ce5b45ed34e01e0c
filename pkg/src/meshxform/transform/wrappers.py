"""Pure wrapper procedures generated from self-mutating declarations."""

from __future__ import annotations

from ..dsl.ast import (
    COMPOUND_OPS,
    Block,
    CompoundAssign,
    MutCall,
    OpDecl,
    Param,
    Proc,
    Program,
    Return,
    Var,
    VarDecl,
    mutator_name,
    wrapper_name,
)
from ..dsl.signatures import SignatureTable

RESULT = "C"


def _param_names(d: OpDecl) -> list[str]:
    if d.name == "shift" and d.arity == 3:
        return ["m", "d", "i"]
    if d.arity == 2:
        return ["lhs", "rhs"]
    if d.arity == 1:
        return ["arg"]
    return [f"a{i}" for i in range(d.arity)]


def wrapper_for(d: OpDecl) -> Proc:
    """``{ var C: T = <updated arg>; C op= <others>; return C; }``"""
    names = _param_names(d)
    params = tuple(Param(n, t) for n, t in zip(names, d.operand_types))
    u = d.upd_index
    others = tuple(Var(n) for i, n in enumerate(names) if i != u)
    if d.name in COMPOUND_OPS and d.arity == 2 and u == 0:
        mutate = CompoundAssign(RESULT, d.name, others[0])
    else:
        mutate = MutCall(RESULT, mutator_name(d.name), others)
    body = Block((VarDecl(RESULT, d.result_type, Var(names[u])), mutate, Return(Var(RESULT))))
    return Proc(wrapper_name(d.name), params, body, d.result_type)


def generate_wrappers(sigs: SignatureTable) -> Program:
    """One pure procedure per operation that has a self-mutating form.

    The returned program carries the mutating declarations it depends on, so
    it parses, type-checks and runs on its own.
    """
    decls = tuple(sigs.mutating())
    return Program(decls, tuple(wrapper_for(d) for d in decls))
