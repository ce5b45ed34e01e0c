"""Canonical source text for kernel-language trees."""

from __future__ import annotations

from .ast import (
    Assign,
    Binary,
    Block,
    Call,
    CompoundAssign,
    Expr,
    IntLit,
    MutCall,
    OpDecl,
    Proc,
    Program,
    RealLit,
    Return,
    Stmt,
    Var,
    VarDecl,
)

INDENT = "    "
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, RealLit):
        return e.text
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(format_expr(a) for a in e.args)})"
    prec = _PREC[e.op]
    left = format_expr(e.left)
    right = format_expr(e.right)
    if isinstance(e.left, Binary) and _PREC[e.left.op] < prec:
        left = f"({left})"
    if isinstance(e.right, Binary) and _PREC[e.right.op] <= prec:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def format_stmt(s: Stmt, depth: int = 1) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, VarDecl):
        init = f" = {format_expr(s.init)}" if s.init is not None else ""
        return [f"{pad}var {s.name}: {s.type}{init};"]
    if isinstance(s, Assign):
        return [f"{pad}{s.target} = {format_expr(s.value)};"]
    if isinstance(s, CompoundAssign):
        return [f"{pad}{s.target} {s.op}= {format_expr(s.value)};"]
    if isinstance(s, MutCall):
        return [f"{pad}{s.receiver}.{s.method}({', '.join(format_expr(a) for a in s.args)});"]
    if isinstance(s, Return):
        return [f"{pad}return {format_expr(s.value)};"]
    return _format_block(s, depth)


def _format_block(b: Block, depth: int) -> list[str]:
    pad = INDENT * depth
    lines = [pad + "{"]
    for s in b.stmts:
        lines.extend(format_stmt(s, depth + 1))
    lines.append(pad + "}")
    return lines


def format_opdecl(d: OpDecl) -> str:
    mut = f" mut upd {d.upd_index}" if d.has_mutating_form else ""
    return f"op {d.name}({', '.join(d.operand_types)}) -> {d.result_type}{mut};"


def format_proc(p: Proc) -> str:
    params = ", ".join(f"{q.name}: {q.type}" + (" upd" if q.upd else "") for q in p.params)
    result = f" -> {p.result_type}" if p.result_type else ""
    lines = [f"proc {p.name}({params}){result} {{"]
    for s in p.body.stmts:
        lines.extend(format_stmt(s, 1))
    lines.append("}")
    return "\n".join(lines)


def pretty_print(p: Program) -> str:
    parts = []
    if p.op_decls:
        parts.append("\n".join(format_opdecl(d) for d in p.op_decls))
    parts.extend(format_proc(q) for q in p.procs)
    return "\n\n".join(parts) + "\n" if parts else ""
