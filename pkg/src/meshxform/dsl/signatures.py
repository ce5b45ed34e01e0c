"""Declaration collection and type checking (the first pass).

``collect_signatures`` records, for every operator and function a program
uses, whether a self-mutating implementation exists and which argument it
updates.  The rewrite pass relies on this table being total.
"""

from __future__ import annotations

from collections import ChainMap
from collections.abc import Iterator, Mapping

from ..errors import DeclarationError, TypeCheckError
from .ast import (
    EXPENSIVE,
    TYPES,
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
    mutator_name,
)

Key = tuple[str, tuple[str, ...]]


def _library() -> dict[Key, str]:
    sigs: dict[Key, str] = {}
    for t in ("mesh", "field", "tensor"):
        sigs[("+", (t, t))] = t
        sigs[("-", (t, t))] = t
        sigs[("*", (t, "real"))] = t
    sigs[("*", ("mesh", "mesh"))] = "mesh"
    sigs[("*", ("field", "field"))] = "field"
    sigs[("shift", ("mesh", "int", "int"))] = "mesh"
    sigs[("shift", ("field", "int", "int"))] = "field"
    sigs[("diff", ("mesh", "mesh"))] = "mesh"
    sigs[("deriv", ("field", "int"))] = "field"
    sigs[("apply", ("tensor", "tensor"))] = "tensor"
    for op in "+-*/":
        for a in ("real", "int"):
            for b in ("real", "int"):
                both_int = a == b == "int" and op != "/"
                sigs[(op, (a, b))] = "int" if both_int else "real"
    return sigs


# Result types of the operations the runtime library provides.  Used to type
# operations that a program calls without declaring them.
LIBRARY_SIGNATURES: dict[Key, str] = _library()


class SignatureTable(Mapping):
    """Map from ``(name, operand types)`` to :class:`OpDecl`."""

    def __init__(self, entries: Mapping[Key, OpDecl] | None = None):
        self._entries: dict[Key, OpDecl] = dict(entries or {})

    def __getitem__(self, key: Key) -> OpDecl:
        return self._entries[key]

    def __iter__(self) -> Iterator[Key]:
        return iter(sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"SignatureTable({len(self)} entries)"

    def lookup(self, name: str, types: tuple[str, ...]) -> OpDecl | None:
        return self._entries.get((name, types))

    def add(self, decl: OpDecl) -> None:
        self._entries[decl.key] = decl

    def mutating(self) -> list[OpDecl]:
        return [self._entries[k] for k in self if self._entries[k].has_mutating_form]

    def compound(self, op: str, target_type: str, rhs_type: str) -> OpDecl | None:
        """Declaration behind ``x op= e``: a mutating form updating operand 0."""
        d = self.lookup(op, (target_type, rhs_type))
        if d is not None and d.has_mutating_form and d.upd_index == 0:
            return d
        return None

    def find_mutator(self, method: str, receiver_type: str, arg_types: tuple[str, ...]) -> OpDecl | None:
        """Declaration behind ``r.method(args)``; the receiver sits at ``upd_index``."""
        for d in self._entries.values():
            if not d.has_mutating_form or mutator_name(d.name) != method:
                continue
            if d.arity != len(arg_types) + 1:
                continue
            full = arg_types[: d.upd_index] + (receiver_type,) + arg_types[d.upd_index:]
            if full == d.operand_types:
                return d
        return None


def validate_decl(d: OpDecl) -> None:
    for t in (*d.operand_types, d.result_type):
        if t not in TYPES:
            raise DeclarationError(f"op {d.name}: unknown type {t!r}")
    if not d.operand_types:
        raise DeclarationError(f"op {d.name}: needs at least one operand")
    if d.has_mutating_form:
        if not 0 <= d.upd_index < d.arity:
            raise DeclarationError(f"op {d.name}: upd index {d.upd_index} out of range for arity {d.arity}")
        updated = d.operand_types[d.upd_index]
        if updated != d.result_type:
            raise DeclarationError(f"op {d.name}: updated operand type {updated} differs from result {d.result_type}")
        if updated not in EXPENSIVE:
            raise DeclarationError(f"op {d.name}: mutating form on cheap type {updated}")


def _base_table(program: Program) -> SignatureTable:
    table = SignatureTable()
    for d in program.op_decls:
        validate_decl(d)
        prev = table.lookup(*d.key)
        if prev is not None and prev != d:
            raise DeclarationError(f"conflicting declarations for {d.name}({', '.join(d.operand_types)})")
        table.add(d)
    for p in program.procs:
        if p.result_type is None:
            continue
        key = (p.name, tuple(q.type for q in p.params))
        if table.lookup(*key) is None:
            table.add(OpDecl(p.name, key[1], p.result_type))
    return table


def infer_type(e: Expr, env: Mapping[str, str], table: SignatureTable) -> str:
    """Type of ``e`` given variable types ``env``; every op must be in ``table``."""
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise TypeCheckError(f"unbound name {e.name!r}") from None
    if isinstance(e, RealLit):
        return "real"
    if isinstance(e, IntLit):
        return "int"
    name, args = (e.op, (e.left, e.right)) if isinstance(e, Binary) else (e.fn, e.args)
    types = tuple(infer_type(a, env, table) for a in args)
    d = table.lookup(name, types)
    if d is None:
        raise TypeCheckError(f"no operation {name}({', '.join(types)})")
    return d.result_type


def op_key(e: Binary | Call, env: Mapping[str, str], table: SignatureTable) -> Key:
    args = (e.left, e.right) if isinstance(e, Binary) else e.args
    name = e.op if isinstance(e, Binary) else e.fn
    return (name, tuple(infer_type(a, env, table) for a in args))


class _Collector:
    def __init__(self, program: Program):
        self.program = program
        self.table = _base_table(program)

    def resolve(self, name: str, types: tuple[str, ...]) -> str:
        d = self.table.lookup(name, types)
        if d is not None:
            return d.result_type
        result = LIBRARY_SIGNATURES.get((name, types))
        if result is None:
            raise DeclarationError(f"undeclared operation {name}({', '.join(types)})")
        self.table.add(OpDecl(name, types, result))
        return result

    def expr(self, e: Expr, env: Mapping[str, str]) -> str:
        if isinstance(e, Var):
            if e.name not in env:
                raise TypeCheckError(f"unbound name {e.name!r}")
            return env[e.name]
        if isinstance(e, RealLit):
            return "real"
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, Binary):
            return self.resolve(e.op, (self.expr(e.left, env), self.expr(e.right, env)))
        return self.resolve(e.fn, tuple(self.expr(a, env) for a in e.args))

    def proc(self, p: Proc) -> None:
        env = ChainMap({q.name: q.type for q in p.params})
        writable = {q.name for q in p.params if q.upd}
        stmts = p.body.stmts
        for i, s in enumerate(stmts):
            if isinstance(s, Return) and (p.result_type is None or i != len(stmts) - 1):
                raise TypeCheckError(f"proc {p.name}: 'return' only allowed as the last statement of a function")
        if p.result_type is not None and not (stmts and isinstance(stmts[-1], Return)):
            raise TypeCheckError(f"function {p.name} must end with 'return'")
        self.block(stmts, env, writable, p)

    def block(self, stmts, env: ChainMap, writable: set[str], p: Proc) -> None:
        for s in stmts:
            self.stmt(s, env, writable, p)

    def stmt(self, s: Stmt, env: ChainMap, writable: set[str], p: Proc) -> None:
        where = f"proc {p.name}"
        if isinstance(s, VarDecl):
            if s.name in env:
                raise TypeCheckError(f"{where}: {s.name!r} is already declared in an enclosing scope")
            if s.init is not None:
                t = self.expr(s.init, env)
                if t != s.type:
                    raise TypeCheckError(f"{where}: cannot initialize {s.type} {s.name!r} with {t}")
            env.maps[0][s.name] = s.type
            writable.add(s.name)
        elif isinstance(s, Assign):
            tt = self._target(s.target, env, writable, where)
            t = self.expr(s.value, env)
            if t != tt:
                raise TypeCheckError(f"{where}: cannot assign {t} to {tt} {s.target!r}")
        elif isinstance(s, CompoundAssign):
            tt = self._target(s.target, env, writable, where)
            rt = self.expr(s.value, env)
            self.resolve(s.op, (tt, rt))
            if self.table.compound(s.op, tt, rt) is None:
                raise TypeCheckError(f"{where}: no self-mutating form for {s.target} {s.op}= ({tt}, {rt})")
        elif isinstance(s, MutCall):
            tt = self._target(s.receiver, env, writable, where)
            types = tuple(self.expr(a, env) for a in s.args)
            if self.table.find_mutator(s.method, tt, types) is None:
                raise TypeCheckError(f"{where}: no self-mutating operation {s.receiver}.{s.method}({', '.join(types)})")
        elif isinstance(s, Return):
            t = self.expr(s.value, env)
            if t != p.result_type:
                raise TypeCheckError(f"{where}: returns {t}, declared {p.result_type}")
        else:
            if any(isinstance(t, Return) for t in s.stmts):
                raise TypeCheckError(f"{where}: 'return' inside a nested block")
            inner = env.new_child()
            self.block(s.stmts, inner, set(writable), p)
            # names declared inside are not writable outside
            return

    def _target(self, name: str, env: Mapping[str, str], writable: set[str], where: str) -> str:
        if name not in env:
            raise TypeCheckError(f"{where}: unbound name {name!r}")
        if name not in writable:
            raise TypeCheckError(f"{where}: {name!r} is a read-only parameter")
        return env[name]


def collect_signatures(program: Program) -> SignatureTable:
    """First pass: gather declarations and type every operation in use.

    Raises :class:`DeclarationError` for conflicting or malformed declarations
    and for operations with no declaration and no library signature, and
    :class:`TypeCheckError` for ill-typed procedures.
    """
    c = _Collector(program)
    for p in program.procs:
        c.proc(p)
    return c.table


def is_expensive(t: str) -> bool:
    return t in EXPENSIVE
