"""Reference interpreter for kernel-language programs.

Semantics follow the value style of the library: assignment copies, no two
names ever share storage, and every operator application inside an
expression materializes a fresh intermediate.  Compound assignments and
method-style calls dispatch to the in-place library operations.  Allocation
counts come from the mesh library's :class:`~meshxform.mesh.AllocStats`, so
an original program and its rewritten form can be compared directly.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from . import field as F
from . import mesh as M
from .dsl.ast import (
    Assign,
    Binary,
    Block,
    Call,
    CompoundAssign,
    Expr,
    IntLit,
    MutCall,
    Proc,
    Program,
    RealLit,
    Return,
    Stmt,
    Var,
    VarDecl,
    wrapper_name,
)
from .dsl.signatures import SignatureTable, collect_signatures
from .errors import InterpretError, MeshXformError
from .mesh import AllocStats, Mesh
from .values import Value, copy_value, value_type


@dataclass
class Builtin:
    pure: Callable
    # updated argument position -> in-place implementation taking
    # (target, *other arguments in declaration order)
    mutators: dict[int, Callable] = field(default_factory=dict)


def _cheap(op: str, dtype) -> Callable:
    def apply(a, b):
        if isinstance(a, int) and isinstance(b, int) and op != "/":
            return {"+": a + b, "-": a - b, "*": a * b}[op]
        x, y = dtype(a), dtype(b)
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if op == "*":
            return x * y
        with np.errstate(divide="ignore", invalid="ignore"):
            return x / y

    return apply


def builtins(dtype) -> dict[tuple[str, tuple[str, ...]], Builtin]:
    b = {
        ("+", ("mesh", "mesh")): Builtin(M.add, {0: Mesh.uplus}),
        ("-", ("mesh", "mesh")): Builtin(M.sub, {0: Mesh.uminus, 1: Mesh.usub_from}),
        ("*", ("mesh", "mesh")): Builtin(M.mul_elem, {0: Mesh.umult_elem}),
        ("*", ("mesh", "real")): Builtin(M.mul_scalar, {0: Mesh.umult}),
        ("shift", ("mesh", "int", "int")): Builtin(M.shift, {0: Mesh.ushift}),
        ("diff", ("mesh", "mesh")): Builtin(M.sub, {0: Mesh.uminus, 1: Mesh.usub_from}),
        ("+", ("field", "field")): Builtin(F.field_add, {0: F.field_uplus}),
        ("-", ("field", "field")): Builtin(F.field_sub, {0: F.field_uminus}),
        ("*", ("field", "field")): Builtin(F.field_mul, {0: F.field_umult_elem}),
        ("*", ("field", "real")): Builtin(F.field_mul_scalar, {0: F.field_umult}),
        ("shift", ("field", "int", "int")): Builtin(F.field_shift, {0: F.field_ushift}),
        ("deriv", ("field", "int")): Builtin(F.deriv, {0: F.uderiv_incremental}),
        ("+", ("tensor", "tensor")): Builtin(F.tensor_add, {0: F.tensor_uplus}),
        ("-", ("tensor", "tensor")): Builtin(F.tensor_sub, {0: F.tensor_uminus}),
        ("*", ("tensor", "real")): Builtin(F.tensor_mul_scalar, {0: F.tensor_umult_scalar}),
        ("apply", ("tensor", "tensor")): Builtin(F.tensor_apply),
    }
    for op in "+-*/":
        for x in ("real", "int"):
            for y in ("real", "int"):
                b[(op, (x, y))] = Builtin(_cheap(op, dtype))
    return b


_UNSET = object()


class _Frame:
    def __init__(self, bindings: dict[str, Value]):
        self.scopes: list[dict[str, object]] = [bindings]

    def find(self, name: str) -> dict[str, object]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope
        raise InterpretError(f"unbound name {name!r}")

    def get(self, name: str):
        v = self.find(name)[name]
        if v is _UNSET:
            raise InterpretError(f"{name!r} is used before it is assigned")
        return v


class _Returned(Exception):
    def __init__(self, value, fresh: bool):
        self.value = value
        self.fresh = fresh


def _assignable(cur, v) -> bool:
    """Whether ``v`` can be copied into the storage already held by ``cur``."""
    if isinstance(cur, Mesh) and isinstance(v, Mesh):
        return cur.extents == v.extents and cur.dtype == v.dtype
    if isinstance(cur, F.TorusScalarField) and isinstance(v, F.TorusScalarField):
        return cur.delta == v.delta and _assignable(cur.msf, v.msf)
    if isinstance(cur, F.Tensor) and isinstance(v, F.Tensor):
        return cur.shape == v.shape and _assignable(cur[0, 0], v[0, 0])
    return False


class Interpreter:
    def __init__(self, program: Program, table: SignatureTable | None = None, dtype=None):
        self.program = program
        self.table = table if table is not None else collect_signatures(program)
        self.dtype = dtype or M.default_dtype()
        self.library = builtins(self.dtype)
        self.functions = {
            (p.name, tuple(q.type for q in p.params)): p for p in program.procs if p.result_type
        }

    # -- entry point ---------------------------------------------------------

    def run(self, entry: str, inputs: Mapping[str, Value]) -> tuple[dict[str, Value], AllocStats]:
        try:
            proc = self.program.proc(entry)
        except KeyError:
            raise InterpretError(f"no procedure named {entry!r}") from None
        bindings = {}
        for q in proc.params:
            if q.name not in inputs:
                raise InterpretError(f"missing input {q.name!r}")
            v = self._coerce(inputs[q.name], q.type, q.name)
            bindings[q.name] = copy_value(v)
        extra = set(inputs) - {q.name for q in proc.params}
        if extra:
            raise InterpretError(f"unknown inputs {sorted(extra)}")
        with M.alloc_scope() as stats:
            frame = _Frame(bindings)
            try:
                self._block(proc.body.stmts, frame, proc)
                result = None
            except _Returned as r:
                result = r.value
            except MeshXformError as exc:
                if isinstance(exc, InterpretError):
                    raise
                raise InterpretError(f"{type(exc).__name__}: {exc}") from exc
        outputs = {q.name: bindings[q.name] for q in proc.params if q.upd}
        if result is not None:
            outputs["return"] = result
        return outputs, stats

    def _coerce(self, v, ty: str, name: str):
        try:
            vt = value_type(v)
        except TypeError as exc:
            raise InterpretError(f"input {name!r}: {exc}") from None
        if ty == "real" and vt in ("real", "int"):
            return self.dtype(v)
        if vt != ty:
            raise InterpretError(f"input {name!r} has type {vt}, parameter wants {ty}")
        return v

    # -- statements ------------------------------------------------------------

    def _block(self, stmts, frame: _Frame, proc: Proc) -> None:
        for s in stmts:
            self._stmt(s, frame, proc)

    def _stmt(self, s: Stmt, frame: _Frame, proc: Proc) -> None:
        if isinstance(s, VarDecl):
            if s.init is None:
                frame.scopes[-1][s.name] = _UNSET
            else:
                v, fresh = self._eval(s.init, frame)
                frame.scopes[-1][s.name] = v if fresh else copy_value(v)
        elif isinstance(s, Assign):
            scope = frame.find(s.target)
            cur = scope[s.target]
            v, fresh = self._eval(s.value, frame)
            if v is cur:
                return
            if cur is not _UNSET and _assignable(cur, v):
                cur.assign(v)
            else:
                scope[s.target] = v if fresh else copy_value(v)
        elif isinstance(s, CompoundAssign):
            cur = frame.get(s.target)
            v, _ = self._eval(s.value, frame)
            d = self.table.compound(s.op, value_type(cur), value_type(v))
            if d is None:
                raise InterpretError(f"no self-mutating form for {s.target} {s.op}= ...")
            self._mutator(d.key, 0)(cur, v)
        elif isinstance(s, MutCall):
            cur = frame.get(s.receiver)
            vals = [self._eval(a, frame)[0] for a in s.args]
            d = self.table.find_mutator(s.method, value_type(cur), tuple(value_type(v) for v in vals))
            if d is None:
                raise InterpretError(f"no self-mutating operation {s.receiver}.{s.method}")
            self._mutator(d.key, d.upd_index)(cur, *vals)
        elif isinstance(s, Block):
            frame.scopes.append({})
            try:
                self._block(s.stmts, frame, proc)
            finally:
                frame.scopes.pop()
        elif isinstance(s, Return):
            v, fresh = self._eval(s.value, frame)
            if not fresh and isinstance(s.value, Var) and s.value.name not in {q.name for q in proc.params}:
                # a local is returned: the frame dies, so hand its storage over
                fresh = True
            raise _Returned(v, fresh)
        else:  # pragma: no cover
            raise InterpretError(f"unknown statement {s!r}")

    def _mutator(self, key, position: int) -> Callable:
        b = self.library.get(key)
        if b is None or position not in b.mutators:
            raise InterpretError(f"no in-place implementation of {key[0]} updating argument {position}")
        return b.mutators[position]

    # -- expressions ------------------------------------------------------------

    def _eval(self, e: Expr, frame: _Frame):
        """Return ``(value, fresh)``; ``fresh`` values are owned by the caller."""
        if isinstance(e, Var):
            return frame.get(e.name), False
        if isinstance(e, RealLit):
            return self.dtype(e.value), True
        if isinstance(e, IntLit):
            return e.value, True
        if isinstance(e, Binary):
            name, args = e.op, (e.left, e.right)
        else:
            name, args = e.fn, e.args
        vals = [self._eval(a, frame)[0] for a in args]
        types = tuple(value_type(v) for v in vals)
        fn = self.functions.get((wrapper_name(name), types))
        if fn is not None:
            return self._call_function(fn, vals), True
        b = self.library.get((name, types))
        if b is None:
            raise InterpretError(f"no implementation of {name}({', '.join(types)})")
        return b.pure(*vals), True

    def _call_function(self, proc: Proc, vals: list) -> Value:
        # parameters of a function are read-only, so arguments are bound without copying
        frame = _Frame({q.name: v for q, v in zip(proc.params, vals)})
        try:
            self._block(proc.body.stmts, frame, proc)
        except _Returned as r:
            return r.value if r.fresh else copy_value(r.value)
        raise InterpretError(f"function {proc.name} finished without returning")


def interpret(program: Program, entry: str, inputs: Mapping[str, Value], table: SignatureTable | None = None):
    """Run ``entry`` on ``inputs``; return ``(outputs, alloc_stats)``.

    Outputs are the final values of the procedure's ``upd`` parameters.
    Inputs are copied first, so the caller's values are never modified.
    """
    return Interpreter(program, table).run(entry, inputs)
