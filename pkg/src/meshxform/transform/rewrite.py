"""Rewriting algebraic assignments into self-mutating form.

The pass works per procedure:

1. shift incrementalization on recognized stencil sequences,
2. lowering of every assignment whose right-hand side applies an operation
   with a mutating form (rules R2 through R7),
3. clean-up to a fixpoint: merging of sibling temporary scopes (R8),
   flattening of scopes that only hold generated temporaries, and
   coalescing of a local into the variable it is finally copied to.

Every step keeps the per-element arithmetic of the original program, so the
interpreter gives bit-identical outputs for both versions.
"""

from __future__ import annotations

from collections import ChainMap
from dataclasses import replace
from itertools import count

from ..dsl.ast import (
    COMPOUND_OPS,
    EXPENSIVE,
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
    expr_vars,
    mutator_name,
    stmt_names,
)
from ..dsl.signatures import SignatureTable, collect_signatures, infer_type
from ..errors import MeshXformError, TransformError
from .report import TransformReport

RESERVED_PREFIX = "__"


def _operands(e: Expr) -> tuple[str, tuple[Expr, ...]]:
    if isinstance(e, Binary):
        return e.op, (e.left, e.right)
    return e.fn, e.args


def _is_app(e: Expr) -> bool:
    return isinstance(e, (Binary, Call))


def _atomic(e: Expr) -> bool:
    return isinstance(e, (Var, RealLit, IntLit))


# -- renaming ----------------------------------------------------------------


def rename_expr(e: Expr, old: str, new: str) -> Expr:
    if isinstance(e, Var):
        return Var(new) if e.name == old else e
    if isinstance(e, Binary):
        return Binary(e.op, rename_expr(e.left, old, new), rename_expr(e.right, old, new))
    if isinstance(e, Call):
        return Call(e.fn, tuple(rename_expr(a, old, new) for a in e.args))
    return e


def rename_stmt(s: Stmt, old: str, new: str) -> Stmt:
    def n(name: str) -> str:
        return new if name == old else name

    if isinstance(s, VarDecl):
        init = None if s.init is None else rename_expr(s.init, old, new)
        return VarDecl(n(s.name), s.type, init)
    if isinstance(s, Assign):
        return Assign(n(s.target), rename_expr(s.value, old, new))
    if isinstance(s, CompoundAssign):
        return CompoundAssign(n(s.target), s.op, rename_expr(s.value, old, new))
    if isinstance(s, MutCall):
        return MutCall(n(s.receiver), s.method, tuple(rename_expr(a, old, new) for a in s.args))
    if isinstance(s, Return):
        return Return(rename_expr(s.value, old, new))
    return Block(tuple(rename_stmt(t, old, new) for t in s.stmts))


def _replace_expr(e: Expr, target: Expr, new: Expr) -> Expr:
    if e == target:
        return new
    if isinstance(e, Binary):
        return Binary(e.op, _replace_expr(e.left, target, new), _replace_expr(e.right, target, new))
    if isinstance(e, Call):
        return Call(e.fn, tuple(_replace_expr(a, target, new) for a in e.args))
    return e


def _declared(stmts) -> list[VarDecl]:
    return [s for s in stmts if isinstance(s, VarDecl)]


# -- temporaries accounting --------------------------------------------------


def _apps(e: Expr, env, table: SignatureTable) -> int:
    """Expensive operation applications in ``e`` (including ``e`` itself)."""
    if not _is_app(e):
        return 0
    _, args = _operands(e)
    own = 1 if infer_type(e, env, table) in EXPENSIVE else 0
    return own + sum(_apps(a, env, table) for a in args)


def count_temporaries(program: Program, table: SignatureTable) -> int:
    """Static count of expensive intermediates a program materializes.

    Every expensive operation application counts except the outermost one
    of a plain assignment or initializer, whose result lands in the target.
    Generated temporaries (reserved names) count once per declaration.
    """
    total = 0

    def walk(stmts, env: ChainMap) -> None:
        nonlocal total
        for s in stmts:
            if isinstance(s, VarDecl):
                if s.init is not None:
                    total += max(_apps(s.init, env, table) - (1 if _is_app(s.init) else 0), 0)
                if s.name.startswith(RESERVED_PREFIX):
                    total += 1
                env.maps[0][s.name] = s.type
            elif isinstance(s, (Assign, Return)):
                e = s.value
                total += max(_apps(e, env, table) - (1 if _is_app(e) else 0), 0)
            elif isinstance(s, CompoundAssign):
                total += _apps(s.value, env, table)
            elif isinstance(s, MutCall):
                total += sum(_apps(a, env, table) for a in s.args)
            else:
                walk(s.stmts, env.new_child())

    for p in program.procs:
        walk(p.body.stmts, ChainMap({q.name: q.type for q in p.params}))
    return total


# -- lowering ----------------------------------------------------------------


class _Lowering:
    def __init__(self, proc: Proc, table: SignatureTable, report: TransformReport, functions=frozenset()):
        self.proc = proc
        self.table = table
        self.report = report
        self.functions = functions
        self.temps = count()
        self.taken = {q.name for q in proc.params} | stmt_names(proc.body)

    # helpers

    def fresh(self) -> str:
        while True:
            name = f"{RESERVED_PREFIX}t{next(self.temps)}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def type_of(self, e: Expr, env) -> str:
        try:
            return infer_type(e, env, self.table)
        except MeshXformError as exc:
            raise TransformError(f"proc {self.proc.name}: {exc}") from exc

    def decl_of(self, e: Expr, env) -> OpDecl:
        name, args = _operands(e)
        types = tuple(self.type_of(a, env) for a in args)
        d = self.table.lookup(name, types)
        if d is None:
            raise TransformError(f"proc {self.proc.name}: no signature for {name}({', '.join(types)})")
        return d

    def mutating(self, e: Expr, env) -> OpDecl | None:
        """Declaration of ``e`` if it is an expensive application with a mutating form."""
        if not _is_app(e):
            return None
        d = self.decl_of(e, env)
        if d.has_mutating_form and d.result_type in EXPENSIVE:
            return d
        return None

    def warn_unmutable(self, e: Expr, env) -> None:
        if not _is_app(e):
            return
        d = self.decl_of(e, env)
        if d.result_type in EXPENSIVE and not d.has_mutating_form and not self.is_function(d):
            self.report.warnings.append(
                f"proc {self.proc.name}: {d.name}({', '.join(d.operand_types)}) has no self-mutating form; left as is"
            )
        for a in _operands(e)[1]:
            self.warn_unmutable(a, env)

    def is_function(self, d: OpDecl) -> bool:
        return d.name in self.functions

    # the rules

    def assign(self, x: str, e: Expr, env) -> list[Stmt]:
        """Statements that leave the value of ``e`` in ``x``."""
        d = self.mutating(e, env)
        if d is None:
            if e == Var(x):
                return []
            self.warn_unmutable(e, env)
            if isinstance(e, Var) and self.type_of(e, env) in EXPENSIVE:
                self.report.count("R3")
            return [Assign(x, e)]

        _, args = _operands(e)
        u = d.upd_index
        base = args[u]
        others = list(args)
        pointwise = d.name in COMPOUND_OPS and d.arity == 2
        pre: list[Stmt] = []
        if base == Var(x):
            # x = x op e: everything else is evaluated before x changes, except
            # that x itself may only be passed to an element-wise mutator
            risky = [i for i, a in enumerate(args) if i != u and a == Var(x) and not pointwise]
            rule = "R4" if all(_atomic(a) for i, a in enumerate(args) if i != u) else "R5"
            body: list[Stmt] = []
        else:
            # x is overwritten before the remaining operands are consumed
            risky = [i for i, a in enumerate(args) if i != u and x in expr_vars(a)]
            rule = "R6" if u == 0 else "R2"
            body = None
        inner = env.new_child()
        for i in reversed(risky):
            t = self.fresh()
            ty = self.type_of(args[i], env)
            pre += self.declare(t, ty, args[i], inner)
            inner.maps[0][t] = ty
            others[i] = Var(t)
            self.report.count("R7")
        if body is None:
            body = self.assign(x, base, inner)
        self.report.count(rule)
        body += self.mutate(x, d, [a for i, a in enumerate(others) if i != u], inner)
        if pre:
            return [Block(tuple(pre + body))]
        return body

    def declare(self, t: str, ty: str, e: Expr, env) -> list[Stmt]:
        """``var t: ty = e`` in lowered form."""
        if self.mutating(e, env) is None:
            self.warn_unmutable(e, env)
            return [VarDecl(t, ty, e)]
        scope = env.new_child()
        scope.maps[0][t] = ty
        stmts = self.assign(t, e, scope)
        first = stmts[0]
        if not isinstance(first, Assign) or first.target != t:  # pragma: no cover
            raise TransformError(f"internal: cannot declare {t} from lowered form")
        return [VarDecl(t, ty, first.value), *stmts[1:]]

    def mutate(self, x: str, d: OpDecl, args: list[Expr], env) -> list[Stmt]:
        """Apply the mutating form of ``d`` to ``x``; lift complex operands (R7)."""
        lifted: list[Stmt] = []
        final: list[Expr] = []
        scope = env.new_child()
        for a in args:
            ty = self.type_of(a, env)
            if _atomic(a) or ty not in EXPENSIVE:
                final.append(a)
                continue
            t = self.fresh()
            lifted += self.declare(t, ty, a, scope)
            scope.maps[0][t] = ty
            final.append(Var(t))
            self.report.count("R7")
        if d.name in COMPOUND_OPS and d.arity == 2 and d.upd_index == 0:
            stmt: Stmt = CompoundAssign(x, d.name, final[0])
        else:
            stmt = MutCall(x, mutator_name(d.name), tuple(final))
        if lifted:
            return [Block(tuple(lifted + [stmt]))]
        return [stmt]

    # statements

    def block(self, stmts, env) -> list[Stmt]:
        out: list[Stmt] = []
        for s in stmts:
            new = self.stmt(s, env)
            if [s] != new:
                if isinstance(s, (Assign, VarDecl, CompoundAssign, MutCall)):
                    self.report.assignments_rewritten += 1
            out += new
        return out

    def stmt(self, s: Stmt, env) -> list[Stmt]:
        if isinstance(s, VarDecl):
            out = [s]
            if s.init is not None and s.type in EXPENSIVE:
                out = self.declare(s.name, s.type, s.init, env)
            env.maps[0][s.name] = s.type
            return out
        if isinstance(s, Assign):
            if self.mutating(s.value, env) is None:
                self.warn_unmutable(s.value, env)
                return [s]
            return self.assign(s.target, s.value, env)
        if isinstance(s, CompoundAssign):
            if _atomic(s.value):
                return [s]
            tt = env[s.target]
            d = self.table.compound(s.op, tt, self.type_of(s.value, env))
            if d is None:
                raise TransformError(f"proc {self.proc.name}: no self-mutating form for {s.target} {s.op}=")
            return self.mutate(s.target, d, [s.value], env)
        if isinstance(s, MutCall):
            if all(_atomic(a) for a in s.args):
                return [s]
            types = tuple(self.type_of(a, env) for a in s.args)
            d = self.table.find_mutator(s.method, env[s.receiver], types)
            if d is None:
                raise TransformError(f"proc {self.proc.name}: no self-mutating operation {s.receiver}.{s.method}")
            lifted = self.mutate(s.receiver, d, list(s.args), env)
            # keep the method the user wrote; only the operands were lifted
            return _with_call(lifted, s)
        if isinstance(s, Return):
            self.warn_unmutable(s.value, env)
            return [s]
        return [Block(tuple(self.block(s.stmts, env.new_child())))]


def _with_call(stmts: list[Stmt], original: MutCall) -> list[Stmt]:
    last = stmts[-1]
    if isinstance(last, Block):
        inner = list(last.stmts)
        call = inner[-1]
        inner[-1] = MutCall(original.receiver, original.method, call.args)
        return [Block(tuple(inner))]
    return [MutCall(original.receiver, original.method, last.args)]


# -- shift incrementalization ----------------------------------------------


def _stencil_terms(e: Expr) -> list[tuple[Expr, str, Expr, int]]:
    """Subterms ``shift(s, D, k) - shift(s, D, -k)`` with k > 0."""
    out = []
    if isinstance(e, Binary):
        if e.op == "-" and isinstance(e.left, Call) and isinstance(e.right, Call):
            a, b = e.left, e.right
            if (
                a.fn == b.fn == "shift"
                and len(a.args) == len(b.args) == 3
                and isinstance(a.args[0], Var)
                and a.args[0] == b.args[0]
                and a.args[1] == b.args[1]
                and _atomic(a.args[1])
                and isinstance(a.args[2], IntLit)
                and isinstance(b.args[2], IntLit)
                and a.args[2].value > 0
                and b.args[2].value == -a.args[2].value
            ):
                out.append((e, a.args[0].name, a.args[1], a.args[2].value))
        out += _stencil_terms(e.left) + _stencil_terms(e.right)
    elif isinstance(e, Call):
        for x in e.args:
            out += _stencil_terms(x)
    return out


def _rhs(s: Stmt) -> Expr | None:
    if isinstance(s, Assign):
        return s.value
    if isinstance(s, VarDecl):
        return s.init
    return None


def _written(s: Stmt) -> set[str]:
    if isinstance(s, VarDecl):
        return {s.name}
    if isinstance(s, (Assign, CompoundAssign)):
        return {s.target}
    if isinstance(s, MutCall):
        return {s.receiver}
    if isinstance(s, Block):
        out = set()
        for t in s.stmts:
            out |= _written(t)
        return out
    return set()


class _ShiftInc:
    def __init__(self, low: _Lowering):
        self.low = low

    def match(self, s: Stmt):
        e = _rhs(s)
        if e is None:
            return None
        terms = _stencil_terms(e)
        if len(terms) != 1:
            return None
        return terms[0]

    def block(self, stmts, env) -> list[Stmt]:
        stmts = list(stmts)
        out: list[Stmt] = []
        i = 0
        while i < len(stmts):
            run = self.run_at(stmts, i, env)
            if run is None:
                s = stmts[i]
                if isinstance(s, Block):
                    s = Block(tuple(self.block(s.stmts, env.new_child())))
                elif isinstance(s, VarDecl):
                    env.maps[0][s.name] = s.type
                out.append(s)
                i += 1
                continue
            out += self.rewrite(stmts[i : i + run], env)
            i += run
        return out

    def run_at(self, stmts, i, env) -> int | None:
        first = self.match(stmts[i])
        if first is None:
            return None
        _, src, dim, k0 = first
        if src not in env:
            return None
        ty = env[src]
        d = self.low.table.lookup("shift", (ty, "int", "int"))
        if d is None or not d.has_mutating_form or d.upd_index != 0:
            return None
        guarded = {src} | expr_vars(dim)
        n, last = 0, 0
        for s in stmts[i:]:
            m = self.match(s)
            if m is None or m[1] != src or m[2] != dim or m[3] <= last:
                break
            if _written(s) & guarded:
                break
            n, last = n + 1, m[3]
        return n if n >= 2 else None

    def rewrite(self, seq, env) -> list[Stmt]:
        _, src, dim, _ = self.match(seq[0])
        ty = env[src]
        w1, w2 = self.low.fresh(), self.low.fresh()
        out: list[Stmt] = [VarDecl(w1, ty, Var(src)), VarDecl(w2, ty, Var(src))]
        env.maps[0][w1] = ty
        env.maps[0][w2] = ty
        pos = 0
        for s in seq:
            node, _, _, k = self.match(s)
            out.append(MutCall(w1, "ushift", (dim, IntLit(k - pos))))
            out.append(MutCall(w2, "ushift", (dim, IntLit(-(k - pos)))))
            pos = k
            new = Binary("-", Var(w1), Var(w2))
            if isinstance(s, Assign):
                out.append(Assign(s.target, _replace_expr(s.value, node, new)))
            else:
                out.append(VarDecl(s.name, s.type, _replace_expr(s.init, node, new)))
                env.maps[0][s.name] = s.type
        self.low.report.count("SHIFT_INC")
        return out


# -- clean-up passes ---------------------------------------------------------


def _single_temp(s: Stmt) -> VarDecl | None:
    """First statement of a scope that declares exactly one initialized variable."""
    if not isinstance(s, Block) or not s.stmts:
        return None
    first = s.stmts[0]
    if not isinstance(first, VarDecl) or first.init is None:
        return None
    if len(_declared(s.stmts)) != 1:
        return None
    return first


def _plain(s: Stmt) -> bool:
    return isinstance(s, (Assign, CompoundAssign, MutCall))


def _merge_list(stmts: list[Stmt], report: TransformReport | None) -> list[Stmt]:
    stmts = [Block(tuple(_merge_list(list(s.stmts), report))) if isinstance(s, Block) else s for s in stmts]
    changed = True
    while changed:
        changed = False
        for i, s in enumerate(stmts):
            d1 = _single_temp(s)
            if d1 is None:
                continue
            j = i + 1
            while j < len(stmts) and _plain(stmts[j]) and not ({d1.name} & stmt_names(stmts[j])):
                j += 1
            if j >= len(stmts):
                continue
            d2 = _single_temp(stmts[j])
            if d2 is None or d2.type != d1.type:
                continue
            between = stmts[i + 1 : j]
            second = stmts[j]
            if d1.name in stmt_names(second) or any(d2.name in stmt_names(b) for b in between):
                continue
            rest = [rename_stmt(t, d2.name, d1.name) for t in second.stmts[1:]]
            merged = Block((*s.stmts, *between, Assign(d1.name, d2.init), *rest))
            stmts[i : j + 1] = [merged]
            if report is not None:
                report.count("R8")
            changed = True
            break
    return stmts


def merge_temporaries(block: Block, report: TransformReport | None = None) -> Block:
    """Merge sibling scopes that each declare one temporary of the same type.

    ``{var t1: T = e1; s1;} {var t2: T = e2; s2;}`` becomes
    ``{var t1: T = e1; s1; t1 = e2; s2;}``.  Statements between the two scopes
    are moved into the merged scope when they declare nothing and do not
    mention either temporary.
    """
    return Block(tuple(_merge_list(list(block.stmts), report)))


def _flatten_list(stmts) -> list[Stmt]:
    out: list[Stmt] = []
    for s in stmts:
        if isinstance(s, Block):
            inner = _flatten_list(s.stmts)
            decls = _declared(inner)
            if decls and all(d.name.startswith(RESERVED_PREFIX) for d in decls):
                out += inner
            else:
                out.append(Block(tuple(inner)))
        else:
            out.append(s)
    return out


def flatten_temporaries(block: Block) -> Block:
    """Splice scopes whose only declarations are generated temporaries."""
    return Block(tuple(_flatten_list(block.stmts)))


def _coalesce_list(stmts: list[Stmt], env: ChainMap, report: TransformReport | None) -> list[Stmt]:
    out = []
    local = env.new_child()
    for s in stmts:
        if isinstance(s, Block):
            s = Block(tuple(_coalesce_list(list(s.stmts), local, report)))
        elif isinstance(s, VarDecl):
            local.maps[0][s.name] = s.type
        out.append(s)
    stmts = out
    changed = True
    while changed:
        changed = False
        for i, s in enumerate(stmts):
            if not isinstance(s, VarDecl) or s.init is None or s.type not in EXPENSIVE:
                continue
            v = s.name
            for j in range(i + 1, len(stmts)):
                t = stmts[j]
                target = None
                if isinstance(t, Assign) and t.value == Var(v) and t.target != v:
                    target = t.target
                elif isinstance(t, VarDecl) and t.init == Var(v):
                    target = t.name
                if target is not None:
                    break
                if isinstance(t, Return):
                    break
            else:
                continue
            if target is None:
                continue
            between = stmts[i + 1 : j]
            if any(target in stmt_names(b) for b in between):
                continue
            if any(v in stmt_names(b) for b in stmts[j + 1 :]):
                continue
            head: list[Stmt]
            if isinstance(t, Assign):
                head = [] if s.init == Var(target) else [Assign(target, s.init)]
            else:
                head = [VarDecl(target, t.type, s.init)]
            stmts[i : j + 1] = head + [rename_stmt(b, v, target) for b in between]
            if report is not None:
                report.count("COALESCE")
            changed = True
            break
    return stmts


def coalesce(block: Block, params: dict[str, str], report: TransformReport | None = None) -> Block:
    """Compute a local directly in the variable it is finally copied to.

    ``var v: T = e; S; x = v;`` becomes ``x = e; S[v := x];`` when ``S`` does
    not mention ``x`` and ``v`` is dead afterwards.
    """
    return Block(tuple(_coalesce_list(list(block.stmts), ChainMap(dict(params)), report)))


# -- driver --------------------------------------------------------------------


def _cleanup(body: Block, params: dict[str, str], report: TransformReport) -> Block:
    while True:
        new = merge_temporaries(body, report)
        new = flatten_temporaries(new)
        new = coalesce(new, params, report)
        if new == body:
            return new
        body = new


def transform_proc(proc: Proc, table: SignatureTable, report: TransformReport, functions=()) -> Proc:
    if proc.result_type is not None:
        # function procedures are already written against mutating forms
        return proc
    low = _Lowering(proc, table, report, frozenset(functions))
    params = {q.name: q.type for q in proc.params}
    stmts = _ShiftInc(low).block(proc.body.stmts, ChainMap({}, dict(params)))
    stmts = low.block(stmts, ChainMap({}, dict(params)))
    body = _cleanup(Block(tuple(stmts)), params, report)
    return replace(proc, body=body)


def transform_program(p: Program, sigs: SignatureTable | None = None) -> tuple[Program, TransformReport]:
    """Rewrite every procedure into self-mutating form.

    Raises :class:`TransformError` on internal type inconsistencies.  Ops on
    expensive types without a mutating form are left alone and reported in
    ``report.warnings``.
    """
    if sigs is None:
        try:
            sigs = collect_signatures(p)
        except MeshXformError as exc:
            raise TransformError(str(exc)) from exc
    report = TransformReport()
    report.temps_before = count_temporaries(p, sigs)
    functions = {q.name for q in p.procs if q.result_type is not None}
    procs = tuple(transform_proc(q, sigs, report, functions) for q in p.procs)
    out = Program(p.op_decls, procs)
    report.temps_after = count_temporaries(out, sigs)
    return out, report
