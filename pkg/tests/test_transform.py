from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from programs import MESH_DECLS, random_case

from meshxform import corpus, diff_values, from_array, interpret
from meshxform.dsl import (
    Assign,
    Block,
    CompoundAssign,
    MutCall,
    OpDecl,
    Program,
    Return,
    Var,
    VarDecl,
    collect_signatures,
    parse,
    pretty_print,
)
from meshxform.errors import TransformError
from meshxform.transform import (
    RULE_IDS,
    TransformReport,
    generate_wrappers,
    merge_temporaries,
    transform_program,
)
from meshxform.transform.rewrite import rename_stmt

DECLS = "\n".join(
    [
        "op +(mesh, mesh) -> mesh mut upd 0;",
        "op -(mesh, mesh) -> mesh mut upd 0;",
        "op *(mesh, mesh) -> mesh mut upd 0;",
        "op *(mesh, real) -> mesh mut upd 0;",
        "op shift(mesh, int, int) -> mesh mut upd 0;",
        "op diff(mesh, mesh) -> mesh mut upd 1;",
    ]
)


def body(src: str, params: str = "x: mesh upd, y: mesh, z: mesh, a: mesh, b: mesh, c: mesh upd, r: real"):
    """Transformed body of a one-procedure program, printed."""
    p = parse(f"{DECLS}\nproc k({params}) {{ {src} }}")
    out, _ = transform_program(p)
    return pretty_print(Program((), out.procs)).split("\n", 1)[1].rsplit("}", 1)[0]


def lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.strip().splitlines()]


def canonical(block: Block) -> Block:
    """Rename declared locals in order of declaration, for comparison modulo naming."""
    names = []

    def collect(stmts):
        for s in stmts:
            if isinstance(s, VarDecl):
                names.append(s.name)
            elif isinstance(s, Block):
                collect(s.stmts)

    collect(block.stmts)
    out = block
    for i, n in enumerate(names):
        out = rename_stmt(out, n, f"#{i}")
    return out


def test_kernel_f_becomes_kernel_p():
    f, _ = transform_program(corpus.load("kernel_f"))
    p = corpus.load("kernel_p")
    assert canonical(f.procs[0].body) == canonical(p.procs[0].body)


def test_worked_example():
    assert lines(body("c = a * 4.0 + b + a;")) == ["c = a;", "c *= 4.0;", "c += b;", "c += a;"]


def test_bare_copy_unchanged():
    assert lines(body("x = y;")) == ["x = y;"]


def test_update_in_place():
    assert lines(body("x = x + y;")) == ["x += y;"]
    assert lines(body("x = shift(x, 0, 1);")) == ["x.ushift(0, 1);"]
    assert lines(body("x = x * x;")) == ["x *= x;"]


def test_update_with_complex_operand_lifts_temporary():
    assert lines(body("x = x + y * 2.0;")) == ["var __t0: mesh = y;", "__t0 *= 2.0;", "x += __t0;"]


def test_occurrence_guard():
    # x appears in the second operand, so it is saved before x is overwritten
    assert lines(body("x = y - x;")) == ["var __t0: mesh = x;", "x = y;", "x -= __t0;"]


def test_fold_needs_no_temporaries():
    out, report = transform_program(parse(f"{DECLS}\nproc k(x: mesh upd, a: mesh, b: mesh, c: mesh, d: mesh) {{ x = a + b - c * d; }}"))
    assert report.temps_after == 1  # c * d is a separate subterm
    out, report = transform_program(parse(f"{DECLS}\nproc k(x: mesh upd, a: mesh, b: mesh, c: mesh, d: mesh) {{ x = ((a + b) - c) * d; }}"))
    assert report.temps_after == 0
    assert lines(pretty_print(Program((), out.procs)))[1:-1] == ["x = a;", "x += b;", "x -= c;", "x *= d;"]


def test_second_operand_update():
    assert lines(body("x = diff(y, z * 2.0);")) == ["x = z;", "x *= 2.0;", "x.udiff(y);"]


def test_scalar_expressions_stay_inline():
    assert lines(body("x = x * (r * 2.0);")) == ["x *= r * 2.0;"]


def test_compound_assignment_operand_lifted():
    assert lines(body("x += y * z;")) == ["var __t0: mesh = y;", "__t0 *= z;", "x += __t0;"]


def test_mutating_call_operand_lifted():
    out = lines(body("c.udiff(a + b);"))
    assert out == ["var __t0: mesh = a;", "__t0 += b;", "c.udiff(__t0);"]


def test_declaration_lowered():
    assert lines(body("var t: mesh = a + b; x += t;")) == ["var t: mesh = a;", "t += b;", "x += t;"]


def test_local_computed_in_final_destination():
    assert lines(body("var t: mesh = a + b; c = t;")) == ["c = a;", "c += b;"]


def test_op_without_mutating_form_warns():
    src = "op +(tensor, tensor) -> tensor mut;\nproc k(A: tensor, V: tensor, X: tensor upd) { X = apply(A, V) + V; }"
    out, report = transform_program(parse(src))
    assert len(report.warnings) == 1 and "apply" in report.warnings[0]
    assert lines(pretty_print(Program((), out.procs)))[1:-1] == ["X = apply(A, V);", "X += V;"]


def test_undeclared_mutators_leave_program_alone():
    p = parse("proc k(x: mesh upd, y: mesh) { x = x + y * 2.0; }")
    out, report = transform_program(p)
    assert out == p
    assert report.warnings


def test_ill_typed_program_is_a_transform_error():
    with pytest.raises(TransformError):
        transform_program(parse("proc k(x: mesh upd) { x = y; }"))


def test_uderiv_is_incrementalized():
    out, report = transform_program(corpus.load("uderiv"))
    assert report.rule_counts["SHIFT_INC"] == 1
    text = pretty_print(Program((), out.procs))
    assert "shift(" not in text.replace("ushift(", "")
    assert text.count(".ushift(d, 1)") == 4 and text.count(".ushift(d, -1)") == 4
    decls = [s for s in out.procs[0].body.stmts if isinstance(s, VarDecl)]
    assert len(decls) == 3


def test_shift_pattern_needs_a_sequence():
    # a single stencil term is left to the general rules
    out = body("x = shift(y, 0, 1) - shift(y, 0, -1);")
    assert "ushift(0, 1)" in out and "ushift(0, -1)" in out
    _, report = transform_program(parse(f"{DECLS}\nproc k(x: mesh upd, y: mesh) {{ x = shift(y, 0, 1) - shift(y, 0, -1); }}"))
    assert report.rule_counts["SHIFT_INC"] == 0


def test_shift_pattern_stops_at_writes_to_source():
    src = """
    var a: mesh = shift(x, 0, 1) - shift(x, 0, -1);
    x = x + a;
    var b: mesh = shift(x, 0, 2) - shift(x, 0, -2);
    x = x + b;
    """
    _, report = transform_program(parse(f"{DECLS}\nproc k(x: mesh upd) {{ {src} }}"))
    assert report.rule_counts["SHIFT_INC"] == 0


# merging of temporary scopes


def test_merge_fixture():
    out, report = transform_program(corpus.load("merge_scopes"))
    assert report.rule_counts["R8"] == 1
    (scope,) = out.procs[0].body.stmts
    assert [s for s in scope.stmts if isinstance(s, VarDecl)] == [VarDecl("t1", "mesh", Var("a"))]


def test_merge_temporaries_directly():
    s1 = Block((VarDecl("t1", "mesh", Var("a")), CompoundAssign("x", "+", Var("t1"))))
    s2 = Block((VarDecl("t2", "mesh", Var("b")), CompoundAssign("x", "-", Var("t2"))))
    merged = merge_temporaries(Block((s1, s2)))
    assert merged == Block(
        (
            Block(
                (
                    VarDecl("t1", "mesh", Var("a")),
                    CompoundAssign("x", "+", Var("t1")),
                    Assign("t1", Var("b")),
                    CompoundAssign("x", "-", Var("t1")),
                )
            ),
        )
    )


def test_merge_single_scope_unchanged():
    s1 = Block((VarDecl("t1", "mesh", Var("a")), CompoundAssign("x", "+", Var("t1"))))
    assert merge_temporaries(Block((s1,))) == Block((s1,))


def test_merge_requires_equal_types():
    s1 = Block((VarDecl("t1", "mesh", Var("a")), CompoundAssign("x", "+", Var("t1"))))
    s2 = Block((VarDecl("t2", "real", Var("r")), CompoundAssign("x", "*", Var("t2"))))
    assert merge_temporaries(Block((s1, s2))) == Block((s1, s2))


# wrappers


def test_wrapper_shapes():
    sigs = collect_signatures(corpus.load("mesh_ops"))
    w = generate_wrappers(sigs)
    plus = next(p for p in w.procs if p.name == "plus")
    assert plus.body.stmts == (
        VarDecl("C", "mesh", Var("lhs")),
        CompoundAssign("C", "+", Var("rhs")),
        Return(Var("C")),
    )
    shift = next(p for p in w.procs if p.name == "shift")
    assert shift.body.stmts[1] == MutCall("C", "ushift", (Var("d"), Var("i")))
    assert {p.name for p in w.procs} == {"plus", "minus", "times", "shift"}


def test_wrapper_for_second_operand_update():
    sigs = collect_signatures(parse("op diff(mesh, mesh) -> mesh mut upd 1;"))
    (w,) = generate_wrappers(sigs).procs
    assert w.body.stmts == (VarDecl("C", "mesh", Var("rhs")), MutCall("C", "udiff", (Var("lhs"),)), Return(Var("C")))


def test_wrappers_round_trip_and_type_check():
    w = generate_wrappers(collect_signatures(corpus.load("mesh_ops")))
    again = parse(pretty_print(w))
    assert again == w
    collect_signatures(again)


# report


def test_report_serialization():
    _, report = transform_program(corpus.load("kernel_f"))
    d = report.to_dict()
    assert set(RULE_IDS) <= set(d)
    assert d["temps_before"] == 2 and d["temps_after"] == 1
    assert "R7: 1" in report.to_text()
    assert isinstance(TransformReport().to_json(), str)


@pytest.mark.parametrize("name", corpus.names())
def test_report_is_consistent(name):
    _, report = transform_program(corpus.load(name))
    assert report.temps_after <= report.temps_before + report.rule_counts["R7"]


# whole-corpus and randomized properties


def _no_nested_blocks_in_expressions(p: Program) -> bool:
    # the syntax tree cannot express a mutation inside an expression; checking
    # that the printed program re-parses confirms no such text was emitted
    return parse(pretty_print(p), allow_reserved=True) == p


@pytest.mark.parametrize("name", corpus.names())
def test_idempotent_on_corpus(name):
    once, _ = transform_program(corpus.load(name))
    twice, report = transform_program(once)
    assert twice == once
    assert report.assignments_rewritten == 0
    assert _no_nested_blocks_in_expressions(once)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_random_programs_preserved(seed):
    program, inputs = random_case(seed, max_extent=6)
    out, report = transform_program(program)
    o1, s1 = interpret(program, "kernel", inputs)
    o2, s2 = interpret(out, "kernel", inputs)
    for k in o1:
        assert diff_values(o1[k], o2[k]).equal, pretty_print(program)
    assert s2.meshes_created <= s1.meshes_created
    assert transform_program(out)[0] == out
    assert report.temps_after <= report.temps_before + report.rule_counts["R7"]


def test_random_generator_uses_second_operand_updates():
    assert any(d.upd_index == 1 for d in MESH_DECLS)


def test_inputs_are_not_modified():
    x = from_array(np.arange(4.0))
    interpret(corpus.load("kernel_f"), "F", {"x": x})
    assert x.flat() == [0, 1, 2, 3]


def test_diff_second_operand_semantics():
    p = corpus.load("diff_second")
    out, _ = transform_program(p)
    ins = {"x": from_array([1.0, 2.0]), "a": from_array([10.0, 10.0])}
    r1, _ = interpret(p, "diff_second", ins)
    r2, _ = interpret(out, "diff_second", ins)
    assert r1["x"].flat() == [8.0, 6.0]
    assert r2["x"].bits_equal(r1["x"])


def test_decl_table_can_be_passed_in():
    p = corpus.load("scale_sum")
    sigs = collect_signatures(p)
    assert transform_program(p, sigs)[0] == transform_program(p)[0]
    assert isinstance(sigs.lookup("+", ("mesh", "mesh")), OpDecl)
