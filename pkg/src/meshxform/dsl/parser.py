"""Recursive-descent parser for ``.sph`` kernel sources.

Grammar::

    program := opdecl* proc*
    opdecl  := "op" opname "(" type ("," type)* ")" "->" type ["mut" ["upd" nat]] ";"
    proc    := "proc" name "(" [param ("," param)*] ")" ["->" type] block
    param   := name ":" type ["upd"]
    block   := "{" stmt* "}"
    stmt    := "var" name ":" type ["=" expr] ";" | name "=" expr ";"
             | name ("+=" | "-=" | "*=") expr ";" | name "." name "(" [args] ")" ";"
             | "return" expr ";" | block
    expr    := expr ("+" | "-") term | term
    term    := term ("*" | "/") factor | factor
    factor  := name "(" [args] ")" | name | ["-"] number | "(" expr ")"

``//`` starts a line comment.  Names beginning with ``__`` are reserved for
compiler temporaries and rejected unless ``allow_reserved`` is set.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import DslSyntaxError
from .ast import (
    COMPOUND_OPS,
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
    Param,
    Pos,
    Proc,
    Program,
    RealLit,
    Return,
    Stmt,
    Var,
    VarDecl,
)

KEYWORDS = frozenset({"op", "proc", "var", "mut", "upd", "return", *TYPES})
RESERVED_PREFIX = "__"

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>->|\+=|-=|\*=|[-+*/(){};:,.=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "number", "punct", "eof"
    text: str
    pos: Pos


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), Pos(line, i - line_start + 1)))
        i = m.end()
    tokens.append(Token("eof", "", Pos(line, i - line_start + 1)))
    return tokens


class Parser:
    def __init__(self, text: str, allow_reserved: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_reserved = allow_reserved

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> DslSyntaxError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return DslSyntaxError(f"{msg}, found {found}", tok.pos.line, tok.pos.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "name") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        tok = self.tok
        self.i += 1
        return tok

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}")
        if tok.text.startswith(RESERVED_PREFIX) and not self.allow_reserved:
            raise DslSyntaxError(
                f"name {tok.text!r} uses the reserved '__' prefix", tok.pos.line, tok.pos.col
            )
        self.i += 1
        return tok

    def type_name(self) -> str:
        tok = self.tok
        if tok.kind == "name" and tok.text in TYPES:
            self.i += 1
            return tok.text
        if tok.kind == "name":
            raise DslSyntaxError(f"unknown type name {tok.text!r}", tok.pos.line, tok.pos.col)
        raise self.error("expected a type")

    # grammar
    def program(self) -> Program:
        decls, procs = [], []
        while self.at("op"):
            decls.append(self.opdecl())
        # functions may be overloaded on parameter types; entry procedures may not
        seen = set()
        while self.at("proc"):
            p = self.proc()
            key = (p.name, tuple(q.type for q in p.params)) if p.result_type else (p.name,)
            if key in seen or (p.name,) in seen or (not p.result_type and any(k[0] == p.name for k in seen)):
                raise DslSyntaxError(f"duplicate procedure {p.name!r}", p.pos.line, p.pos.col)
            seen.add(key)
            procs.append(p)
        if self.tok.kind != "eof":
            raise self.error("expected 'op' or 'proc'")
        return Program(tuple(decls), tuple(procs))

    def opdecl(self) -> OpDecl:
        start = self.expect("op")
        tok = self.tok
        if tok.kind == "punct" and tok.text in ("+", "-", "*", "/"):
            self.i += 1
            name = tok.text
        else:
            name = self.name("operator or function name").text
        self.expect("(")
        types = [self.type_name()]
        while self.accept(","):
            types.append(self.type_name())
        self.expect(")")
        self.expect("->")
        result = self.type_name()
        mut, upd = False, 0
        if self.accept("mut"):
            mut = True
            if self.accept("upd"):
                if self.tok.kind != "number" or not self.tok.text.isdigit():
                    raise self.error("expected argument index after 'upd'")
                upd = int(self.tok.text)
                self.i += 1
        self.expect(";")
        return OpDecl(name, tuple(types), result, mut, upd, pos=start.pos)

    def proc(self) -> Proc:
        start = self.expect("proc")
        name = self.name("procedure name").text
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        seen: set[str] = set()
        for p in params:
            if p.name in seen:
                raise DslSyntaxError(f"duplicate parameter {p.name!r}", p.pos.line, p.pos.col)
            seen.add(p.name)
        result = None
        if self.accept("->"):
            result = self.type_name()
        body = self.block()
        return Proc(name, tuple(params), body, result, pos=start.pos)

    def param(self) -> Param:
        tok = self.name("parameter name")
        self.expect(":")
        ty = self.type_name()
        upd = self.accept("upd")
        return Param(tok.text, ty, upd, pos=tok.pos)

    def block(self) -> Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("expected '}'")
            stmts.append(self.stmt())
        self.expect("}")
        return Block(tuple(stmts), pos=start.pos)

    def stmt(self) -> Stmt:
        tok = self.tok
        if self.at("{"):
            return self.block()
        if self.accept("var"):
            name = self.name("variable name").text
            self.expect(":")
            ty = self.type_name()
            init = self.expr() if self.accept("=") else None
            self.expect(";")
            return VarDecl(name, ty, init, pos=tok.pos)
        if self.accept("return"):
            value = self.expr()
            self.expect(";")
            return Return(value, pos=tok.pos)
        target = self.name("statement").text
        if self.accept("="):
            value = self.expr()
            self.expect(";")
            return Assign(target, value, pos=tok.pos)
        for op in COMPOUND_OPS:
            if self.accept(op + "="):
                value = self.expr()
                self.expect(";")
                return CompoundAssign(target, op, value, pos=tok.pos)
        if self.accept("."):
            method = self.name("method name").text
            args = self.call_args()
            self.expect(";")
            return MutCall(target, method, args, pos=tok.pos)
        raise self.error("expected '=', '+=', '-=', '*=' or '.'")

    def call_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        self.expect(")")
        return tuple(args)

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "punct" and self.tok.text in ("+", "-"):
            op = self.tok
            self.i += 1
            left = Binary(op.text, left, self.term(), pos=op.pos)
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.tok.kind == "punct" and self.tok.text in ("*", "/"):
            op = self.tok
            self.i += 1
            left = Binary(op.text, left, self.factor(), pos=op.pos)
        return left

    def factor(self) -> Expr:
        tok = self.tok
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "number" or (self.at("-") and self.peek().kind == "number"):
            sign = ""
            if self.accept("-"):
                sign = "-"
            num = self.tok
            self.i += 1
            return _number(sign + num.text, tok.pos)
        if tok.kind == "name" and tok.text not in KEYWORDS:
            name = self.name().text
            if self.at("("):
                return Call(name, self.call_args(), pos=tok.pos)
            return Var(name, pos=tok.pos)
        raise self.error("expected an expression")


def _number(text: str, pos: Pos) -> Expr:
    if any(c in text for c in ".eE"):
        if not math.isfinite(float(text)):
            raise DslSyntaxError(f"literal {text} is not a finite real", pos.line, pos.col)
        return RealLit(text, pos=pos)
    return IntLit(int(text), pos=pos)


def parse(text: str, allow_reserved: bool = False) -> Program:
    return Parser(text, allow_reserved).program()


def parse_expr(text: str, allow_reserved: bool = False) -> Expr:
    p = Parser(text, allow_reserved)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    return e
