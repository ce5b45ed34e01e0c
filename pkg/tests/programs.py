"""Random straight-line mesh programs and matching inputs."""

from __future__ import annotations

import random

import numpy as np

from meshxform import from_array
from meshxform.dsl import (
    Assign,
    Binary,
    Block,
    Call,
    CompoundAssign,
    IntLit,
    OpDecl,
    Param,
    Proc,
    Program,
    RealLit,
    Var,
    VarDecl,
)

MESH_DECLS = (
    OpDecl("+", ("mesh", "mesh"), "mesh", True, 0),
    OpDecl("-", ("mesh", "mesh"), "mesh", True, 0),
    OpDecl("*", ("mesh", "mesh"), "mesh", True, 0),
    OpDecl("*", ("mesh", "real"), "mesh", True, 0),
    OpDecl("shift", ("mesh", "int", "int"), "mesh", True, 0),
    OpDecl("diff", ("mesh", "mesh"), "mesh", True, 1),
)

REALS = ("0.5", "2.0", "-1.25", "0.1", "3.0")


class ProgramGen:
    def __init__(self, rng: random.Random, rank: int):
        self.rng = rng
        self.rank = rank

    def real(self, scalars: list[str], depth: int):
        r = self.rng.random()
        if depth > 0 and r < 0.25:
            return Binary(self.rng.choice("+-*/"), self.real(scalars, depth - 1), self.real(scalars, depth - 1))
        if scalars and r < 0.6:
            return Var(self.rng.choice(scalars))
        return RealLit(self.rng.choice(REALS))

    def mesh(self, meshes: list[str], scalars: list[str], depth: int):
        rng = self.rng
        if depth == 0 or rng.random() < 0.3:
            return Var(rng.choice(meshes))
        k = rng.random()
        if k < 0.5:
            op = rng.choice("+-*")
            return Binary(op, self.mesh(meshes, scalars, depth - 1), self.mesh(meshes, scalars, depth - 1))
        if k < 0.7:
            return Binary("*", self.mesh(meshes, scalars, depth - 1), self.real(scalars, 1))
        if k < 0.85:
            d = rng.randrange(self.rank)
            return Call("shift", (self.mesh(meshes, scalars, depth - 1), IntLit(d), IntLit(rng.randint(-3, 3))))
        return Call("diff", (self.mesh(meshes, scalars, depth - 1), self.mesh(meshes, scalars, depth - 1)))

    def program(self, max_stmts: int = 8) -> Program:
        rng = self.rng
        n_in = rng.randint(1, 3)
        params = [Param(f"m{i}", "mesh", upd=rng.random() < 0.6) for i in range(n_in)]
        params.append(Param("out", "mesh", upd=True))
        params.append(Param("r", "real"))
        meshes = [p.name for p in params if p.type == "mesh"]
        writable = [p.name for p in params if p.upd]
        scalars = ["r"]
        body = []
        for i in range(rng.randint(1, max_stmts)):
            k = rng.random()
            if k < 0.2:
                name = f"v{i}"
                body.append(VarDecl(name, "mesh", self.mesh(meshes, scalars, rng.randint(0, 3))))
                meshes.append(name)
                writable.append(name)
            elif k < 0.3:
                name = f"s{i}"
                body.append(VarDecl(name, "real", self.real(scalars, 2)))
                scalars.append(name)
            elif k < 0.85:
                body.append(Assign(rng.choice(writable), self.mesh(meshes, scalars, rng.randint(1, 3))))
            else:
                op = rng.choice("+-*")
                body.append(CompoundAssign(rng.choice(writable), op, self.mesh(meshes, scalars, rng.randint(0, 2))))
        # make locals observable
        for name in meshes:
            if name.startswith("v"):
                body.append(CompoundAssign("out", "+", Var(name)))
        return Program(MESH_DECLS, (Proc("kernel", tuple(params), Block(tuple(body))),))


def random_case(seed: int, max_extent: int = 16):
    """A random program together with inputs for its entry procedure."""
    rng = random.Random(seed)
    rank = rng.randint(1, 3)
    program = ProgramGen(rng, rank).program()
    ext = tuple(rng.randint(1, max_extent) for _ in range(rank))
    nrng = np.random.default_rng(seed)
    inputs = {}
    for p in program.procs[0].params:
        if p.type == "mesh":
            inputs[p.name] = from_array(nrng.uniform(-2.0, 2.0, size=ext))
        else:
            inputs[p.name] = nrng.uniform(-2.0, 2.0)
    return program, inputs
