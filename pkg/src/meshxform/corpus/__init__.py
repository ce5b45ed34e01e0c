"""Kernel sources shipped with the package."""

from __future__ import annotations

from importlib import resources

from ..dsl import Program, parse


def names() -> list[str]:
    files = resources.files(__name__).iterdir()
    return sorted(f.name[:-4] for f in files if f.name.endswith(".sph"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.sph").read_text()


def load(name: str) -> Program:
    return parse(source(name))
