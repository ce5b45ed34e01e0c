"""Runtime values of the kernel language: typing, copying, text I/O, comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from . import mesh as M
from .errors import ComparisonError, FormatError
from .field import Tensor, TorusScalarField, format_field, format_tensor, parse_field, parse_tensor
from .mesh import Mesh

Value = Union[Mesh, TorusScalarField, Tensor, np.floating, int]


def value_type(v: Any) -> str:
    if isinstance(v, Mesh):
        return "mesh"
    if isinstance(v, TorusScalarField):
        return "field"
    if isinstance(v, Tensor):
        return "tensor"
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("booleans are not kernel values")
    if isinstance(v, (int, np.integer)):
        return "int"
    if isinstance(v, (float, np.floating)):
        return "real"
    raise TypeError(f"not a kernel value: {type(v).__name__}")


def copy_value(v: Value) -> Value:
    if isinstance(v, (Mesh, TorusScalarField, Tensor)):
        return v.copy()
    return v


def format_value(v: Value) -> str:
    t = value_type(v)
    if t == "mesh":
        return M.format_mesh(v)
    if t == "field":
        return format_field(v)
    if t == "tensor":
        return format_tensor(v)
    return f"{t}: {v}\n"


def parse_value(text: str, dtype=None) -> Value:
    head = text.lstrip().split(None, 1)[0] if text.strip() else ""
    if head == "extents:":
        return M.parse_mesh(text, dtype)
    if head == "delta:":
        return parse_field(text, dtype)
    if head == "rows:":
        return parse_tensor(text, dtype)
    body = text.strip()[len(head):].strip()
    try:
        if head == "real:":
            return (dtype or M.default_dtype())(float(body))
        if head == "int:":
            return int(body)
    except ValueError:
        raise FormatError(f"bad {head[:-1]} value {body!r}") from None
    raise FormatError("unrecognized value header; expected extents:, delta:, rows:, real: or int:")


@dataclass
class DiffReport:
    equal: bool
    message: str = "equal"
    index: tuple | None = None
    left: Any = None
    right: Any = None

    def __bool__(self) -> bool:
        return self.equal


def _diff_mesh(a: Mesh, b: Mesh, where: str = "") -> DiffReport:
    if a.extents != b.extents:
        return DiffReport(False, f"{where}extents differ: {list(a.extents)} vs {list(b.extents)}")
    if a.dtype != b.dtype:
        return DiffReport(False, f"{where}element types differ: {a.dtype.name} vs {b.dtype.name}")
    ia = a.data.view(f"u{a.dtype.itemsize}")
    ib = b.data.view(f"u{b.dtype.itemsize}")
    bad = np.argwhere(ia != ib)
    if bad.size == 0:
        return DiffReport(True)
    idx = tuple(int(k) for k in bad[0])
    x, y = a.data[idx].item(), b.data[idx].item()
    return DiffReport(False, f"{where}first difference at index {list(idx)}: {x!r} vs {y!r}", idx, x, y)


def diff_values(a: Value, b: Value) -> DiffReport:
    """Bit-exact comparison of two values of the same kernel type."""
    ta, tb = value_type(a), value_type(b)
    if ta != tb:
        raise ComparisonError(f"cannot compare {ta} with {tb}")
    if ta == "mesh":
        return _diff_mesh(a, b)
    if ta == "field":
        if a.delta != b.delta:
            return DiffReport(False, f"spacings differ: {a.delta!r} vs {b.delta!r}", None, a.delta, b.delta)
        return _diff_mesh(a.msf, b.msf)
    if ta == "tensor":
        if a.shape != b.shape:
            return DiffReport(False, f"tensor shapes differ: {a.shape} vs {b.shape}")
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                f, g = a[i, j], b[i, j]
                if f.delta != g.delta:
                    return DiffReport(False, f"component ({i}, {j}) spacings differ: {f.delta!r} vs {g.delta!r}")
                r = _diff_mesh(f.msf, g.msf, f"component ({i}, {j}) ")
                if not r:
                    return r
        return DiffReport(True)
    if ta == "real":
        x, y = np.asarray(a), np.asarray(b)
        if x.dtype == y.dtype and x.tobytes() == y.tobytes():
            return DiffReport(True)
        return DiffReport(False, f"reals differ: {a!r} vs {b!r}", None, a, b)
    if a == b:
        return DiffReport(True)
    return DiffReport(False, f"ints differ: {a} vs {b}", None, a, b)
