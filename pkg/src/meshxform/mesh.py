"""Rank-n periodic meshes of reals.

Every operation comes in two forms: a pure one that returns a fresh mesh and
leaves its inputs alone (``add``, ``shift`` ...), and a self-mutating method
that updates the receiver in place and returns nothing (``uplus``,
``ushift`` ...).  Mesh creation and element writes are counted in the active
:func:`alloc_scope` so that the cost of temporaries can be measured.

Shift convention: ``shift(m, d, i)[k] == m[(k + i) % extent_d]`` along
dimension ``d``.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from collections.abc import Iterator, Sequence
from dataclasses import asdict, dataclass

import numpy as np

from .errors import AliasingError, DimensionError, FormatError, ShapeError

PRECISIONS = {"single": np.float32, "double": np.float64}
PRECISION_ENV = "MESHXFORM_PRECISION"


def _precision_from_env() -> type[np.floating]:
    name = os.environ.get(PRECISION_ENV, "single").strip().lower()
    if name not in PRECISIONS:
        raise ValueError(f"{PRECISION_ENV} must be one of {sorted(PRECISIONS)}, got {name!r}")
    return PRECISIONS[name]


_dtype: type[np.floating] = _precision_from_env()


def default_dtype() -> type[np.floating]:
    return _dtype


def set_precision(name: str) -> None:
    global _dtype
    try:
        _dtype = PRECISIONS[name]
    except KeyError:
        raise ValueError(f"unknown precision {name!r}") from None


@contextlib.contextmanager
def precision(name: str) -> Iterator[None]:
    """Temporarily switch the element type used for new meshes."""
    global _dtype
    saved = _dtype
    set_precision(name)
    try:
        yield
    finally:
        _dtype = saved


# -- allocation accounting -------------------------------------------------


@dataclass
class AllocStats:
    meshes_created: int = 0
    meshes_copied: int = 0
    elements_written: int = 0
    # arithmetic passes over mesh data: elementwise ops and shifts
    traversals: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


_scopes: contextvars.ContextVar[tuple[AllocStats, ...]] = contextvars.ContextVar(
    "meshxform_alloc_scopes", default=()
)


@contextlib.contextmanager
def alloc_scope() -> Iterator[AllocStats]:
    """Count mesh allocations made inside the ``with`` block.

    Scopes nest; an operation is recorded in every enclosing scope of the
    current context.  Nothing is recorded when no scope is active.
    """
    stats = AllocStats()
    token = _scopes.set(_scopes.get() + (stats,))
    try:
        yield stats
    finally:
        _scopes.reset(token)


def _record_new(size: int, copied: bool = False, traversal: bool = False) -> None:
    for s in _scopes.get():
        s.meshes_created += 1
        s.elements_written += size
        if copied:
            s.meshes_copied += 1
        if traversal:
            s.traversals += 1


def _record_write(size: int, traversal: bool = True) -> None:
    for s in _scopes.get():
        s.elements_written += size
        if traversal:
            s.traversals += 1


# -- the mesh type ------------------------------------------------------------


class Mesh:
    """A rank-n array of reals with periodic (torus) indexing.

    ``data`` is an owned, C-contiguous numpy array; meshes never share
    storage unless a caller deliberately wraps a view.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        if data.ndim < 1 or 0 in data.shape:
            raise ShapeError(f"mesh needs rank >= 1 and positive extents, got shape {data.shape}")
        self.data = data
        _record_new(data.size)

    @classmethod
    def _fresh(cls, data: np.ndarray, copied: bool = False, traversal: bool = True) -> Mesh:
        m = object.__new__(cls)
        m.data = data
        _record_new(data.size, copied=copied, traversal=traversal)
        return m

    @property
    def extents(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def rank(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def copy(self) -> Mesh:
        return Mesh._fresh(self.data.copy(), copied=True, traversal=False)

    def assign(self, other: Mesh) -> None:
        """Copy ``other``'s elements into this mesh (no allocation)."""
        if other is self:
            return
        _check_operand(self, other)
        np.copyto(self.data, other.data)
        _record_write(self.size, traversal=False)

    def tolist(self) -> list:
        return self.data.tolist()

    def flat(self) -> list[float]:
        return self.data.ravel().tolist()

    def bits_equal(self, other: Mesh) -> bool:
        return (
            self.data.shape == other.data.shape
            and self.data.dtype == other.data.dtype
            and self.data.tobytes() == other.data.tobytes()
        )

    def __repr__(self) -> str:
        return f"Mesh(extents={list(self.extents)}, dtype={self.dtype.name})"

    # algebraic sugar for the pure operations
    def __add__(self, other: Mesh) -> Mesh:
        return add(self, other)

    def __sub__(self, other: Mesh) -> Mesh:
        return sub(self, other)

    def __mul__(self, other: Mesh | float) -> Mesh:
        if isinstance(other, Mesh):
            return mul_elem(self, other)
        return mul_scalar(self, other)

    # self-mutating forms; none of them return a value
    def ushift(self, d: int, i: int) -> None:
        _check_dim(self, d)
        self.data[...] = np.roll(self.data, -int(i), axis=d)
        _record_write(self.size)

    def uplus(self, rhs: Mesh) -> None:
        _check_operand(self, rhs)
        np.add(self.data, rhs.data, out=self.data)
        _record_write(self.size)

    def uminus(self, rhs: Mesh) -> None:
        _check_operand(self, rhs)
        np.subtract(self.data, rhs.data, out=self.data)
        _record_write(self.size)

    def usub_from(self, lhs: Mesh) -> None:
        """``self = lhs - self``: the form that updates the second operand."""
        _check_operand(self, lhs)
        np.subtract(lhs.data, self.data, out=self.data)
        _record_write(self.size)

    def umult(self, r: float) -> None:
        np.multiply(self.data, self.data.dtype.type(r), out=self.data)
        _record_write(self.size)

    def umult_elem(self, rhs: Mesh) -> None:
        _check_operand(self, rhs)
        np.multiply(self.data, rhs.data, out=self.data)
        _record_write(self.size)


def _check_same(a: Mesh, b: Mesh) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"extent mismatch: {list(a.extents)} vs {list(b.extents)}")
    if a.data.dtype is not b.data.dtype and a.data.dtype != b.data.dtype:
        raise ShapeError(f"element type mismatch: {a.dtype.name} vs {b.dtype.name}")


def _check_operand(target: Mesh, rhs: Mesh) -> None:
    _check_same(target, rhs)
    # The receiver itself is a legal operand of a pointwise update (x *= x):
    # each element is read before it is overwritten.  Partial overlap is not.
    # two arrays that each own their buffer cannot overlap; skip the costly check
    t, r = target.data, rhs.data
    if rhs is not target and (t.base is not None or r.base is not None) and np.may_share_memory(t, r):
        raise AliasingError("operand shares storage with the mesh being updated")


def _check_dim(m: Mesh, d: int) -> None:
    if not 0 <= d < m.rank:
        raise DimensionError(f"dimension {d} out of range for rank {m.rank}")


# -- construction ---------------------------------------------------------------


def _check_extents(extents: Sequence[int]) -> tuple[int, ...]:
    ext = tuple(int(e) for e in extents)
    if not ext:
        raise ShapeError("extent list is empty")
    if any(e < 1 for e in ext):
        raise ShapeError(f"extents must be >= 1, got {list(ext)}")
    return ext


def mesh_new(extents: Sequence[int], fill: float = 0.0, dtype=None) -> Mesh:
    ext = _check_extents(extents)
    return Mesh._fresh(np.full(ext, fill, dtype=dtype or _dtype), traversal=False)


def from_array(values, extents: Sequence[int] | None = None, dtype=None) -> Mesh:
    """Build a mesh holding a copy of ``values`` (nested lists or ndarray)."""
    arr = np.array(values, dtype=dtype or _dtype)
    if extents is not None:
        ext = _check_extents(extents)
        if arr.size != int(np.prod(ext)):
            raise ShapeError(f"{arr.size} elements do not fill extents {list(ext)}")
        arr = arr.reshape(ext)
    _check_extents(arr.shape)
    return Mesh._fresh(np.ascontiguousarray(arr), traversal=False)


# -- pure operations ------------------------------------------------------------


def shift(m: Mesh, d: int, i: int) -> Mesh:
    _check_dim(m, d)
    return Mesh._fresh(np.roll(m.data, -int(i), axis=d))


def add(a: Mesh, b: Mesh) -> Mesh:
    _check_same(a, b)
    return Mesh._fresh(np.add(a.data, b.data))


def sub(a: Mesh, b: Mesh) -> Mesh:
    _check_same(a, b)
    return Mesh._fresh(np.subtract(a.data, b.data))


def mul_elem(a: Mesh, b: Mesh) -> Mesh:
    _check_same(a, b)
    return Mesh._fresh(np.multiply(a.data, b.data))


def mul_scalar(a: Mesh, r: float) -> Mesh:
    return Mesh._fresh(np.multiply(a.data, a.data.dtype.type(r)))


# -- text format ----------------------------------------------------------------


def _format_real(x) -> str:
    return str(x)


def format_mesh(m: Mesh) -> str:
    lines = ["extents: " + " ".join(str(e) for e in m.extents)]
    rows = m.data.reshape(-1, m.extents[-1])
    lines.extend(" ".join(_format_real(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def parse_mesh_lines(lines: list[str], dtype=None) -> tuple[Mesh, list[str]]:
    """Parse one mesh block from the front of ``lines``; return the rest."""
    lines = [ln for ln in lines]
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines or not lines[0].startswith("extents:"):
        raise FormatError("expected 'extents:' header")
    try:
        ext = _check_extents(int(tok) for tok in lines[0][len("extents:"):].split())
    except ValueError as exc:
        if isinstance(exc, ShapeError):
            raise FormatError(str(exc)) from None
        raise FormatError(f"bad extents line: {lines[0]!r}") from None
    need = int(np.prod(ext))
    tokens: list[str] = []
    i = 1
    while len(tokens) < need and i < len(lines):
        if lines[i].split() and lines[i].split()[0].endswith(":"):
            break
        tokens.extend(lines[i].split())
        i += 1
    if len(tokens) != need:
        raise FormatError(f"expected {need} elements, found {len(tokens)}")
    try:
        arr = np.array([float(t) for t in tokens], dtype=dtype or _dtype)
    except ValueError:
        raise FormatError("non-numeric element") from None
    return from_array(arr, ext, dtype=arr.dtype), lines[i:]


def parse_mesh(text: str, dtype=None) -> Mesh:
    m, rest = parse_mesh_lines(text.splitlines(), dtype)
    if any(ln.strip() for ln in rest):
        raise FormatError("trailing data after mesh")
    return m

