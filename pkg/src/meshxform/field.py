"""Scalar fields on a periodic box and a small tensor layer on top of them.

A :class:`TorusScalarField` is a mesh of grid values plus the grid spacing.
The partial derivative is a 4-point central stencil, available in the plain
algebraic form and in an incremental form that walks two working meshes one
step per stencil round instead of materializing eight shifted copies.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import mesh as M
from .errors import DimensionError, FieldError, FormatError, StencilError, TensorError
from .mesh import Mesh

DERIV_COEFFS = (0.85315148548241, -0.25953977340489, 0.06942058732686, -0.01082798602277)
STENCIL_REACH = len(DERIV_COEFFS)
MIN_STENCIL_EXTENT = 2 * STENCIL_REACH + 1


@dataclass
class TorusScalarField:
    msf: Mesh
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise FieldError(f"grid spacing must be positive, got {self.delta}")
        self.delta = float(self.delta)

    @property
    def extents(self) -> tuple[int, ...]:
        return self.msf.extents

    def copy(self) -> TorusScalarField:
        return TorusScalarField(self.msf.copy(), self.delta)

    def assign(self, other: TorusScalarField) -> None:
        _check_compatible(self, other)
        self.msf.assign(other.msf)

    def bits_equal(self, other: TorusScalarField) -> bool:
        return self.delta == other.delta and self.msf.bits_equal(other.msf)

    def uderiv(self, d: int) -> None:
        uderiv_incremental(self, d)


def _check_compatible(f: TorusScalarField, g: TorusScalarField) -> None:
    if f.msf.extents != g.msf.extents:
        raise FieldError(f"field extents differ: {list(f.extents)} vs {list(g.extents)}")
    if f.delta != g.delta:
        raise FieldError(f"field spacings differ: {f.delta} vs {g.delta}")


def _check_stencil(f: TorusScalarField, d: int) -> None:
    if not 0 <= d < f.msf.rank:
        raise DimensionError(f"dimension {d} out of range for rank {f.msf.rank}")
    if f.msf.extents[d] < MIN_STENCIL_EXTENT:
        raise StencilError(
            f"extent {f.msf.extents[d]} in dimension {d} is below the stencil minimum {MIN_STENCIL_EXTENT}"
        )


def _inverse_spacing(f: TorusScalarField):
    t = f.msf.dtype.type
    return t(1) / t(f.delta)


def uderiv_algebraic(f: TorusScalarField, d: int) -> None:
    """Replace ``f`` by its partial derivative along dimension ``d``."""
    _check_stencil(f, d)
    msf = f.msf
    c = DERIV_COEFFS
    ans = (M.shift(msf, d, 1) - M.shift(msf, d, -1)) * c[0]
    ans = ans + (M.shift(msf, d, 2) - M.shift(msf, d, -2)) * c[1]
    ans = ans + (M.shift(msf, d, 3) - M.shift(msf, d, -3)) * c[2]
    ans = ans + (M.shift(msf, d, 4) - M.shift(msf, d, -4)) * c[3]
    msf.assign(ans * _inverse_spacing(f))


def uderiv_incremental(f: TorusScalarField, d: int) -> None:
    """Same result as :func:`uderiv_algebraic`, bit for bit, with three
    working meshes: ``msa``/``msb`` advance one step per round in opposite
    directions and ``scratch`` holds the current difference."""
    _check_stencil(f, d)
    msf = f.msf
    msa = msf.copy()
    msb = msf.copy()
    scratch = M.mesh_new(msf.extents, 0.0, dtype=msf.dtype.type)
    for k, c in enumerate(DERIV_COEFFS):
        msa.ushift(d, 1)
        msb.ushift(d, -1)
        scratch.assign(msa)
        scratch.uminus(msb)
        scratch.umult(c)
        if k == 0:
            msf.assign(scratch)
        else:
            msf.uplus(scratch)
    msf.umult(_inverse_spacing(f))


def deriv(f: TorusScalarField, d: int) -> TorusScalarField:
    g = f.copy()
    uderiv_incremental(g, d)
    return g


# -- pointwise field arithmetic --------------------------------------------------


def field_uplus(f: TorusScalarField, rhs: TorusScalarField) -> None:
    _check_compatible(f, rhs)
    f.msf.uplus(rhs.msf)


def field_uminus(f: TorusScalarField, rhs: TorusScalarField) -> None:
    _check_compatible(f, rhs)
    f.msf.uminus(rhs.msf)


def field_umult(f: TorusScalarField, r: float) -> None:
    f.msf.umult(r)


def field_umult_elem(f: TorusScalarField, rhs: TorusScalarField) -> None:
    _check_compatible(f, rhs)
    f.msf.umult_elem(rhs.msf)


def field_ushift(f: TorusScalarField, d: int, i: int) -> None:
    f.msf.ushift(d, i)


def field_add(f: TorusScalarField, g: TorusScalarField) -> TorusScalarField:
    _check_compatible(f, g)
    return TorusScalarField(M.add(f.msf, g.msf), f.delta)


def field_sub(f: TorusScalarField, g: TorusScalarField) -> TorusScalarField:
    _check_compatible(f, g)
    return TorusScalarField(M.sub(f.msf, g.msf), f.delta)


def field_mul(f: TorusScalarField, g: TorusScalarField) -> TorusScalarField:
    _check_compatible(f, g)
    return TorusScalarField(M.mul_elem(f.msf, g.msf), f.delta)


def field_mul_scalar(f: TorusScalarField, r: float) -> TorusScalarField:
    return TorusScalarField(M.mul_scalar(f.msf, r), f.delta)


def field_shift(f: TorusScalarField, d: int, i: int) -> TorusScalarField:
    return TorusScalarField(M.shift(f.msf, d, i), f.delta)


# -- tensors -----------------------------------------------------------------------


@dataclass
class Tensor:
    """A rows x cols grid of scalar fields on one common mesh shape and spacing."""

    components: list[list[TorusScalarField]]

    def __post_init__(self):
        rows = self.components
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise TensorError("tensor components must form a non-empty rectangular grid")
        first = rows[0][0]
        for f in self.fields():
            if f.extents != first.extents or f.delta != first.delta:
                raise TensorError("tensor components differ in extents or spacing")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.components), len(self.components[0])

    def fields(self) -> list[TorusScalarField]:
        return [f for row in self.components for f in row]

    def __getitem__(self, ij: tuple[int, int]) -> TorusScalarField:
        i, j = ij
        return self.components[i][j]

    def copy(self) -> Tensor:
        return Tensor([[f.copy() for f in row] for row in self.components])

    def assign(self, other: Tensor) -> None:
        _check_same_tensor(self, other)
        for f, g in zip(self.fields(), other.fields()):
            f.assign(g)

    def bits_equal(self, other: Tensor) -> bool:
        return self.shape == other.shape and all(
            f.bits_equal(g) for f, g in zip(self.fields(), other.fields())
        )


def _check_same_tensor(a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise TensorError(f"tensor shapes differ: {a.shape} vs {b.shape}")
    if a[0, 0].extents != b[0, 0].extents or a[0, 0].delta != b[0, 0].delta:
        raise TensorError("tensor components differ in extents or spacing")


def tensor_uplus(a: Tensor, rhs: Tensor) -> None:
    _check_same_tensor(a, rhs)
    for f, g in zip(a.fields(), rhs.fields()):
        field_uplus(f, g)


def tensor_uminus(a: Tensor, rhs: Tensor) -> None:
    _check_same_tensor(a, rhs)
    for f, g in zip(a.fields(), rhs.fields()):
        field_uminus(f, g)


def tensor_umult_scalar(a: Tensor, r: float) -> None:
    for f in a.fields():
        field_umult(f, r)


def tensor_add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_tensor(a, b)
    return Tensor([[field_add(f, g) for f, g in zip(ra, rb)] for ra, rb in zip(a.components, b.components)])


def tensor_sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_tensor(a, b)
    return Tensor([[field_sub(f, g) for f, g in zip(ra, rb)] for ra, rb in zip(a.components, b.components)])


def tensor_mul_scalar(a: Tensor, r: float) -> Tensor:
    return Tensor([[field_mul_scalar(f, r) for f in row] for row in a.components])


def tensor_apply(A: Tensor, V: Tensor) -> Tensor:
    """Matrix-vector application ``X_j = sum_i A[j, i] * V[i]``.

    Each output component starts from a zero mesh and accumulates one
    pointwise product per term, so an m x n application makes 2*m*n
    arithmetic passes over the mesh data.
    """
    m, n = A.shape
    if V.shape != (n, 1):
        raise TensorError(f"cannot apply a {m}x{n} tensor to a {V.shape[0]}x{V.shape[1]} tensor")
    _check_same_grid(A[0, 0], V[0, 0])
    proto = V[0, 0]
    rows = []
    for j in range(m):
        acc = M.mesh_new(proto.extents, 0.0, dtype=proto.msf.dtype.type)
        for i in range(n):
            acc.uplus(M.mul_elem(A[j, i].msf, V[i, 0].msf))
        rows.append([TorusScalarField(acc, proto.delta)])
    return Tensor(rows)


def _check_same_grid(f: TorusScalarField, g: TorusScalarField) -> None:
    if f.extents != g.extents or f.delta != g.delta:
        raise TensorError("tensor operands differ in extents or spacing")


def tensor_apply_report(A: Tensor, V: Tensor) -> tuple[Tensor, int]:
    """:func:`tensor_apply` plus the number of mesh traversals it made."""
    with M.alloc_scope() as stats:
        X = tensor_apply(A, V)
    return X, stats.traversals


# -- text formats ------------------------------------------------------------------


def format_field(f: TorusScalarField) -> str:
    return f"delta: {f.delta!r}\n" + M.format_mesh(f.msf)


def _parse_field_lines(lines: list[str], dtype=None) -> tuple[TorusScalarField, list[str]]:
    while lines and not lines[0].strip():
        lines = lines[1:]
    if not lines or not lines[0].startswith("delta:"):
        raise FormatError("expected 'delta:' header")
    try:
        delta = float(lines[0][len("delta:"):])
    except ValueError:
        raise FormatError(f"bad delta line: {lines[0]!r}") from None
    msf, rest = M.parse_mesh_lines(lines[1:], dtype)
    try:
        return TorusScalarField(msf, delta), rest
    except FieldError as exc:
        raise FormatError(str(exc)) from None


def parse_field(text: str, dtype=None) -> TorusScalarField:
    f, rest = _parse_field_lines(text.splitlines(), dtype)
    if any(ln.strip() for ln in rest):
        raise FormatError("trailing data after field")
    return f


def format_tensor(t: Tensor) -> str:
    r, c = t.shape
    return f"rows: {r} cols: {c}\n" + "".join(format_field(f) for f in t.fields())


def parse_tensor(text: str, dtype=None) -> Tensor:
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines = lines[1:]
    toks = lines[0].split() if lines else []
    if len(toks) != 4 or toks[0] != "rows:" or toks[2] != "cols:":
        raise FormatError("expected 'rows: r cols: c' header")
    try:
        r, c = int(toks[1]), int(toks[3])
    except ValueError:
        raise FormatError(f"bad tensor header: {lines[0]!r}") from None
    rest = lines[1:]
    fields = []
    for _ in range(r * c):
        f, rest = _parse_field_lines(rest, dtype)
        fields.append(f)
    if any(ln.strip() for ln in rest):
        raise FormatError("trailing data after tensor")
    try:
        return Tensor([fields[i * c:(i + 1) * c] for i in range(r)])
    except TensorError as exc:
        raise FormatError(str(exc)) from None
