"""Exception hierarchy shared by the library, the DSL tooling and the CLI."""

from __future__ import annotations


class MeshXformError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(MeshXformError, ValueError):
    pass


class DimensionError(MeshXformError, IndexError):
    pass


class AliasingError(MeshXformError):
    pass


class StencilError(MeshXformError, ValueError):
    pass


class FieldError(MeshXformError, ValueError):
    pass


class TensorError(MeshXformError, ValueError):
    pass


class FormatError(MeshXformError, ValueError):
    """Malformed mesh/field/tensor text."""


class DslSyntaxError(MeshXformError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class DeclarationError(MeshXformError):
    pass


class TypeCheckError(MeshXformError):
    pass


class TransformError(MeshXformError):
    pass


class InterpretError(MeshXformError):
    pass


class ComparisonError(MeshXformError):
    pass
