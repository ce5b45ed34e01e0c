"""Periodic meshes, scalar fields and a source-to-source rewriter that turns
algebraic kernels into self-mutating code with few temporaries."""

from .errors import MeshXformError
from .field import Tensor, TorusScalarField, deriv, tensor_apply, uderiv_algebraic, uderiv_incremental
from .interp import Interpreter, interpret
from .mesh import AllocStats, Mesh, alloc_scope, from_array, mesh_new, precision, set_precision
from .transform import TransformReport, generate_wrappers, merge_temporaries, transform_program
from .values import DiffReport, diff_values, format_value, parse_value

__all__ = [
    "AllocStats",
    "DiffReport",
    "Interpreter",
    "Mesh",
    "MeshXformError",
    "Tensor",
    "TorusScalarField",
    "TransformReport",
    "alloc_scope",
    "deriv",
    "diff_values",
    "format_value",
    "from_array",
    "generate_wrappers",
    "interpret",
    "merge_temporaries",
    "mesh_new",
    "parse_value",
    "precision",
    "set_precision",
    "tensor_apply",
    "transform_program",
    "uderiv_algebraic",
    "uderiv_incremental",
]
