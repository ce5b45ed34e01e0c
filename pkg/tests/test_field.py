from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshxform import field as F
from meshxform import mesh as M
from meshxform.errors import DimensionError, FieldError, FormatError, StencilError, TensorError
from meshxform.field import Tensor, TorusScalarField
from meshxform.mesh import alloc_scope, from_array

N = 64
SPACING = 2 * math.pi / N

# Max-norm errors of a plain-Python double-precision evaluation of the
# 4-point stencil on sin over 64 points, computed once and frozen here.
ORACLE_FIRST_DERIV_ERROR = 0.0018247534759836537
ORACLE_SECOND_DERIV_ERROR = 0.0036461772267051273


def oracle_deriv(values: list[float], delta: float) -> list[float]:
    """Straight-line reference stencil, independent of the library."""
    n = len(values)
    out = []
    for j in range(n):
        s = 0.0
        for k, c in enumerate(F.DERIV_COEFFS, start=1):
            s += c * (values[(j + k) % n] - values[(j - k) % n])
        out.append(s / delta)
    return out


def sine_field(dtype=np.float64) -> TorusScalarField:
    xs = [math.sin(2 * math.pi * j / N) for j in range(N)]
    return TorusScalarField(from_array(xs, dtype=dtype), SPACING)


def random_field(seed: int, shape=(9, 12), dtype=np.float32) -> TorusScalarField:
    rng = np.random.default_rng(seed)
    return TorusScalarField(from_array(rng.standard_normal(shape), dtype=dtype), 0.1 + rng.random())


def test_sine_derivative_within_oracle_bound():
    f = sine_field()
    F.uderiv_algebraic(f, 0)
    cos = np.cos(2 * np.pi * np.arange(N) / N)
    assert np.max(np.abs(f.msf.data - cos)) <= ORACLE_FIRST_DERIV_ERROR + 1e-9


def test_sine_derivative_matches_oracle_elementwise():
    f = sine_field()
    F.uderiv_incremental(f, 0)
    ref = oracle_deriv(sine_field().msf.flat(), SPACING)
    assert np.max(np.abs(f.msf.data - np.array(ref))) <= 1e-12


def test_second_derivative_within_oracle_bound():
    f = sine_field()
    f.uderiv(0)
    f.uderiv(0)
    sin = np.sin(2 * np.pi * np.arange(N) / N)
    assert np.max(np.abs(f.msf.data + sin)) <= ORACLE_SECOND_DERIV_ERROR + 1e-9


def test_oracle_constants_are_reproducible():
    xs = [math.sin(2 * math.pi * j / N) for j in range(N)]
    d1 = oracle_deriv(xs, SPACING)
    err = max(abs(d1[j] - math.cos(2 * math.pi * j / N)) for j in range(N))
    assert err == pytest.approx(ORACLE_FIRST_DERIV_ERROR, rel=1e-9)


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_constant_field_has_zero_derivative(dtype):
    f = TorusScalarField(M.mesh_new([12, 10], 3.25, dtype=dtype), 0.5)
    F.uderiv_algebraic(f, 1)
    assert not np.any(f.msf.data)
    g = TorusScalarField(M.mesh_new([12, 10], 3.25, dtype=dtype), 0.5)
    F.uderiv_incremental(g, 0)
    assert not np.any(g.msf.data)


@pytest.mark.parametrize("seed", range(100))
def test_incremental_equals_algebraic(seed):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, 4))
    shape = tuple(int(rng.integers(9, 14)) for _ in range(rank))
    dtype = (np.float32, np.float64)[seed % 2]
    f = random_field(seed, shape, dtype)
    g = f.copy()
    d = int(rng.integers(rank))
    F.uderiv_algebraic(f, d)
    F.uderiv_incremental(g, d)
    assert f.bits_equal(g)


def test_incremental_uses_three_working_meshes():
    f = random_field(1)
    with alloc_scope() as stats:
        F.uderiv_incremental(f, 0)
    assert stats.meshes_created == 3
    g = random_field(1)
    with alloc_scope() as stats:
        F.uderiv_algebraic(g, 0)
    assert stats.meshes_created > 3


def test_stencil_minimum():
    f = TorusScalarField(M.mesh_new([8, 20]), 1.0)
    with pytest.raises(StencilError):
        F.uderiv_algebraic(f, 0)
    F.uderiv_algebraic(f, 1)
    with pytest.raises(DimensionError):
        F.uderiv_incremental(f, 2)


def test_spacing_must_be_positive():
    with pytest.raises(FieldError):
        TorusScalarField(M.mesh_new([9]), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(-4, 4), st.floats(-4, 4))
def test_derivative_is_linear(seed, a, b):
    f, g = random_field(seed, dtype=np.float64), random_field(seed + 1, dtype=np.float64)
    g = TorusScalarField(g.msf, f.delta)
    combo = F.field_add(F.field_mul_scalar(f, a), F.field_mul_scalar(g, b))
    lhs = F.deriv(combo, 0)
    rhs = F.field_add(F.field_mul_scalar(F.deriv(f, 0), a), F.field_mul_scalar(F.deriv(g, 0), b))
    scale = np.max(np.abs(F.deriv(f, 0).msf.data)) * abs(a) + np.max(np.abs(F.deriv(g, 0).msf.data)) * abs(b)
    assert np.max(np.abs(lhs.msf.data - rhs.msf.data)) <= 64 * np.finfo(np.float64).eps * (scale + 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(-12, 12))
def test_derivative_commutes_with_shift(seed, k):
    f = random_field(seed)
    lhs = F.deriv(F.field_shift(f, 0, k), 0)
    rhs = F.field_shift(F.deriv(f, 0), 0, k)
    assert lhs.bits_equal(rhs)


def test_field_ops_check_compatibility():
    f = random_field(0)
    g = TorusScalarField(f.msf.copy(), f.delta * 2)
    with pytest.raises(FieldError):
        F.field_add(f, g)


def test_field_text_round_trip():
    f = random_field(3)
    assert F.parse_field(F.format_field(f), np.float32).bits_equal(f)
    with pytest.raises(FormatError):
        F.parse_field("delta: -1\nextents: 1\n0.0\n")


# -- tensors -------------------------------------------------------------------


def tensor(rows, cols, seed=0, shape=(9, 9)):
    rng = np.random.default_rng(seed)
    return Tensor(
        [[TorusScalarField(from_array(rng.standard_normal(shape)), 0.5) for _ in range(cols)] for _ in range(rows)]
    )


def identity(n, shape=(9, 9)):
    return Tensor(
        [[TorusScalarField(M.mesh_new(shape, float(i == j)), 0.5) for j in range(n)] for i in range(n)]
    )


def test_apply_two_by_two_makes_eight_traversals():
    X, traversals = F.tensor_apply_report(tensor(2, 2), tensor(2, 1, seed=1))
    assert traversals == 8
    assert X.shape == (2, 1)


def test_identity_application_returns_vector():
    V = tensor(2, 1, seed=5)
    assert F.tensor_apply(identity(2), V).bits_equal(V)


def test_apply_matches_numpy():
    A, V = tensor(2, 3, seed=2), tensor(3, 1, seed=3)
    X = F.tensor_apply(A, V)
    for j in range(2):
        ref = np.zeros((9, 9), dtype=np.float32)
        for i in range(3):
            ref += A[j, i].msf.data * V[i, 0].msf.data
        assert np.array_equal(X[j, 0].msf.data, ref)


def test_apply_shape_errors():
    with pytest.raises(TensorError):
        F.tensor_apply(tensor(2, 2), tensor(3, 1))
    with pytest.raises(TensorError):
        Tensor([[random_field(0)], [random_field(1, shape=(10, 9))]])


def test_tensor_arithmetic():
    A, B = tensor(2, 2, 0), tensor(2, 2, 1)
    C = A.copy()
    F.tensor_uplus(C, B)
    assert C.bits_equal(F.tensor_add(A, B))
    F.tensor_uminus(C, B)
    F.tensor_umult_scalar(C, 2.0)
    assert C.bits_equal(F.tensor_mul_scalar(F.tensor_sub(F.tensor_add(A, B), B), 2.0))


def test_tensor_text_round_trip():
    A = tensor(2, 2, 4)
    assert F.parse_tensor(F.format_tensor(A), np.float32).bits_equal(A)
