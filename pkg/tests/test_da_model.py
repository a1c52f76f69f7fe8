import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quotspec.da_model import (
    KernelModelSpec,
    TruncatedDA,
    compression_residual,
    gram_matrix,
    mult_op_matrix,
    quotient_tuple,
    shift_symbol,
    truncated_shift,
)
from quotspec.errors import InputError, NearlyDependentNodesError
from quotspec.harness import fix_a, fix_b, random_kernel_spec
from quotspec.polynomials import MultiPoly, PolyMatrix, da_weight
from quotspec.tuples import joint_eigenvalues, multiset_distance


def test_gram_examples():
    np.testing.assert_array_equal(gram_matrix(fix_a()), [[1.0]])
    np.testing.assert_allclose(gram_matrix(fix_b()), [[1, 1], [1, 4 / 3]], atol=1e-15)
    spec = KernelModelSpec(2, 2, [[0.3, 0], [0.3, 0]], [[1, 0], [0, 1]])
    G = gram_matrix(spec)
    assert G[0, 1] == 0 and G[1, 0] == 0


def test_spec_validation():
    with pytest.raises(NearlyDependentNodesError):
        KernelModelSpec(2, 1, [[0.3, 0], [0.3, 0]], [[1], [2]])
    with pytest.raises(InputError, match="ball"):
        KernelModelSpec(2, 1, [[1.0, 0]], [[1]])
    with pytest.raises(InputError):
        KernelModelSpec(2, 1, [[0.1, 0]], [[0]])
    with pytest.raises(InputError):
        KernelModelSpec(2, 1, [[0.1, 0, 0]], [[1]])


def test_spec_json_round_trip():
    spec = random_kernel_spec(4, d=2, k=3, m=2)
    back = KernelModelSpec.from_json(json.dumps(spec.to_json()))
    np.testing.assert_array_equal(back.points, spec.points)
    np.testing.assert_array_equal(back.vectors, spec.vectors)
    with pytest.raises(InputError, match="missing"):
        KernelModelSpec.from_json({"d": 2, "m": 1})
    with pytest.raises(InputError, match=r"nodes\[0\]\.v"):
        KernelModelSpec.from_json({"d": 1, "m": 1, "nodes": [{"lambda": [[0.1, 0]], "v": ["x"]}]})


def test_quotient_single_node_is_zero():
    q = quotient_tuple(fix_a())
    assert q.T.n == 1 and np.all(q.T.mats == 0)


def test_quotient_fix_b_joint_eigenvalues():
    q = quotient_tuple(fix_b())
    assert multiset_distance(joint_eigenvalues(q.T).points, np.array([[0, 0], [0.5, 0]])) < 1e-8


def test_quotient_three_points_d3():
    spec = random_kernel_spec(9, d=3, k=3, m=1)
    q = quotient_tuple(spec)
    assert multiset_distance(joint_eigenvalues(q.T).points, spec.points) < 1e-8


def test_quotient_adjoint_is_diagonal_on_kernel_vectors():
    # T_i^* acts as conj(lam_i) on the normalized kernel basis.
    spec = random_kernel_spec(2, d=2, k=3, m=2)
    q = quotient_tuple(spec)
    G_half = np.linalg.inv(q.G_inv_sqrt)
    for i in range(2):
        D = G_half @ np.diag(spec.points[:, i].conj()) @ q.G_inv_sqrt
        np.testing.assert_allclose(q.T.mats[i].conj().T, D, atol=1e-12)


def test_mult_op_matrix_weight_ratios():
    one = PolyMatrix.identity(2, 1)
    S = mult_op_matrix(one, 2, 2)
    np.testing.assert_array_equal(S, np.eye(6))
    sp = TruncatedDA(2, 1, 3)
    M = mult_op_matrix(shift_symbol(2, 0), 2, 3)
    assert M[sp.position((1, 0)), 0] == 1.0
    assert M[sp.position((2, 0)), TruncatedDA(2, 1, 2).position((1, 0))] == pytest.approx(1.0)
    assert M[sp.position((2, 1)), TruncatedDA(2, 1, 2).position((1, 1))] == pytest.approx(np.sqrt(2 / 3))


def test_mult_op_matrix_degree_overflow():
    with pytest.raises(InputError, match="overflow"):
        mult_op_matrix(shift_symbol(2, 0), 3, 3)
    assert mult_op_matrix(shift_symbol(2, 0), 3, 3, truncate=True).shape == (10, 10)


def test_shifts_form_a_row_isometry_on_low_degrees():
    # sum_i S_i S_i^* = 1 - P_constants on H^2_d, exactly, once degree N+1 is kept.
    d, N = 3, 4
    S = [mult_op_matrix(shift_symbol(d, i), N, N + 1) for i in range(d)]
    R = sum(s @ s.conj().T for s in S)
    P0 = np.zeros_like(R)
    P0[0, 0] = 1
    dim_N = TruncatedDA(d, 1, N).dim
    # Rows of degree <= N + 1 are complete only on the image of degree <= N.
    np.testing.assert_allclose((R + P0)[:dim_N, :dim_N], np.eye(dim_N), atol=1e-14)


def test_truncated_shifts_commute_below_the_cut():
    A, B = truncated_shift(2, 1, 5, 0), truncated_shift(2, 1, 5, 1)
    C = A @ B - B @ A
    assert np.max(np.abs(C)) < 1e-14


def test_kernel_coefficients_reproduce_point_evaluation():
    sp = TruncatedDA(2, 1, 30)
    f = MultiPoly(2, {(1, 0): 0.5, (0, 2): -1j, (3, 1): 2.0})
    lam = np.array([[0.3 + 0.1j, -0.2]])
    K = sp.kernel_coefficients(lam, np.ones((1, 1)))
    fhat = sp.coefficients(PolyMatrix.from_entries([[f]]))
    assert abs(np.vdot(K[:, 0], fhat) - f(lam[0])) < 1e-14


def test_orthonormal_coefficients_use_weights():
    sp = TruncatedDA(2, 1, 3)
    f = MultiPoly(2, {(1, 1): 1.0})
    c = sp.coefficients(PolyMatrix.from_entries([[f]]))
    assert c[sp.position((1, 1))] == pytest.approx(np.sqrt(da_weight((1, 1))))
    assert np.linalg.norm(c) ** 2 == pytest.approx(0.5)


def test_compression_residual_examples():
    assert compression_residual(fix_a(), 5) == 0.0
    r10, r20 = compression_residual(fix_b(), 10), compression_residual(fix_b(), 20)
    # The kernel tail enters squared: each extra degree gains a factor r^2 = 0.25.
    assert r20 / r10 == pytest.approx(0.25**10, rel=0.1)
    far = KernelModelSpec(1, 1, [[0.9], [0.0]], [[1], [1]])
    assert compression_residual(far, 3) > 0.1


@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 2))
def test_random_quotients_are_pure_row_contractions(seed, d, k, m):
    spec = random_kernel_spec(seed, d=d, k=k, m=m)
    q = quotient_tuple(spec)
    assert q.T.n == spec.k
    assert q.purity[-1] < 1e-8
