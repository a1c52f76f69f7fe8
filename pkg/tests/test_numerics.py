import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from quotspec.errors import InputError, NotPSDError
from quotspec.numerics import (
    numerical_rank,
    opnorm,
    pin_phases,
    principal_angles,
    psd_sqrt,
    range_basis,
    restricted_min_singular,
)


def test_rank_identity_and_zero():
    assert numerical_rank(np.eye(3), 1e-10) == 3
    assert numerical_rank(np.zeros((2, 2))) == 0


def test_rank_against_gram_eigenvalues():
    A = np.diag([1.0, 1e-14])
    s = np.sqrt(np.clip(np.linalg.eigvalsh(A.conj().T @ A), 0, None))
    assert numerical_rank(A, 1e-10) == np.count_nonzero(s > 1e-10 * s.max()) == 1


def test_rank_floor_sets_scale_for_tiny_matrices():
    tiny = 1e-17 * np.ones((1, 3))
    assert numerical_rank(tiny, 1e-9) == 1
    assert numerical_rank(tiny, 1e-9, floor=1.0) == 0


@pytest.mark.parametrize("bad", [0.0, -1.0, 1.0, np.nan])
def test_rank_rejects_bad_tolerance(bad):
    with pytest.raises(InputError):
        numerical_rank(np.eye(2), bad)


def test_psd_sqrt_closed_forms():
    np.testing.assert_allclose(psd_sqrt(np.eye(2)), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


def test_psd_sqrt_rank_deficient():
    Q = unitary_group.rvs(2, random_state=3)
    A = Q @ np.diag([0.5, 0.0]) @ Q.conj().T
    B = psd_sqrt(A)
    assert np.max(np.abs(B @ B - A)) < 1e-12
    np.testing.assert_allclose(B, B.conj().T, atol=1e-15)


def test_psd_sqrt_zero_tol_clears_roundoff_eigenvalues():
    A = np.diag([1.0, 1e-15])
    assert numerical_rank(psd_sqrt(A), 1e-9) == 2
    assert numerical_rank(psd_sqrt(A, zero_tol=1e-9), 1e-9) == 1


def test_psd_sqrt_errors():
    with pytest.raises(NotPSDError, match="not PSD"):
        psd_sqrt(np.diag([1.0, -0.1]))
    with pytest.raises(InputError, match="Hermitian"):
        psd_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))
    B = psd_sqrt(np.diag([1.0, -1e-12]))
    assert B[1, 1] == 0.0


def test_range_basis_examples():
    sub = range_basis(np.diag([1.0, 0.0]))
    assert sub.dim == 1
    np.testing.assert_allclose(np.abs(sub.basis[:, 0]), [1.0, 0.0], atol=1e-15)
    assert range_basis(np.zeros((3, 3))).dim == 0
    assert range_basis(np.zeros((3, 3))).basis.shape == (3, 0)


def test_range_basis_full_rank_is_identity():
    A = np.array([[2.0, 1.0], [0.0, 1.0]])
    np.testing.assert_array_equal(range_basis(A).basis, np.eye(2))


def test_range_basis_rank_one_aligned_with_u():
    rng = np.random.default_rng(0)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    q = range_basis(np.outer(u, v.conj())).basis[:, 0]
    overlap = abs(np.vdot(q, u)) / np.linalg.norm(u)
    assert abs(overlap - 1.0) < 1e-10


def test_pin_phases_makes_largest_entry_real_positive():
    rng = np.random.default_rng(1)
    Q = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    P = pin_phases(Q)
    for j in range(2):
        k = np.argmax(np.abs(P[:, j]))
        assert P[k, j].imag == pytest.approx(0.0, abs=1e-15) and P[k, j].real > 0
    np.testing.assert_allclose(np.abs(P), np.abs(Q))


def test_restricted_min_singular_examples():
    assert restricted_min_singular(np.array([[1.0, 0.0]]), 1) == 1.0
    assert restricted_min_singular(np.array([[0.0, 0.0]]), 1) == 0.0
    assert restricted_min_singular(np.array([[0.3, 0.4]]), 1) == pytest.approx(0.5, abs=1e-15)


def test_principal_angles_of_coordinate_planes():
    e = np.eye(3)
    ang = principal_angles(e[:, :2], e[:, 1:])
    np.testing.assert_allclose(np.sort(ang), [0.0, np.pi / 2], atol=1e-12)


@given(
    st.integers(1, 5),
    st.integers(1, 5),
    st.integers(0, 5),
    st.integers(0, 2**31 - 1),
)
def test_rank_of_random_low_rank_product(m, n, r, seed):
    r = min(r, m, n)
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    R = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
    assert numerical_rank(L @ R, 1e-9) == r
    assert range_basis(L @ R, 1e-9).dim == r


@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_psd_sqrt_squares_back(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = X @ X.conj().T
    B = psd_sqrt(A)
    assert opnorm(B @ B - A) <= 1e-10 * max(1.0, opnorm(A))
    assert np.min(np.linalg.eigvalsh(B)) >= -1e-12
