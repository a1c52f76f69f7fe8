import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from conftest import random_commuting
from quotspec.errors import DegeneratePencilError, DomainError, NotCommutingError
from quotspec.tuples import (
    CommutingTuple,
    is_pure,
    is_row_contraction,
    joint_eigenvalues,
    merge_points,
    multiset_distance,
    purity_defects,
    shift_tuple,
    triangularize,
    validate_tuple,
)


def test_validate_accepts_diagonals():
    T = validate_tuple([np.diag([0, 1]), np.diag([2, 3])])
    assert (T.d, T.n) == (2, 2)
    rng = np.random.default_rng(0)
    assert validate_tuple([np.diag(rng.standard_normal(4)) for _ in range(3)]).d == 3


def test_validate_rejects_noncommuting_pair():
    with pytest.raises(NotCommutingError):
        validate_tuple([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])


def test_validate_rejects_bad_shapes():
    with pytest.raises(ValueError):
        validate_tuple([np.eye(2), np.eye(3)])
    with pytest.raises(ValueError):
        validate_tuple([np.ones((2, 3))])


def test_shift_examples():
    T = validate_tuple([np.diag([1.0, 2.0]), np.diag([0.5, 0.0])])
    np.testing.assert_array_equal(shift_tuple(T, [0, 0]).mats, -T.mats)
    Z = validate_tuple([np.zeros((2, 2))] * 2)
    np.testing.assert_array_equal(shift_tuple(Z, [1, 2]).mats, [np.eye(2), 2 * np.eye(2)])
    lam = np.array([0.3 + 0.1j, -0.2])
    back = shift_tuple(shift_tuple(T, lam), lam)
    np.testing.assert_allclose(back.mats, T.mats, atol=1e-15)


def test_row_contraction_examples(fix_b):
    ok, margin = is_row_contraction(validate_tuple([np.zeros((1, 1))] * 2))
    assert ok and margin == 1.0
    assert not is_row_contraction(validate_tuple([[[2.0]]]))[0]
    assert is_row_contraction(fix_b.T)[0]


def test_purity_examples(fix_b):
    Z = validate_tuple([np.zeros((2, 2))] * 2)
    np.testing.assert_array_equal(purity_defects(Z, 5), np.zeros(5))
    np.testing.assert_allclose(purity_defects(validate_tuple([[[1.0]]]), 6), np.ones(6))
    seq = purity_defects(fix_b.T, 200)
    np.testing.assert_allclose(seq[:3], [1.0, 0.25, 0.0625], rtol=1e-10)
    assert seq[-1] < 1e-8
    assert is_pure(fix_b.T)[0]
    assert not is_pure(validate_tuple([[[1.0]]]), m_max=50)[0]


def test_purity_needs_row_contraction():
    with pytest.raises(DomainError):
        purity_defects(validate_tuple([[[2.0]]]), 3)


def test_joint_eigenvalues_diagonal_pairs():
    js = joint_eigenvalues(validate_tuple([np.diag([0.0, 0.5]), np.zeros((2, 2))]))
    np.testing.assert_allclose(js.points, [[0, 0], [0.5, 0]], atol=1e-14)
    assert list(js.multiplicities) == [1, 1] and js.stable


def test_joint_eigenvalues_zero_tuple_has_multiplicity_n():
    js = joint_eigenvalues(validate_tuple([np.zeros((3, 3))] * 2))
    assert js.points.shape == (1, 2) and list(js.multiplicities) == [3]
    assert js.expanded().shape == (3, 2)


def test_joint_eigenvalues_fix_b(fix_b):
    js = joint_eigenvalues(fix_b.T)
    assert multiset_distance(js.points, np.array([[0, 0], [0.5, 0]])) < 1e-8


def test_joint_eigenvalues_of_jordan_block_tuple():
    N = np.diag([1.0, 1.0], 1)
    T = validate_tuple([0.2 * np.eye(3) + N, -0.1j * np.eye(3) + N @ N])
    js = joint_eigenvalues(T)
    np.testing.assert_allclose(js.points, [[0.2, -0.1j]], atol=1e-7)
    assert list(js.multiplicities) == [3]


def test_joint_eigenvalues_distinguishes_points_hidden_in_one_variable():
    # The first coordinates coincide; only a generic combination separates them.
    T = validate_tuple([np.diag([0.3, 0.3, 0.1]), np.diag([0.0, 0.4, 0.0])])
    js = joint_eigenvalues(T, seed=5)
    assert len(js) == 3
    assert multiset_distance(js.points, np.array([[0.1, 0], [0.3, 0], [0.3, 0.4]])) < 1e-12


def test_merge_points_lexicographic():
    P = np.array([[0.5, 0], [0.0, 0], [0.5 + 1e-9, 0]])
    pts, mults = merge_points(P, [1, 1, 1])
    np.testing.assert_allclose(pts, [[0, 0], [0.5, 0]], atol=1e-8)
    assert list(mults) == [1, 2]


def test_triangularize_makes_every_entry_upper_triangular():
    T = random_commuting(3, 3, 4)
    for R in triangularize(T):
        assert np.max(np.abs(np.tril(R, -1))) < 1e-9


def test_degenerate_pencil_error_is_numerical():
    assert issubclass(DegeneratePencilError, ArithmeticError)


@given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_joint_eigenvalues_recover_conjugated_diagonal(d, n, seed):
    rng = np.random.default_rng(seed)
    pts = (rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))) * 0.5
    Q = unitary_group.rvs(n, random_state=seed % 2**32) if n > 1 else np.eye(1)
    S = np.diag(rng.uniform(0.5, 2.0, n)) @ Q
    Sinv = np.linalg.inv(S)
    T = CommutingTuple(np.stack([S @ np.diag(pts[:, i]) @ Sinv for i in range(d)]))
    js = joint_eigenvalues(T, seed=seed)
    assert multiset_distance(js.expanded(), pts) < 1e-7


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_joint_eigenvalues_are_eigenvalues_of_each_entry(d, n, seed):
    T = random_commuting(seed, d, n)
    js = joint_eigenvalues(T, seed=seed)
    assert js.multiplicities.sum() == n
    for i in range(d):
        ev = np.linalg.eigvals(T.mats[i])
        got = js.expanded()[:, i]
        # Eigenvalues of non-normal matrices carry the usual sqrt(eps)-type error.
        assert multiset_distance(got[:, None], ev[:, None]) < 1e-5 * max(1.0, T.norm())
