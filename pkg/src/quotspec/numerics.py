"""Dense complex linear algebra helpers.

Everything here works on small dense ``complex128`` arrays. Ranks are
always relative to the largest singular value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import InputError, NotPSDError

DEFAULT_RANK_TOL = 1e-9


def as_cmatrix(A) -> np.ndarray:
    """Return ``A`` as a finite 2-d complex array, raising on NaN/Inf."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise InputError(f"expected a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    return A


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^n given by an orthonormal column basis."""

    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def _check_rel_tol(rel_tol):
    if not 0.0 < rel_tol < 1.0:
        raise InputError(f"rel_tol must lie in (0, 1), got {rel_tol}")


def numerical_rank(A, rel_tol: float = DEFAULT_RANK_TOL, floor: float = 0.0) -> int:
    """Count singular values above ``rel_tol * max(sigma_max, floor)``.

    ``floor`` sets the scale when ``A`` is a perturbation of zero, such as a
    shifted tuple evaluated at one of its own eigenvalues.

    >>> numerical_rank(np.diag([1.0, 1e-14]))
    1
    """
    _check_rel_tol(rel_tol)
    A = as_cmatrix(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    scale = max(s[0], floor)
    if scale == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * scale))


def psd_sqrt(A, tol: float = 1e-10, zero_tol: float = 0.0) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as roundoff and clamped to zero,
    as are eigenvalues up to ``zero_tol * max(1, lambda_max)``. The second
    clamp matters when the rank of the root is used later: a roundoff
    eigenvalue of ``1e-15`` has a root of ``3e-8``.

    Raises
    ------
    InputError
        If ``A`` deviates from Hermitian by more than ``tol``.
    NotPSDError
        If some eigenvalue is below ``-tol``.
    """
    A = as_cmatrix(A)
    if A.shape[0] != A.shape[1]:
        raise InputError(f"psd_sqrt needs a square matrix, got {A.shape}")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > tol:
        raise InputError("matrix is not Hermitian within tolerance")
    H = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(H)
    if w.size and w[0] < -tol:
        raise NotPSDError(f"not PSD: smallest eigenvalue {w[0]:.3e} < -{tol:.1e}")
    w = np.clip(w, 0.0, None)
    if w.size:
        w[w <= zero_tol * max(1.0, w[-1])] = 0.0
    B = (V * np.sqrt(w)) @ V.conj().T
    return 0.5 * (B + B.conj().T)


def pin_phases(Q: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    Q = np.array(Q, dtype=complex)
    for j in range(Q.shape[1]):
        k = int(np.argmax(np.abs(Q[:, j])))
        if Q[k, j] != 0:
            Q[:, j] *= np.abs(Q[k, j]) / Q[k, j]
    return Q


def range_basis(A, rel_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Orthonormal basis of the numerical range of ``A``.

    A full-rank square ``A`` gets the standard basis, so that defect spaces
    which are the whole space are represented without an arbitrary rotation.
    Otherwise the basis is the leading left singular vectors, phase-pinned.
    """
    _check_rel_tol(rel_tol)
    A = as_cmatrix(A)
    n = A.shape[0]
    if A.size == 0:
        return Subspace(np.zeros((n, 0), dtype=complex))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0:
        return Subspace(np.zeros((n, 0), dtype=complex))
    r = int(np.count_nonzero(s > rel_tol * s[0]))
    if r == n:
        return Subspace(np.eye(n, dtype=complex))
    return Subspace(pin_phases(U[:, :r]))


def restricted_min_singular(A, target_rank: int) -> float:
    """Return the ``target_rank``-th largest singular value of ``A``.

    ``A`` maps onto a ``target_rank``-dimensional space exactly when the
    value is positive. ``target_rank == 0`` gives 0.
    """
    A = as_cmatrix(A)
    if target_rank < 0 or target_rank > min(A.shape):
        raise InputError(
            f"target_rank {target_rank} exceeds min dimension {min(A.shape)}"
        )
    if target_rank == 0:
        return 0.0
    s = np.linalg.svd(A, compute_uv=False)
    return float(s[target_rank - 1])


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (radians, descending) between the column spans."""
    A = as_cmatrix(A)
    B = as_cmatrix(B)
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros(0)
    return spla.subspace_angles(A, B)


def opnorm(A) -> float:
    """Spectral norm, 0 for empty arrays."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))
