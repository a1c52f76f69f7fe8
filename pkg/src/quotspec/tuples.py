"""Commuting tuples of square matrices.

A tuple is stored as a ``(d, n, n)`` complex array. The joint-eigenvalue
routine here is the ground truth every spectrum computation is compared
against: for commuting matrices the Taylor spectrum is exactly the set of
joint eigenvalues.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla
from scipy.optimize import linear_sum_assignment

from .errors import DegeneratePencilError, DomainError, InputError, NotCommutingError
from .numerics import opnorm

DEFAULT_COMM_TOL = 1e-10
DEFAULT_PURE_TOL = 1e-8
DEFAULT_M_MAX = 200
CLUSTER_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """A validated commuting d-tuple of n x n matrices."""

    mats: np.ndarray

    @property
    def d(self) -> int:
        return self.mats.shape[0]

    @property
    def n(self) -> int:
        return self.mats.shape[1]

    def __getitem__(self, i):
        return self.mats[i]

    def __len__(self):
        return self.d

    def row(self) -> np.ndarray:
        """The block row ``[T_1, ..., T_d]`` of shape ``(n, d*n)``."""
        return np.concatenate(list(self.mats), axis=1)

    def adjoint(self) -> "CommutingTuple":
        return CommutingTuple(np.conj(np.transpose(self.mats, (0, 2, 1))))

    def norm(self) -> float:
        """Largest spectral norm among the entries."""
        return max(opnorm(M) for M in self.mats)


def _as_stack(mats) -> np.ndarray:
    if isinstance(mats, CommutingTuple):
        return mats.mats
    arrs = [np.asarray(M, dtype=complex) for M in mats]
    if not arrs:
        raise InputError("a tuple needs at least one matrix")
    n = arrs[0].shape[0] if arrs[0].ndim == 2 else -1
    for M in arrs:
        if M.ndim != 2 or M.shape != (n, n):
            raise InputError("tuple entries must be square matrices of one size")
        if not np.all(np.isfinite(M)):
            raise InputError("tuple entries must be finite")
    if n == 0:
        raise InputError("matrices must be non-empty")
    return np.stack(arrs)


def validate_tuple(mats, comm_tol: float = DEFAULT_COMM_TOL) -> CommutingTuple:
    """Check squareness, equal sizes and pairwise commutation.

    The commutator test is relative: ``||T_i T_j - T_j T_i|| <= comm_tol *
    (1 + ||T_i|| ||T_j||)``.
    """
    stack = _as_stack(mats)
    norms = [opnorm(M) for M in stack]
    d = stack.shape[0]
    for i in range(d):
        for j in range(i + 1, d):
            c = opnorm(stack[i] @ stack[j] - stack[j] @ stack[i])
            if c > comm_tol * (1.0 + norms[i] * norms[j]):
                raise NotCommutingError(
                    f"not commuting: ||[T_{i + 1}, T_{j + 1}]|| = {c:.3e}"
                )
    return CommutingTuple(stack)


def shift_tuple(T: CommutingTuple, lam) -> CommutingTuple:
    """Return the tuple ``(lam_i * 1 - T_i)_i``."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if lam.shape[0] != T.d:
        raise InputError(f"point has {lam.shape[0]} coordinates, tuple has d={T.d}")
    eye = np.eye(T.n, dtype=complex)
    return CommutingTuple(lam[:, None, None] * eye[None] - T.mats)


def row_gram(T: CommutingTuple) -> np.ndarray:
    """``sum_i T_i T_i^*``."""
    return np.einsum("iab,icb->ac", T.mats, T.mats.conj())


def is_row_contraction(T: CommutingTuple, tol: float = 1e-10):
    """Return ``(ok, margin)`` with ``margin = 1 - lambda_max(sum T_i T_i^*)``."""
    G = row_gram(T)
    lam_max = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[-1])
    margin = 1.0 - lam_max
    return margin >= -tol, margin


def purity_defects(T: CommutingTuple, m_max: int = DEFAULT_M_MAX, tol: float = 1e-10):
    """Norms of ``P_T^m(1)`` for ``m = 1..m_max``.

    ``P_T(X) = sum_i T_i X T_i^*``. The sequence is non-increasing for a
    row contraction; purity is declared by the caller once it drops below a
    threshold.
    """
    ok, margin = is_row_contraction(T, tol)
    if not ok:
        raise DomainError(f"not a row contraction (margin {margin:.3e})")
    X = np.eye(T.n, dtype=complex)
    out = np.empty(m_max)
    for m in range(m_max):
        X = np.einsum("iab,bc,idc->ad", T.mats, X, T.mats.conj())
        X = 0.5 * (X + X.conj().T)
        out[m] = opnorm(X)
    return out


def is_pure(T: CommutingTuple, m_max: int = DEFAULT_M_MAX, pure_tol: float = DEFAULT_PURE_TOL):
    seq = purity_defects(T, m_max)
    return bool(seq[-1] < pure_tol), seq


# -- joint eigenvalues -----------------------------------------------------


@dataclass(frozen=True)
class JointSpectrum:
    """Distinct joint eigenvalues with multiplicities.

    ``stable`` is False when an independent second draw disagreed by more
    than the stability tolerance ("unresolved clustering").
    """

    points: np.ndarray
    multiplicities: np.ndarray
    stable: bool
    draw_distance: float

    def expanded(self) -> np.ndarray:
        """Points repeated by multiplicity, shape ``(n, d)``."""
        return np.repeat(self.points, self.multiplicities, axis=0)

    def __len__(self):
        return len(self.points)


def _clusters(values: np.ndarray, tol: float):
    """Single-linkage clusters of complex numbers, as index lists."""
    n = len(values)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        for b in range(a + 1, n):
            if abs(values[a] - values[b]) <= tol:
                parent[find(a)] = find(b)
    groups = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return sorted(groups.values(), key=lambda g: g[0])


def merge_points(points: np.ndarray, mults, tol: float = CLUSTER_TOL):
    """Merge points closer than ``tol`` (summing multiplicities)."""
    points = np.atleast_2d(points)
    k = len(points)
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for a in range(k):
        for b in range(a + 1, k):
            if np.linalg.norm(points[a] - points[b]) <= tol:
                parent[find(a)] = find(b)
    groups = {}
    for a in range(k):
        groups.setdefault(find(a), []).append(a)
    new_pts, new_mult = [], []
    for g in groups.values():
        w = np.asarray([mults[i] for i in g], dtype=float)
        new_pts.append((w[:, None] * points[g]).sum(axis=0) / w.sum())
        new_mult.append(int(w.sum()))
    order = _lex_order(np.array(new_pts))
    return np.array(new_pts)[order], np.array(new_mult, dtype=int)[order]


def _lex_order(points: np.ndarray):
    keys = []
    for j in reversed(range(points.shape[1])):
        keys += [np.round(points[:, j].imag, 9), np.round(points[:, j].real, 9)]
    return np.lexsort(keys)


def multiset_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest displacement of an optimal matching between equal-size point multisets."""
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    if len(A) != len(B):
        return np.inf
    if len(A) == 0:
        return 0.0
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    r, c = linear_sum_assignment(D)
    return float(D[r, c].max())


def _single_draw(T: CommutingTuple, rng, cluster_tol: float):
    c = rng.standard_normal(T.d) + 1j * rng.standard_normal(T.d)
    c /= np.linalg.norm(c)
    S = np.tensordot(c, T.mats, axes=1)
    scale = max(1.0, T.norm())
    R, _ = spla.schur(S, output="complex")
    ev = np.diag(R)
    groups = _clusters(ev, cluster_tol * scale)
    pts, mults = [], []
    eps = np.finfo(float).eps
    for g in groups:
        k = len(g)
        centre = ev[g].mean()
        radius = max(abs(ev[g] - centre).max(), 0.0) + 0.5 * cluster_tol * scale
        _, Z, sdim = spla.schur(
            S, output="complex", sort=lambda x: abs(x - centre) <= radius
        )
        if sdim != k:
            return None
        Q = Z[:, :k]
        blocks = np.einsum("ab,ibc,cd->iad", Q.conj().T, T.mats, Q)
        mu = np.trace(blocks, axis1=1, axis2=2) / k
        # A genuine cluster has blocks mu_i + nilpotent; eigenvalue spread of
        # order (eps*scale)^(1/k) is roundoff, anything larger is a collision.
        spread_tol = max(cluster_tol, 10.0 * (eps * k) ** (1.0 / k)) * scale
        for i in range(T.d):
            if k > 1 and np.max(np.abs(np.linalg.eigvals(blocks[i]) - mu[i])) > spread_tol:
                return None
        pts.append(mu)
        mults.append(k)
    return merge_points(np.array(pts), mults, cluster_tol * scale)


def _draw_with_retries(T, rng, cluster_tol, retries):
    for _ in range(retries + 1):
        res = _single_draw(T, rng, cluster_tol)
        if res is not None:
            return res
    raise DegeneratePencilError(
        f"degenerate pencil: no separating combination found in {retries + 1} draws"
    )


def joint_eigenvalues(
    T: CommutingTuple,
    seed: int = 0,
    cluster_tol: float = CLUSTER_TOL,
    stability_tol: float = 1e-8,
    retries: int = 5,
) -> JointSpectrum:
    """Joint eigenvalues of a commuting tuple by simultaneous triangularization.

    A random combination ``S = sum c_i T_i`` is Schur-decomposed; for each
    eigenvalue cluster of ``S`` the matching invariant subspace is brought to
    the top of a reordered Schur form and the joint eigenvalue is read off as
    the mean diagonal of each compressed ``T_i``. A second independent draw
    must reproduce the multiset within ``stability_tol``; otherwise the
    result is returned with ``stable=False`` and a warning.
    """
    rng = np.random.default_rng(seed)
    pts, mults = _draw_with_retries(T, rng, cluster_tol, retries)
    pts2, mults2 = _draw_with_retries(T, rng, cluster_tol, retries)
    scale = max(1.0, T.norm())
    dist = multiset_distance(
        np.repeat(pts, mults, axis=0), np.repeat(pts2, mults2, axis=0)
    )
    stable = dist <= stability_tol * scale
    if not stable:
        warnings.warn(f"unresolved clustering: draws differ by {dist:.3e}")
    return JointSpectrum(pts, mults, bool(stable), dist)


def triangularize(T: CommutingTuple, seed: int = 0) -> np.ndarray:
    """Unitarily conjugate all ``T_i`` by the Schur basis of a random combination.

    Returns the ``(d, n, n)`` stack ``Q^* T_i Q``. Useful for checking how
    close the tuple is to simultaneously upper triangular.
    """
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(T.d) + 1j * rng.standard_normal(T.d)
    _, Q = spla.schur(np.tensordot(c, T.mats, axes=1), output="complex")
    return np.einsum("ab,ibc,cd->iad", Q.conj().T, T.mats, Q)
