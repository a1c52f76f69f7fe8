"""Defect operators, characteristic function and canonical dilation.

For a commuting row contraction ``T`` (row operator ``C^{dn} -> C^n``)

    theta(z) = -T + D_{T*} (1 - Z T^*)^{-1} Z D_T,

with ``Z = [z_1 1, ..., z_d 1]``. The same formula defines the extension
to every ``z`` where ``1 - Z T^*`` is invertible, including points of the
unit sphere away from the spectrum. Values are reported in fixed
orthonormal bases of the two defect spaces.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError, OutsideDomainError
from .numerics import (
    DEFAULT_RANK_TOL,
    Subspace,
    numerical_rank,
    opnorm,
    psd_sqrt,
    range_basis,
    restricted_min_singular,
)
from .polynomials import MultiPoly, PolyMatrix, da_weight, monomials, poly_det
from .tuples import CommutingTuple, is_pure, is_row_contraction

KAPPA_MAX = 1e8


@dataclass(frozen=True, eq=False)
class DefectData:
    T: CommutingTuple
    D_T: np.ndarray = field(repr=False)
    D_Tstar: np.ndarray = field(repr=False)
    defect_T: Subspace = field(repr=False)
    defect_Tstar: Subspace = field(repr=False)
    pure: bool = True

    @property
    def dim_T(self) -> int:
        return self.defect_T.dim

    @property
    def dim_Tstar(self) -> int:
        return self.defect_Tstar.dim

    def intertwining_residuals(self):
        """``||T D_T - D_{T*} T||`` and ``||T^* D_{T*} - D_T T^*||``."""
        R = self.T.row()
        return (
            opnorm(R @ self.D_T - self.D_Tstar @ R),
            opnorm(R.conj().T @ self.D_Tstar - self.D_T @ R.conj().T),
        )


def defect_data(T: CommutingTuple, rel_tol: float = DEFAULT_RANK_TOL, psd_tol: float = 1e-9) -> DefectData:
    """Defect operators and spaces of a commuting row contraction.

    A tuple that fails the purity test only triggers a warning; the
    characteristic function is still well defined, the dilation is not.
    """
    ok, margin = is_row_contraction(T, tol=psd_tol)
    if not ok:
        raise DomainError(f"not a row contraction (margin {margin:.3e})")
    R = T.row()
    n, dn = R.shape
    D_T = psd_sqrt(np.eye(dn) - R.conj().T @ R, tol=psd_tol, zero_tol=rel_tol)
    D_Ts = psd_sqrt(np.eye(n) - R @ R.conj().T, tol=psd_tol, zero_tol=rel_tol)
    pure, _ = is_pure(T)
    if not pure:
        warnings.warn("tuple did not pass the purity test; dilation results are unreliable")
    return DefectData(T, D_T, D_Ts, range_basis(D_T, rel_tol), range_basis(D_Ts, rel_tol), pure)


@dataclass(frozen=True, eq=False)
class CharFnEvaluator:
    """Evaluates the characteristic function in fixed defect bases."""

    defects: DefectData
    kappa_max: float = KAPPA_MAX
    rel_tol: float = DEFAULT_RANK_TOL

    @classmethod
    def from_tuple(cls, T: CommutingTuple, **kw) -> "CharFnEvaluator":
        return cls(defect_data(T), **kw)

    @property
    def T(self) -> CommutingTuple:
        return self.defects.T

    @property
    def shape(self):
        return (self.defects.dim_Tstar, self.defects.dim_T)

    def _ZTstar(self, z):
        return np.tensordot(z, self.T.mats.conj().transpose(0, 2, 1), axes=1)

    def resolvent_condition(self, z) -> float:
        z = _point(z, self.T.d)
        return float(np.linalg.cond(np.eye(self.T.n) - self._ZTstar(z)))

    def in_domain(self, z) -> bool:
        return self.resolvent_condition(z) <= self.kappa_max

    def full(self, z) -> np.ndarray:
        """``theta(z)`` as an ``n x dn`` matrix (not compressed)."""
        z = _point(z, self.T.d)
        n = self.T.n
        A = np.eye(n) - self._ZTstar(z)
        cond = np.linalg.cond(A)
        if not cond <= self.kappa_max:
            raise OutsideDomainError(
                f"outside extension domain: cond(1 - ZT*) = {cond:.3e} at z={z}"
            )
        Z = np.kron(z[None, :], np.eye(n))
        return -self.T.row() + self.defects.D_Tstar @ np.linalg.solve(A, Z @ self.defects.D_T)

    def __call__(self, z) -> np.ndarray:
        return charfn_eval(self, z)


def _point(z, d):
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != d:
        raise InputError(f"point has {z.shape[0]} coordinates, expected {d}")
    return z


def charfn_eval(E: CharFnEvaluator, z) -> np.ndarray:
    """``theta(z)`` as a ``dim D_{T*} x dim D_T`` matrix in the defect bases."""
    B_s = E.defects.defect_Tstar.basis
    B_t = E.defects.defect_T.basis
    return B_s.conj().T @ E.full(z) @ B_t


def dual_identity_residual(E: CharFnEvaluator, z) -> float:
    """``||D_T theta(z)^* - (Z^* - T^*)(1 - T Z^*)^{-1} D_{T*}||``."""
    z = _point(z, E.T.d)
    n = E.T.n
    lhs = E.defects.D_T @ E.full(z).conj().T
    Zs = np.kron(z.conj()[:, None], np.eye(n))
    Rs = E.T.row().conj().T
    TZs = np.tensordot(z.conj(), E.T.mats, axes=1)
    rhs = (Zs - Rs) @ np.linalg.solve(np.eye(n) - TZs, E.defects.D_Tstar)
    return opnorm(lhs - rhs)


def dual_condition(E: CharFnEvaluator, z) -> float:
    """Condition number of ``1 - T Z^*`` (scale for the dual identity)."""
    z = _point(z, E.T.d)
    return float(np.linalg.cond(np.eye(E.T.n) - np.tensordot(z.conj(), E.T.mats, axes=1)))


def surjectivity_margin(E: CharFnEvaluator, z) -> float:
    """Smallest of the top ``dim D_{T*}`` singular values of ``theta(z)``.

    Zero when the defect space of ``T^*`` is larger than that of ``T``,
    since ``theta(z)`` can then never be onto.
    """
    th = charfn_eval(E, z)
    r_s, r_t = th.shape
    if r_s > r_t:
        return 0.0
    return restricted_min_singular(th, r_s)


def cokernel_dim(E: CharFnEvaluator, z) -> int:
    """``dim D_{T*} - rank theta(z)``."""
    th = charfn_eval(E, z)
    return th.shape[0] - numerical_rank(th, E.rel_tol, floor=1.0) if th.size else th.shape[0]


def _adjoint_powers(T: CommutingTuple, N: int) -> dict:
    """``T^{*alpha}`` for all ``|alpha| <= N``."""
    Ts = T.adjoint().mats
    d = T.d
    out = {(0,) * d: np.eye(T.n, dtype=complex)}
    for a in monomials(d, N)[1:]:
        i = next(j for j in range(d) if a[j] > 0)
        prev = list(a)
        prev[i] -= 1
        out[a] = Ts[i] @ out[tuple(prev)]
    return out


def charfn_taylor(E: CharFnEvaluator, N: int, compressed: bool = True) -> PolyMatrix:
    """Taylor polynomial of degree ``<= N`` of ``theta``.

    Built from the Neumann series ``(1 - ZT^*)^{-1} = sum_k A(z)^k`` with
    the degree-one polynomial ``A(z) = sum_i z_i T_i^*``, iterating
    ``P_{k+1} = A P_k`` from ``P_1 = Z D_T``. On ``|z| <= r < 1`` the
    neglected tail is at most ``r^{N+1} / (1 - r)``.
    """
    if N < 1:
        raise InputError("N must be at least 1")
    T = E.T
    d, n = T.d, T.n
    unit = [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
    Ts = T.adjoint().mats
    A = PolyMatrix(d, (n, n), {unit[i]: Ts[i] for i in range(d)})
    D_T = E.defects.D_T
    P = PolyMatrix(d, (n, d * n), {unit[i]: D_T[i * n:(i + 1) * n] for i in range(d)})
    total = PolyMatrix(d, (n, d * n), {(0,) * d: -T.row()})
    for k in range(1, N + 1):
        total = total + P.compress(E.defects.D_Tstar, np.eye(d * n))
        if k < N:
            P = A.matmul(P)
    if compressed:
        return total.compress(
            E.defects.defect_Tstar.basis.conj().T, E.defects.defect_T.basis
        )
    return total


def taylor_tail_bound(r: float, N: int) -> float:
    """Bound ``r^{N+1}/(1-r)`` on the Taylor remainder at radius ``r``."""
    return r ** (N + 1) / (1.0 - r)


def canonical_dilation(E: CharFnEvaluator, N: int) -> np.ndarray:
    """Truncated matrix of ``j(x) = sum (|alpha|!/alpha!) D_{T*} T^{*alpha} x z^alpha``.

    Rows follow the truncated space ``H^2_d(D_{T*})`` of degree ``<= N``
    with coefficient index in the ``D_{T*}`` basis. The orthonormal
    coefficient of ``z^alpha`` is ``D_{T*} T^{*alpha} x / sqrt(w(alpha))``.
    """
    T = E.T
    B = E.defects.defect_Tstar.basis
    r = B.shape[1]
    pw = _adjoint_powers(T, N)
    alphas = monomials(T.d, N)
    BD = B.conj().T @ E.defects.D_Tstar
    J = np.zeros((len(alphas) * r, T.n), dtype=complex)
    for i, a in enumerate(alphas):
        J[i * r:(i + 1) * r] = BD @ pw[a] / np.sqrt(da_weight(a))
    return J


def annihilator_from_charfn(E: CharFnEvaluator, vectors, N: int, max_degree=None) -> MultiPoly:
    """``det`` of the square matrix with columns ``theta_N(z) e_j``.

    ``vectors`` holds ``dim D_{T*}`` vectors of ``D_T`` in defect-basis
    coordinates, as columns of a ``(dim D_T, dim D_{T*})`` array.
    """
    V = np.asarray(vectors, dtype=complex)
    r_s, r_t = E.shape
    if V.ndim == 1:
        V = V[:, None]
    if V.shape != (r_t, r_s):
        raise InputError(
            f"need {r_s} vectors of length {r_t}, got array of shape {V.shape}"
        )
    theta = charfn_taylor(E, N)
    Theta = theta.compress(np.eye(r_s), V)
    return poly_det(Theta, max_degree=max_degree)


def normalizing_vectors(E: CharFnEvaluator, lam) -> np.ndarray:
    """Vectors ``e_j`` with ``theta(lam) e_j = d_j`` (requires surjectivity at ``lam``)."""
    th = charfn_eval(E, lam)
    if surjectivity_margin(E, lam) <= E.rel_tol * max(1.0, opnorm(th)):
        raise InputError(f"theta is not surjective at {lam}")
    return np.linalg.pinv(th)


class CharFnDeterminant:
    """``z -> det(theta(z) V)`` evaluated from the exact characteristic function.

    The polynomial form from :func:`annihilator_from_charfn` grows quickly
    with the dimension; this callable gives the same function without a
    Taylor truncation. Points outside the extension domain map to NaN.
    """

    def __init__(self, E: CharFnEvaluator, vectors):
        V = np.asarray(vectors, dtype=complex)
        if V.ndim == 1:
            V = V[:, None]
        r_s, r_t = E.shape
        if V.shape != (r_t, r_s):
            raise InputError(f"vectors must have shape {(r_t, r_s)}, got {V.shape}")
        self.E = E
        self.V = V
        self.d = E.T.d

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1, self.d)
        E, T = self.E, self.E.T
        n = T.n
        # Batched version of charfn_eval over all points.
        M = np.eye(n) - np.einsum("pi,ijk->pjk", flat, T.adjoint().mats)
        inside = np.linalg.cond(M) <= E.kappa_max
        D_T = E.defects.D_T.reshape(T.d, n, -1)
        ZD = np.einsum("pi,ijk->pjk", flat, D_T)
        out = np.full(len(flat), np.nan, dtype=complex)
        if inside.any():
            full = -T.row() + E.defects.D_Tstar @ np.linalg.solve(M[inside], ZD[inside])
            B_s = E.defects.defect_Tstar.basis
            B_t = E.defects.defect_T.basis
            out[inside] = np.linalg.det(B_s.conj().T @ full @ B_t @ self.V)
        return out.reshape(z.shape[:-1])


@dataclass(frozen=True)
class BeurlingCheck:
    """Truncated check of ``M_theta M_theta^* + j j^* = 1`` and of ``range M_theta = M``.

    ``residual`` is the identity defect on degree ``<= N`` polynomials.
    ``max_angle`` is the largest principal angle between the numerical range
    of the truncated ``M_theta`` (carried into ``H^2_d(D)``) together with
    ``H^2_d(D ominus (R cap D))`` and the truncation of ``M``; NaN without a
    model. ``coefficient_isometry`` is ``||U^* U - 1||`` for the map
    ``D_{T*} -> D`` identifying the two dilations.
    """

    N: int
    residual: float
    max_angle: float = float("nan")
    coefficient_isometry: float = float("nan")


def beurling_range_check(E: CharFnEvaluator, N: int, model=None) -> BeurlingCheck:
    """Check the Beurling decomposition on the truncated space.

    ``model`` is the :class:`~quotspec.da_model.QuotientModel` that ``E`` was
    built from; without it only the operator identity is checked.
    """
    from .da_model import TruncatedDA, mult_op_matrix

    theta = charfn_taylor(E, N)
    A = mult_op_matrix(theta, N, N, truncate=True)
    J = canonical_dilation(E, N)
    I = np.eye(A.shape[0])
    residual = opnorm(A @ A.conj().T + J @ J.conj().T - I)
    if model is None:
        return BeurlingCheck(N, residual)

    spec = model.spec
    B = E.defects.defect_Tstar.basis
    BD = B.conj().T @ E.defects.D_Tstar
    U = model.eval_at_zero() @ np.linalg.pinv(BD)
    iso = opnorm(U.conj().T @ U - np.eye(U.shape[1]))

    space = TruncatedDA(spec.d, spec.m, N)
    n_mono = space.n_monomials
    Ua, _, _ = np.linalg.svd(A, full_matrices=True)
    keep = Ua[:, : A.shape[0] - E.T.n]
    lifted = np.kron(np.eye(n_mono), U) @ keep
    P_hat = range_basis(np.eye(spec.m) - U @ U.conj().T, 1e-8).basis
    parts = [lifted]
    if P_hat.shape[1]:
        parts.append(np.kron(np.eye(n_mono), P_hat))
    ours = np.concatenate(parts, axis=1)

    K = space.kernel_coefficients(spec.points, spec.vectors)
    Uk, sk, _ = np.linalg.svd(K, full_matrices=True)
    rank = int(np.count_nonzero(sk > 1e-12 * sk[0]))
    target = Uk[:, rank:]
    from .numerics import principal_angles

    angles = principal_angles(ours, target)
    return BeurlingCheck(N, residual, float(angles.max()) if angles.size else 0.0, iso)
