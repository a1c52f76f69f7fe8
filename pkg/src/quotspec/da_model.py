"""Finite-dimensional quotient modules of the vector-valued Drury-Arveson space.

The co-invariant subspace ``H = span{k_lam (x) v}`` spanned by kernel
functions is represented exactly: the adjoint shift acts diagonally on
kernel vectors, ``M_{z_i}^* (k_lam (x) v) = conj(lam_i) k_lam (x) v``, so
the compressed tuple only needs the Gram matrix of the spanning set.

Truncated spaces use the orthonormal monomial basis
``z^alpha / sqrt(w(alpha)) (x) e_k`` with ``w(alpha) = alpha!/|alpha|!``,
ordered by degree, then descending lex on ``alpha``, then ``k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError, NearlyDependentNodesError, PurityError
from .numerics import opnorm
from .polynomials import PolyMatrix, da_weight, monomials
from .tuples import (
    DEFAULT_M_MAX,
    DEFAULT_PURE_TOL,
    CommutingTuple,
    is_row_contraction,
    purity_defects,
    validate_tuple,
)

GRAM_COND_MAX = 1e12


@dataclass(frozen=True, eq=False)
class KernelModelSpec:
    """Nodes ``(lam_j, v_j)`` with ``lam_j`` in the open ball of ``C^d``, ``v_j`` in ``C^m``."""

    d: int
    m: int
    points: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=complex))
        V = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "vectors", V)
        if P.shape[1] != self.d or V.shape[1] != self.m or len(P) != len(V):
            raise InputError(
                f"node arrays have shapes {P.shape}, {V.shape}; expected (k, {self.d}), (k, {self.m})"
            )
        if len(P) == 0:
            raise InputError("need at least one node")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(V))):
            raise InputError("node data must be finite")
        radii = np.linalg.norm(P, axis=1)
        if np.any(radii >= 1.0):
            raise InputError(f"node {int(np.argmax(radii))} lies outside the open ball")
        if np.any(np.linalg.norm(V, axis=1) == 0):
            raise InputError("node vectors must be non-zero")
        for a in range(len(P)):
            for b in range(a + 1, len(P)):
                if np.array_equal(P[a], P[b]):
                    va, vb = V[a], V[b]
                    cross = abs(np.vdot(va, vb)) - np.linalg.norm(va) * np.linalg.norm(vb)
                    if abs(cross) <= 1e-12 * np.linalg.norm(va) * np.linalg.norm(vb):
                        raise NearlyDependentNodesError(
                            f"nodes {a} and {b} coincide with parallel vectors"
                        )

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def max_radius(self) -> float:
        return float(np.linalg.norm(self.points, axis=1).max())

    def distinct_points(self) -> np.ndarray:
        out = []
        for p in self.points:
            if not any(np.array_equal(p, q) for q in out):
                out.append(p)
        return np.array(out)

    def to_json(self) -> dict:
        def pairs(x):
            return [[float(c.real), float(c.imag)] for c in x]

        return {
            "d": self.d,
            "m": self.m,
            "nodes": [
                {"lambda": pairs(p), "v": pairs(v)} for p, v in zip(self.points, self.vectors)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "KernelModelSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            d, m = int(obj["d"]), int(obj["m"])
            pts, vecs = [], []
            for i, node in enumerate(obj["nodes"]):
                pts.append([_parse_complex(c, f"nodes[{i}].lambda") for c in node["lambda"]])
                vecs.append([_parse_complex(c, f"nodes[{i}].v") for c in node["v"]])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed model JSON: missing or bad field {exc}") from exc
        return cls(d, m, np.array(pts, dtype=complex), np.array(vecs, dtype=complex))


def _parse_complex(c, where):
    if isinstance(c, (int, float)):
        return complex(c)
    if isinstance(c, (list, tuple)) and len(c) == 2:
        return complex(float(c[0]), float(c[1]))
    raise InputError(f"{where}: expected [re, im], got {c!r}")


def gram_matrix(spec: KernelModelSpec) -> np.ndarray:
    """``G[j, l] = <k_{lam_l} v_l, k_{lam_j} v_j> = <v_l, v_j> / (1 - <lam_j, lam_l>)``."""
    P, V = spec.points, spec.vectors
    inner_pts = P @ P.conj().T  # [j, l] = <lam_j, lam_l>
    inner_vec = V.conj() @ V.T  # [j, l] = <v_l, v_j>
    G = inner_vec / (1.0 - inner_pts)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > GRAM_COND_MAX:
        raise NearlyDependentNodesError(
            f"nearly dependent nodes: Gram condition number {cond:.3e} > {GRAM_COND_MAX:.0e}"
        )
    return G


def _hermitian_power(G, p):
    w, U = np.linalg.eigh(G)
    return (U * w**p) @ U.conj().T


@dataclass(frozen=True, eq=False)
class QuotientModel:
    """Compression of the shift to ``H = span{k_lam (x) v}``.

    Coordinates are with respect to the orthonormal basis
    ``e = h G^{-1/2}``, where ``h_j = k_{lam_j} (x) v_j``.
    """

    spec: KernelModelSpec
    G: np.ndarray = field(repr=False)
    G_inv_sqrt: np.ndarray = field(repr=False)
    T: CommutingTuple = field(repr=False)
    purity: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.T.n

    def eval_at_zero(self) -> np.ndarray:
        """``(m, k)`` matrix sending coordinates ``x`` to ``f(0)`` for ``f = e x``."""
        return self.spec.vectors.T @ self.G_inv_sqrt


def quotient_tuple(
    spec: KernelModelSpec, m_max: int = DEFAULT_M_MAX, pure_tol: float = DEFAULT_PURE_TOL
) -> QuotientModel:
    """Build ``T = P_H M_z |H`` exactly in orthonormal coordinates.

    ``T_i^* = G^{1/2} diag(conj(lam_{., i})) G^{-1/2}``.
    """
    G = gram_matrix(spec)
    G_half = _hermitian_power(G, 0.5)
    G_mhalf = _hermitian_power(G, -0.5)
    mats = []
    for i in range(spec.d):
        Tstar = G_half @ np.diag(spec.points[:, i].conj()) @ G_mhalf
        mats.append(Tstar.conj().T)
    T = validate_tuple(mats, comm_tol=1e-9)
    ok, margin = is_row_contraction(T, tol=1e-9)
    if not ok:
        raise PurityError(f"compressed tuple is not a row contraction (margin {margin:.3e})")
    seq = purity_defects(T, m_max, tol=1e-9)
    if not seq[-1] < pure_tol:
        raise PurityError(
            f"compressed tuple not pure within m_max={m_max}: ||P^m(1)|| = {seq[-1]:.3e}"
        )
    return QuotientModel(spec, G, G_mhalf, T, seq)


# -- truncated Drury-Arveson space -------------------------------------------


@dataclass(frozen=True)
class TruncatedDA:
    """Polynomials of degree ``<= N`` in ``H^2_d(C^m)``."""

    d: int
    m: int
    N: int

    @cached_property
    def alphas(self) -> list:
        return monomials(self.d, self.N)

    @cached_property
    def index(self) -> dict:
        return {a: i for i, a in enumerate(self.alphas)}

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([da_weight(a) for a in self.alphas])

    @property
    def n_monomials(self) -> int:
        return len(self.alphas)

    @property
    def dim(self) -> int:
        return self.n_monomials * self.m

    def position(self, alpha, k=0) -> int:
        return self.index[tuple(alpha)] * self.m + k

    def coefficients(self, poly: PolyMatrix) -> np.ndarray:
        """Orthonormal-basis coordinates of a vector-valued polynomial.

        ``poly`` has shape ``(m, c)``; the result is ``(dim, c)``: each column
        of ``poly`` is one function.
        """
        out = np.zeros((self.dim, poly.shape[1]), dtype=complex)
        for a, C in poly.coeffs.items():
            if sum(a) > self.N:
                continue
            i = self.index[a]
            out[i * self.m:(i + 1) * self.m] = C * np.sqrt(da_weight(a))
        return out

    def kernel_coefficients(self, points, vectors) -> np.ndarray:
        """Columns: truncations of ``k_lam (x) v`` in orthonormal coordinates.

        ``k_lam = sum_alpha (|alpha|!/alpha!) conj(lam)^alpha z^alpha``, whose
        orthonormal coefficient is ``conj(lam)^alpha / sqrt(w(alpha))``.
        """
        P = np.atleast_2d(np.asarray(points, dtype=complex))
        V = np.atleast_2d(np.asarray(vectors, dtype=complex))
        A = np.array(self.alphas)
        mono = np.prod(P.conj()[:, None, :] ** A[None], axis=-1)  # (k, M)
        mono = mono / np.sqrt(self.weights)[None]
        out = mono[:, :, None] * V[:, None, :]  # (k, M, m)
        return out.reshape(len(P), -1).T


def mult_op_matrix(symbol: PolyMatrix, N_src: int, N_dst: int, truncate: bool = False) -> np.ndarray:
    """Matrix of ``f -> symbol * f`` between truncated spaces.

    Maps degree ``<= N_src`` polynomials in ``H^2_d(C^m)`` to degree
    ``<= N_dst`` in ``H^2_d(C^m')`` for a symbol of shape ``(m', m)``. Unless
    ``truncate`` is set this requires ``N_dst >= N_src + deg(symbol)`` so the
    map is exact; with ``truncate`` the image is projected to degree
    ``<= N_dst``.
    """
    deg = max(symbol.degree(), 0)
    if not truncate and N_dst < N_src + deg:
        raise InputError(
            f"degree overflow: N_dst={N_dst} < N_src + deg = {N_src + deg}"
        )
    mp, m = symbol.shape
    src = TruncatedDA(symbol.d, m, N_src)
    dst = TruncatedDA(symbol.d, mp, N_dst)
    out = np.zeros((dst.dim, src.dim), dtype=complex)
    w_src = src.weights
    for b, C in symbol.coeffs.items():
        for ia, a in enumerate(src.alphas):
            tgt = tuple(x + y for x, y in zip(a, b))
            if sum(tgt) > N_dst:
                continue
            it = dst.index[tgt]
            factor = np.sqrt(da_weight(tgt) / w_src[ia])
            out[it * mp:(it + 1) * mp, ia * m:(ia + 1) * m] += factor * C
    return out


def shift_symbol(d: int, i: int) -> PolyMatrix:
    """Scalar symbol ``z_i`` as a 1 x 1 PolyMatrix."""
    alpha = [0] * d
    alpha[i] = 1
    return PolyMatrix(d, (1, 1), {tuple(alpha): np.ones((1, 1))})


def truncated_shift(d: int, m: int, N: int, i: int) -> np.ndarray:
    """``P_N M_{z_i} P_N`` on ``H^2_d(C^m)``."""
    sym = PolyMatrix(d, (m, m), {tuple(1 if j == i else 0 for j in range(d)): np.eye(m)})
    return mult_op_matrix(sym, N, N, truncate=True)


def compression_residual(spec: KernelModelSpec, N: int, model: QuotientModel | None = None) -> float:
    """Gap between the exact quotient tuple and its degree-``N`` surrogate.

    The orthonormal basis of ``H`` is truncated to degree ``N``, the
    truncated shift is compressed onto the span of the truncated vectors
    (using their own Gram matrix), and the result is compared with the exact
    tuple in the same coordinates. Returns ``max_i ||T_i^(N) - T_i||``.
    """
    if N < 1:
        raise InputError("N must be at least 1")
    if model is None:
        model = quotient_tuple(spec)
    space = TruncatedDA(spec.d, spec.m, N)
    E = space.kernel_coefficients(spec.points, spec.vectors) @ model.G_inv_sqrt
    GN = E.conj().T @ E
    worst = 0.0
    for i in range(spec.d):
        S = truncated_shift(spec.d, spec.m, N, i)
        TN = np.linalg.solve(GN, E.conj().T @ S @ E)
        worst = max(worst, opnorm(TN - model.T[i]))
    return worst
