"""Koszul complexes of commuting matrix tuples and Taylor spectra.

Chain spaces are ``C^n (x) Lambda^p C^d``, laid out as ``binom(d, p)``
consecutive blocks of length ``n``, one per strictly increasing index
tuple in lexicographic order. The boundary sends ``x (x) e_I`` to
``sum_a (-1)^(a-1) T_{i_a} x (x) e_{I minus i_a}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .errors import RankToleranceError
from .numerics import DEFAULT_RANK_TOL, numerical_rank, restricted_min_singular
from .tuples import CommutingTuple, joint_eigenvalues, shift_tuple


@lru_cache(maxsize=None)
def exterior_index(d: int, p: int) -> tuple:
    """Increasing ``p``-subsets of ``0..d-1`` in lexicographic order."""
    return tuple(combinations(range(d), p))


@dataclass(frozen=True, eq=False)
class KoszulComplex:
    """Boundary matrices of the Koszul complex of ``tuple``.

    ``boundary[p - 1]`` is the matrix of the p-th boundary map, shape
    ``(n*binom(d, p-1), n*binom(d, p))``.
    """

    tuple: CommutingTuple
    boundary: list = field(repr=False)

    @property
    def d(self) -> int:
        return self.tuple.d

    @property
    def n(self) -> int:
        return self.tuple.n

    def chain_dim(self, p: int) -> int:
        return self.n * comb(self.d, p)

    def delta(self, p: int) -> np.ndarray:
        """Boundary ``p -> p-1``; zero maps for ``p = 0`` and ``p = d+1``."""
        if p == 0:
            return np.zeros((0, self.n), dtype=complex)
        if p == self.d + 1:
            return np.zeros((self.n, 0), dtype=complex)
        return self.boundary[p - 1]


def _boundary(T: CommutingTuple, p: int) -> np.ndarray:
    d, n = T.d, T.n
    rows = {I: k for k, I in enumerate(exterior_index(d, p - 1))}
    cols = exterior_index(d, p)
    B = np.zeros((n * len(rows), n * len(cols)), dtype=complex)
    for c, I in enumerate(cols):
        for a, i in enumerate(I):
            r = rows[I[:a] + I[a + 1:]]
            sign = -1.0 if a % 2 else 1.0
            B[r * n:(r + 1) * n, c * n:(c + 1) * n] = sign * T.mats[i]
    return B


def _scale(T: CommutingTuple) -> float:
    """Rank floor: boundary maps of a shifted tuple are measured against ``max(1, ||T||)``."""
    return max(1.0, T.norm())


def build_koszul(T: CommutingTuple) -> KoszulComplex:
    return KoszulComplex(T, [_boundary(T, p) for p in range(1, T.d + 1)])


def homology_dims(K: KoszulComplex, lam, rel_tol: float = DEFAULT_RANK_TOL) -> tuple:
    """Homology dimensions ``(h_0, ..., h_d)`` of the complex of ``lam - T``.

    ``h_p = dim C_p - rank delta_p - rank delta_{p+1}``. A negative value
    means the numerical ranks are inconsistent and raises.
    """
    S = build_koszul(shift_tuple(K.tuple, lam))
    floor = _scale(K.tuple)
    ranks = [0] + [numerical_rank(B, rel_tol, floor) for B in S.boundary] + [0]
    h = []
    for p in range(S.d + 1):
        hp = S.chain_dim(p) - ranks[p] - ranks[p + 1]
        if hp < 0:
            raise RankToleranceError(
                f"rank tolerance inconsistency: h_{p} = {hp} at lambda={lam}"
            )
        h.append(hp)
    return tuple(h)


def in_right_spectrum(T: CommutingTuple, lam, rel_tol: float = DEFAULT_RANK_TOL):
    """Return ``(flag, margin)``: is ``H_0(lam - T)`` non-zero?

    ``margin`` is the n-th singular value of the row ``[lam_1 - T_1, ...]``.
    """
    row = shift_tuple(T, lam).row()
    flag = numerical_rank(row, rel_tol, _scale(T)) < T.n
    return flag, restricted_min_singular(row, T.n)


def in_final_kernel(T: CommutingTuple, lam, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Dimension of the joint kernel of ``lam_i - T_i``."""
    col = np.concatenate(list(shift_tuple(T, lam).mats), axis=0)
    return T.n - numerical_rank(col, rel_tol, _scale(T))


def chain_defects(K: KoszulComplex) -> list:
    """``||delta_p delta_{p+1}||`` for ``p = 1..d-1``."""
    return [
        float(np.linalg.norm(K.boundary[p - 1] @ K.boundary[p], 2))
        for p in range(1, K.d)
    ]


@dataclass(frozen=True)
class KoszulSpectrum:
    """Per-candidate homology for the Taylor spectrum of a tuple.

    ``taylor`` marks candidates with some ``h_p > 0``; ``right`` marks
    ``h_0 > 0``. At finite dimension ``right_essential`` is always empty.
    """

    points: np.ndarray
    multiplicities: np.ndarray
    h_vectors: list
    taylor: list
    right: list
    right_margins: list
    right_essential: list
    oracle_stable: bool

    @property
    def spectrum(self) -> np.ndarray:
        return self.points[np.asarray(self.taylor, dtype=bool)]

    @property
    def consistent(self) -> bool:
        """Every joint eigenvalue tested spectral."""
        return all(self.taylor)


def taylor_spectrum(T: CommutingTuple, rel_tol: float = DEFAULT_RANK_TOL, seed: int = 0) -> KoszulSpectrum:
    """Taylor spectrum over the joint-eigenvalue candidates."""
    js = joint_eigenvalues(T, seed=seed)
    K = build_koszul(T)
    hv, tay, right, margins = [], [], [], []
    for lam in js.points:
        h = homology_dims(K, lam, rel_tol)
        flag, margin = in_right_spectrum(T, lam, rel_tol)
        hv.append(h)
        tay.append(any(x > 0 for x in h))
        right.append(bool(flag))
        margins.append(margin)
    return KoszulSpectrum(
        points=js.points,
        multiplicities=js.multiplicities,
        h_vectors=hv,
        taylor=tay,
        right=right,
        right_margins=margins,
        right_essential=[],
        oracle_stable=js.stable,
    )
