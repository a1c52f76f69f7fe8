"""Multivariate complex polynomials and polynomial matrices.

``MultiPoly`` maps exponent tuples to complex coefficients. ``PolyMatrix``
stores a matrix-valued polynomial as exponent -> coefficient matrix, which
is the natural shape for Taylor expansions of operator-valued functions;
entries can be pulled out as ``MultiPoly`` for determinant work.
"""

from __future__ import annotations

import json
from collections import defaultdict
from itertools import product
from math import lgamma

import numpy as np

from .errors import InputError, SizeCapError

DET_SIZE_CAP = 6


def _check_alpha(alpha, d):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d or any(a < 0 for a in alpha):
        raise InputError(f"bad multi-index {alpha} for d={d}")
    return alpha


def multi_factorial(alpha) -> float:
    """``alpha! = prod alpha_i!`` as a float."""
    return float(np.exp(sum(lgamma(a + 1) for a in alpha)))


def da_weight(alpha) -> float:
    """Squared norm ``alpha! / |alpha|!`` of ``z^alpha`` in the Drury-Arveson space."""
    return float(np.exp(sum(lgamma(a + 1) for a in alpha) - lgamma(sum(alpha) + 1)))


def monomials(d: int, N: int) -> list:
    """All exponents with ``|alpha| <= N``: by degree, then descending lex."""
    out = []
    for k in range(N + 1):
        out.extend(_degree_k(d, k))
    return out


def _degree_k(d, k):
    if d == 1:
        return [(k,)]
    res = []
    for a in range(k, -1, -1):
        res.extend((a,) + rest for rest in _degree_k(d - 1, k - a))
    return res


class MultiPoly:
    """Polynomial in ``d`` complex variables with complex coefficients."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms=None):
        if d < 1:
            raise InputError("need at least one variable")
        self.d = d
        self.terms = {}
        for alpha, c in (terms or {}).items():
            alpha = _check_alpha(alpha, d)
            c = complex(c)
            if c != 0:
                self.terms[alpha] = self.terms.get(alpha, 0) + c
        self.terms = {a: c for a, c in self.terms.items() if c != 0}

    # constructors
    @classmethod
    def constant(cls, d, c=1.0):
        return cls(d, {(0,) * d: c})

    @classmethod
    def variable(cls, d, i):
        """The coordinate function ``z_i`` (0-based ``i``)."""
        alpha = [0] * d
        alpha[i] = 1
        return cls(d, {tuple(alpha): 1.0})

    @classmethod
    def zero(cls, d):
        return cls(d)

    # structure
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def coefficient(self, alpha) -> complex:
        return self.terms.get(tuple(alpha), 0j)

    def truncate(self, max_degree: int) -> "MultiPoly":
        return MultiPoly(self.d, {a: c for a, c in self.terms.items() if sum(a) <= max_degree})

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.d != self.d:
                raise InputError(f"variable count mismatch: {self.d} vs {other.d}")
            return other
        return MultiPoly.constant(self.d, other)

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for a, c in other.terms.items():
            t[a] = t.get(a, 0) + c
        return MultiPoly(self.d, t)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.d, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def mul(self, other, max_degree=None):
        """Product, optionally dropping terms above ``max_degree``."""
        other = self._coerce(other)
        t = defaultdict(complex)
        for a, c in self.terms.items():
            da = sum(a)
            for b, e in other.terms.items():
                if max_degree is not None and da + sum(b) > max_degree:
                    continue
                t[tuple(x + y for x, y in zip(a, b))] += c * e
        return MultiPoly(self.d, t)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            return self.mul(other)
        other = complex(other)
        return MultiPoly(self.d, {a: c * other for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MultiPoly.constant(self.d)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return f"MultiPoly(d={self.d}, 0)"
        parts = [f"{c:.4g}*z^{a}" for a, c in sorted(self.terms.items())]
        return f"MultiPoly(d={self.d}, " + " + ".join(parts) + ")"

    def __call__(self, z):
        return poly_eval(self, z)

    # serialization
    def to_json(self) -> dict:
        return {
            "d": self.d,
            "terms": [
                {"alpha": list(a), "re": c.real, "im": c.imag}
                for a, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "MultiPoly":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            d = int(obj["d"])
            terms = {}
            for t in obj["terms"]:
                a = _check_alpha(t["alpha"], d)
                terms[a] = terms.get(a, 0) + complex(float(t["re"]), float(t.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed polynomial JSON: {exc}") from exc
        return cls(d, terms)


def _horner(terms: dict, Z, v: int, d: int):
    if v == d:
        return terms.get((), 0j)
    groups = defaultdict(dict)
    for a, c in terms.items():
        groups[a[0]][a[1:]] = c
    acc = 0j
    for k in range(max(groups), -1, -1):
        acc = acc * Z[..., v]
        if k in groups:
            acc = acc + _horner(groups[k], Z, v + 1, d)
    return acc


def poly_eval(f: MultiPoly, z):
    """Evaluate ``f`` at one point (shape ``(d,)``) or many (shape ``(..., d)``).

    Nested Horner scheme, one variable at a time.
    """
    Z = np.asarray(z, dtype=complex)
    if Z.shape[-1] != f.d:
        raise InputError(f"point dimension {Z.shape[-1]} != d={f.d}")
    if not f.terms:
        return np.zeros(Z.shape[:-1], dtype=complex) if Z.ndim > 1 else 0j
    val = _horner(f.terms, Z, 0, f.d)
    if Z.ndim > 1:
        return np.broadcast_to(val, Z.shape[:-1]).astype(complex)
    return complex(val)


class PolyMatrix:
    """Matrix-valued polynomial, stored as exponent -> ``(rows, cols)`` array."""

    def __init__(self, d: int, shape, coeffs=None):
        self.d = int(d)
        self.shape = (int(shape[0]), int(shape[1]))
        self.coeffs = {}
        for a, C in (coeffs or {}).items():
            a = _check_alpha(a, self.d)
            C = np.asarray(C, dtype=complex)
            if C.shape != self.shape:
                raise InputError(f"coefficient shape {C.shape} != {self.shape}")
            if a in self.coeffs:
                C = self.coeffs[a] + C
            self.coeffs[a] = C
        self.coeffs = {a: C for a, C in self.coeffs.items() if np.any(C != 0)}

    @classmethod
    def from_entries(cls, entries) -> "PolyMatrix":
        rows = len(entries)
        cols = len(entries[0])
        d = entries[0][0].d
        coeffs = defaultdict(lambda: np.zeros((rows, cols), dtype=complex))
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise InputError("ragged polynomial matrix")
            for j, f in enumerate(row):
                if f.d != d:
                    raise InputError("entries must share the variable count")
                for a, c in f.terms.items():
                    coeffs[a][i, j] += c
        return cls(d, (rows, cols), dict(coeffs))

    @classmethod
    def identity(cls, d, size, scale=None):
        base = MultiPoly.constant(d) if scale is None else scale
        zero = MultiPoly.zero(d)
        return cls.from_entries(
            [[base if i == j else zero for j in range(size)] for i in range(size)]
        )

    def entry(self, i, j) -> MultiPoly:
        return MultiPoly(self.d, {a: C[i, j] for a, C in self.coeffs.items()})

    def entries(self):
        return [[self.entry(i, j) for j in range(self.shape[1])] for i in range(self.shape[0])]

    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=-1)

    def max_abs_coeff(self) -> float:
        return max((float(np.abs(C).max()) for C in self.coeffs.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs_coeff() <= tol

    def truncate(self, max_degree):
        return PolyMatrix(self.d, self.shape, {a: C for a, C in self.coeffs.items() if sum(a) <= max_degree})

    def compress(self, left, right) -> "PolyMatrix":
        """Return ``left @ P(z) @ right`` coefficientwise."""
        left = np.asarray(left, dtype=complex)
        right = np.asarray(right, dtype=complex)
        shape = (left.shape[0], right.shape[1])
        return PolyMatrix(self.d, shape, {a: left @ C @ right for a, C in self.coeffs.items()})

    def __add__(self, other):
        if other.shape != self.shape or other.d != self.d:
            raise InputError("shape or variable mismatch")
        coeffs = {a: C.copy() for a, C in self.coeffs.items()}
        for a, C in other.coeffs.items():
            coeffs[a] = coeffs[a] + C if a in coeffs else C
        return PolyMatrix(self.d, self.shape, coeffs)

    def __neg__(self):
        return PolyMatrix(self.d, self.shape, {a: -C for a, C in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PolyMatrix(self.d, self.shape, {a: c * C for a, C in self.coeffs.items()})

    def matmul(self, other: "PolyMatrix", max_degree=None) -> "PolyMatrix":
        if self.shape[1] != other.shape[0] or self.d != other.d:
            raise InputError(f"cannot multiply {self.shape} by {other.shape}")
        out = {}
        for a, A in self.coeffs.items():
            da = sum(a)
            for b, B in other.coeffs.items():
                if max_degree is not None and da + sum(b) > max_degree:
                    continue
                key = tuple(x + y for x, y in zip(a, b))
                P = A @ B
                out[key] = out[key] + P if key in out else P
        return PolyMatrix(self.d, (self.shape[0], other.shape[1]), out)

    def __matmul__(self, other):
        return self.matmul(other)

    def __call__(self, z):
        return self.evaluate(z)

    def evaluate(self, z):
        """Value at one point, ``(rows, cols)``, or at many, ``(..., rows, cols)``."""
        Z = np.asarray(z, dtype=complex)
        if Z.shape[-1] != self.d:
            raise InputError(f"point dimension {Z.shape[-1]} != d={self.d}")
        out = np.zeros(Z.shape[:-1] + self.shape, dtype=complex)
        if not self.coeffs:
            return out
        alphas = list(self.coeffs)
        A = np.array(alphas)
        mono = np.prod(Z[..., None, :] ** A, axis=-1)
        C = np.stack([self.coeffs[a] for a in alphas])
        return np.tensordot(mono, C, axes=([-1], [0]))


def _det_entries(entries, max_degree=None):
    N = len(entries)
    d = entries[0][0].d
    memo = {}

    def det(row, cols):
        if row == N:
            return MultiPoly.constant(d)
        key = cols
        if key in memo:
            return memo[key]
        total = MultiPoly.zero(d)
        free = [c for c in range(N) if not cols & (1 << c)]
        for pos, c in enumerate(free):
            e = entries[row][c]
            if not e.terms:
                continue
            term = e.mul(det(row + 1, cols | (1 << c)), max_degree)
            total = total + term if pos % 2 == 0 else total - term
        memo[key] = total
        return total

    return det(0, 0)


def _check_square(Theta: PolyMatrix):
    r, c = Theta.shape
    if r != c:
        raise InputError(f"determinant needs a square matrix, got {Theta.shape}")
    if r > DET_SIZE_CAP:
        raise SizeCapError(f"size cap: {r} > {DET_SIZE_CAP}")
    return r


def poly_det(Theta: PolyMatrix, max_degree=None) -> MultiPoly:
    """Determinant by Laplace expansion along rows (memoized on used columns)."""
    N = _check_square(Theta)
    if N == 0:
        return MultiPoly.constant(Theta.d)
    return _det_entries(Theta.entries(), max_degree)


def poly_adjugate(Theta: PolyMatrix) -> PolyMatrix:
    """Transposed cofactor matrix ``R`` with ``Theta R = R Theta = det(Theta) I``."""
    N = _check_square(Theta)
    E = Theta.entries()
    d = Theta.d
    if N == 1:
        return PolyMatrix.identity(d, 1)
    adj = [[None] * N for _ in range(N)]
    for i in range(N):
        for j in range(N):
            minor = [[E[r][c] for c in range(N) if c != j] for r in range(N) if r != i]
            m = _det_entries(minor)
            adj[j][i] = m if (i + j) % 2 == 0 else -m
    return PolyMatrix.from_entries(adj)


def vanishing_ideal_generators(points) -> list:
    """Products of coordinate linear forms vanishing at each given point.

    For ``k`` points in ``C^d`` this returns the ``d**k`` polynomials
    ``prod_j (z_{i_j} - p^(j)_{i_j})``, one per choice of coordinates
    ``(i_1, ..., i_k)``. Their common zero set is exactly the point set.
    """
    P = np.atleast_2d(np.asarray(points, dtype=complex))
    k, d = P.shape
    if np.any(np.linalg.norm(P, axis=1) >= 1.0):
        raise InputError("points must lie in the open unit ball")
    for a in range(k):
        for b in range(a + 1, k):
            if np.array_equal(P[a], P[b]):
                raise InputError(f"coincident points {a} and {b}")
    forms = [
        [MultiPoly.variable(d, i) - P[j, i] for i in range(d)] for j in range(k)
    ]
    gens = []
    for choice in product(range(d), repeat=k):
        g = MultiPoly.constant(d)
        for j, i in enumerate(choice):
            g = g * forms[j][i]
        gens.append(g)
    return gens


def _grid_points(grid):
    if hasattr(grid, "points"):
        pts = grid.points()
    else:
        pts = grid
    return np.atleast_2d(np.asarray(pts, dtype=complex))


def az_profile(f: MultiPoly, lam, radii, grid) -> np.ndarray:
    """Sampled ``inf |f(z)|`` over grid points of the open ball near ``lam``.

    Entry ``k`` is the minimum of ``|f|`` over grid points ``z`` with
    ``|z| < 1`` and ``|z - lam| < radii[k]``; NaN when no grid point
    qualifies. As the radius shrinks the value can only grow, and its limit
    is ``liminf_{z -> lam} |f(z)|`` in the sampling limit.

    ``f`` may be any callable evaluating on arrays of shape ``(..., d)``.
    """
    lam = np.asarray(lam, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(np.diff(radii) > 0):
        raise InputError("radii must be positive and decreasing")
    Z = _grid_points(grid)
    Z = Z[np.linalg.norm(Z, axis=1) < 1.0]
    dist = np.linalg.norm(Z - lam, axis=1)
    vals = np.abs(f(Z)) if len(Z) else np.zeros(0)
    out = np.full(len(radii), np.nan)
    for k, r in enumerate(radii):
        mask = dist < r
        if mask.any():
            out[k] = vals[mask].min()
    return out
