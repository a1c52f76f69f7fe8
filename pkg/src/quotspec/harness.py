"""Scenario-driven verification of the spectral identities on finite models.

A scenario file bundles a kernel model, a sampling grid and tolerances.
:func:`run_scenario` builds the quotient tuple, computes its spectrum three
ways (joint eigenvalues, Koszul homology, zeros of the characteristic
function's surjectivity margin) and runs the operator-identity checks. Each
check lands in the report with its tolerance and measured value.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm as _normal
from scipy.stats import qmc

from . import charfn as cf
from .da_model import KernelModelSpec, QuotientModel, quotient_tuple
from .errors import InputError, OutsideDomainError
from .koszul import (
    build_koszul,
    chain_defects,
    homology_dims,
    in_final_kernel,
    in_right_spectrum,
    taylor_spectrum,
)
from .numerics import numerical_rank, opnorm
from .polynomials import PolyMatrix, poly_adjugate, poly_det, vanishing_ideal_generators
from .tuples import CommutingTuple, joint_eigenvalues, purity_defects, shift_tuple, validate_tuple

DEFAULT_TOLERANCES = {
    "rank": 1e-9,
    "identity": 1e-10,
    "dual": 1e-9,
    "chain": 1e-12,
    "spectra_match": 1e-7,
    "kappa_max": 1e8,
    "beurling_N": 12,
    "beurling": 1e-4,
    "beurling_angle": 1e-4,
    "dilation_N": 40,
    "dilation": 1e-6,
    "dilation_radius_cap": 0.6,
    "dilation_rate_rel": 0.2,
    "annihilator_N": 40,
    "annihilator": 1e-6,
    "normalization": 1e-2,
    "az_radii": [0.2, 0.1, 0.05, 0.01, 0.001],
    "az_zero": 1e-3,
    "az_far": 0.1,
    "lambda_samples": 50,
    "interior_samples": 100,
    "dual_samples": 100,
}

# Truncated spaces beyond this many coordinates are too slow for routine checks.
POLY_SIZE_CAP = 1200
# Degree of the Taylor polynomial used for the exact adjugate identity.
ADJUGATE_DEGREE = 4

ALL_CHECKS = (
    "model",
    "chain",
    "homology",
    "spectra",
    "localization",
    "boundary_surjectivity",
    "dual_identity",
    "dilation",
    "beurling",
    "annihilator",
    "az",
)


# -- sampling ----------------------------------------------------------------


def sphere_points(count: int, d: int, seed: int = 0) -> np.ndarray:
    """``count`` points on the unit sphere of ``C^d`` from a scrambled Sobol sequence.

    Sobol points in ``[0,1)^{2d}`` are pushed through the normal quantile
    function and normalized, which spreads them evenly over the sphere.
    """
    if count < 1:
        raise InputError("count must be positive")
    sampler = qmc.Sobol(d=2 * d, scramble=True, seed=seed)
    u = sampler.random_base2(max(1, math.ceil(math.log2(count))))[:count]
    g = _normal.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    z = g[:, :d] + 1j * g[:, d:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class GridSpec:
    """Sampling of the closed ball: spheres at the given radii plus extra points.

    ``boundary_points`` is the size of the separate unit-sphere sample used
    for boundary surjectivity scans.
    """

    radii: tuple = (0.25, 0.5, 0.75, 0.9, 1.0)
    points_per_sphere: int = 64
    seed: int = 0
    extra_points: tuple = ()
    boundary_points: int = 512

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        object.__setattr__(self, "radii", r)
        if any(x < 0 or x > 1 for x in r) or list(r) != sorted(r):
            raise InputError("grid radii must be ascending within [0, 1]")
        if self.points_per_sphere < 1 or self.boundary_points < 1:
            raise InputError("grid counts must be at least 1")

    def points(self, d: int) -> np.ndarray:
        out = []
        for level, r in enumerate(self.radii):
            if r == 0:
                out.append(np.zeros((1, d), dtype=complex))
            else:
                out.append(r * sphere_points(self.points_per_sphere, d, self.seed + level))
        if self.extra_points:
            extra = np.array(self.extra_points, dtype=complex).reshape(-1, d)
            out.append(extra)
        return np.concatenate(out, axis=0)

    def boundary(self, d: int) -> np.ndarray:
        return sphere_points(self.boundary_points, d, self.seed + 1000)

    @classmethod
    def from_json(cls, obj) -> "GridSpec":
        if obj is None:
            return cls()
        try:
            extra = tuple(
                tuple(_complex(c) for c in p) for p in obj.get("extra_points", [])
            )
            return cls(
                radii=tuple(obj.get("radii", cls.radii)),
                points_per_sphere=int(obj.get("points_per_sphere", cls.points_per_sphere)),
                seed=int(obj.get("seed", 0)),
                extra_points=extra,
                boundary_points=int(obj.get("boundary_points", cls.boundary_points)),
            )
        except (TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"grid: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "radii": list(self.radii),
            "points_per_sphere": self.points_per_sphere,
            "seed": self.seed,
            "extra_points": [[[c.real, c.imag] for c in p] for p in self.extra_points],
            "boundary_points": self.boundary_points,
        }


def _complex(c):
    if isinstance(c, (list, tuple)):
        return complex(float(c[0]), float(c[1]))
    return complex(c)


# -- models ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Model:
    """A pure commuting row contraction with its characteristic function.

    ``quotient`` is set when the tuple comes from a kernel model.
    """

    name: str
    T: CommutingTuple
    evaluator: cf.CharFnEvaluator = field(repr=False)
    quotient: QuotientModel | None = field(default=None, repr=False)

    @property
    def d(self):
        return self.T.d

    @property
    def node_points(self):
        return None if self.quotient is None else self.quotient.spec.distinct_points()

    @classmethod
    def from_spec(cls, spec: KernelModelSpec, name: str = "kernel-model", kappa_max=cf.KAPPA_MAX):
        q = quotient_tuple(spec)
        return cls(name, q.T, cf.CharFnEvaluator(cf.defect_data(q.T), kappa_max=kappa_max), q)

    @classmethod
    def from_tuple(cls, T: CommutingTuple, name: str = "tuple", kappa_max=cf.KAPPA_MAX):
        return cls(name, T, cf.CharFnEvaluator(cf.defect_data(T), kappa_max=kappa_max))


def fix_a(d: int = 2) -> KernelModelSpec:
    """Single node at the origin: ``T = 0`` on ``C^1``."""
    return KernelModelSpec(d, 1, np.zeros((1, d)), np.ones((1, 1)))


def fix_b() -> KernelModelSpec:
    """Nodes ``(0, 0)`` and ``(0.5, 0)`` in ``d = 2`` with scalar coefficients."""
    return KernelModelSpec(2, 1, [[0, 0], [0.5, 0]], [[1], [1]])


def diagonal_tuple(points) -> CommutingTuple:
    """Diagonal tuple whose joint eigenvalues are the rows of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=complex))
    return validate_tuple([np.diag(P[:, i]) for i in range(P.shape[1])])


def random_kernel_spec(
    seed: int,
    d: int = 2,
    k: int = 3,
    m: int = 1,
    max_radius: float = 0.6,
    min_sep: float = 0.2,
) -> KernelModelSpec:
    """Seeded kernel model with well-separated nodes.

    With ``m >= 2`` the last node repeats the first point with an
    independent coefficient vector.
    """
    rng = np.random.default_rng(seed)
    n_distinct = k - 1 if (m >= 2 and k >= 2) else k
    pts = []
    while len(pts) < n_distinct:
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        z *= max_radius * rng.uniform(0.3, 1.0) ** (1 / (2 * d)) / np.linalg.norm(z)
        if all(np.linalg.norm(z - p) >= min_sep for p in pts):
            pts.append(z)
    vecs = [rng.standard_normal(m) + 1j * rng.standard_normal(m) for _ in pts]
    if n_distinct < k:
        v0 = vecs[0]
        w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        w -= np.vdot(v0, w) / np.vdot(v0, v0) * v0
        pts.append(pts[0].copy())
        vecs.append(w)
    return KernelModelSpec(d, m, np.array(pts), np.array(vecs))


# -- checks ------------------------------------------------------------------


@dataclass
class Check:
    """Outcome of one acceptance clause."""

    name: str
    module: str
    operation: str
    tolerance: float
    measured: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: {self.module}.{self.operation} "
            f"measured={self.measured:.3e} tol={self.tolerance:.1e}"
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "module": self.module,
            "operation": self.operation,
            "tolerance": _num(self.tolerance),
            "measured": _num(self.measured),
            "passed": bool(self.passed),
            "detail": _jsonable(self.detail),
        }


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _match(A, B, tol):
    """Points of ``A`` with no partner in ``B`` within ``tol``."""
    A = np.atleast_2d(A) if len(A) else np.zeros((0, 1))
    B = np.atleast_2d(B) if len(B) else np.zeros((0, 1))
    if len(B) == 0:
        return A
    return np.array(
        [a for a in A if np.min(np.linalg.norm(B - a, axis=1)) > tol]
    ).reshape(-1, A.shape[1] if A.size else 1)


@dataclass
class SpectraComparison:
    oracle: np.ndarray
    koszul: np.ndarray
    margin_zero: np.ndarray
    right_agrees: bool
    differences: dict
    margins: dict

    @property
    def passed(self) -> bool:
        return self.right_agrees and all(len(v) == 0 for v in self.differences.values())


def _probe_points(points: np.ndarray, radius: float = 0.05) -> np.ndarray:
    d = points.shape[1]
    dirs = [np.eye(d, dtype=complex)[0], 1j * np.eye(d, dtype=complex)[-1]]
    probes = [p + radius * u for p in points for u in dirs]
    return np.array(probes).reshape(-1, d)


def compare_spectra(model: Model, rel_tol: float = 1e-9, match_tol: float = 1e-7, seed: int = 0) -> SpectraComparison:
    """Joint eigenvalues vs Koszul-positive points vs zero-margin points.

    The candidate set is the joint eigenvalues plus probe points near each
    of them; a probe must come out non-spectral in both tests.
    """
    T = model.T
    ks = taylor_spectrum(T, rel_tol, seed=seed)
    oracle = ks.points
    probes = _probe_points(oracle)
    cands = np.concatenate([oracle, probes], axis=0)
    K = build_koszul(T)
    kpos, mzero, margins = [], [], {}
    for idx, lam in enumerate(cands):
        if any(h > 0 for h in homology_dims(K, lam, rel_tol)):
            kpos.append(lam)
        try:
            th = cf.charfn_eval(model.evaluator, lam)
        except OutsideDomainError:
            continue
        mg = cf.surjectivity_margin(model.evaluator, lam)
        margins[idx] = mg
        if mg <= rel_tol * max(1.0, opnorm(th)):
            mzero.append(lam)
    d = T.d
    kpos = np.array(kpos).reshape(-1, d)
    mzero = np.array(mzero).reshape(-1, d)
    diffs = {
        "oracle_minus_koszul": _match(oracle, kpos, match_tol),
        "koszul_minus_oracle": _match(kpos, oracle, match_tol),
        "oracle_minus_margin": _match(oracle, mzero, match_tol),
        "margin_minus_oracle": _match(mzero, oracle, match_tol),
    }
    right_agrees = all(r == t for r, t in zip(ks.right, ks.taylor))
    return SpectraComparison(oracle, kpos, mzero, right_agrees, diffs, margins)


def scan_margins(model: Model, grid) -> list:
    """Per-point rows ``(z, margin, dual_residual, in_extension_domain)``.

    ``grid`` is a :class:`GridSpec` or an array of points. Points outside
    the extension domain get NaN margin and residual.
    """
    pts = grid.points(model.d) if isinstance(grid, GridSpec) else np.atleast_2d(grid)
    rows = []
    for z in pts:
        try:
            mg = cf.surjectivity_margin(model.evaluator, z)
            res = cf.dual_identity_residual(model.evaluator, z)
            inside = 1
        except OutsideDomainError:
            mg, res, inside = float("nan"), float("nan"), 0
        rows.append({"z": z, "margin": mg, "dual_residual": res, "in_extension_domain": inside})
    return rows


def margins_csv(rows, d: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = []
    for i in range(1, d + 1):
        header += [f"re_z{i}", f"im_z{i}"]
    w.writerow(header + ["margin", "dual_residual", "in_extension_domain"])
    for r in rows:
        coords = []
        for c in r["z"]:
            coords += [repr(float(c.real)), repr(float(c.imag))]
        w.writerow(coords + [repr(float(r["margin"])), repr(float(r["dual_residual"])), r["in_extension_domain"]])
    return buf.getvalue()


# -- individual checks -------------------------------------------------------


def _sample_lambdas(T: CommutingTuple, candidates, count: int, seed: int):
    """Candidates, probes next to them, and random points in a ball around the spectrum."""
    rng = np.random.default_rng(seed)
    base = [c for c in candidates]
    base += list(_probe_points(np.atleast_2d(candidates), 0.02))
    scale = 1.0 + T.norm()
    while len(base) < count:
        z = rng.standard_normal(T.d) + 1j * rng.standard_normal(T.d)
        base.append(scale * rng.uniform() * z / np.linalg.norm(z))
    return np.array(base[:max(count, len(candidates))])


def check_chain(model, tol):
    K = build_koszul(model.T)
    scale = max(1.0, model.T.norm() ** 2)
    worst = max(chain_defects(K), default=0.0) / scale
    return Check("koszul_chain", "koszul", "build_koszul", tol["chain"], worst, worst <= tol["chain"])


def check_homology(model, tol, candidates, seed):
    T = model.T
    K = build_koszul(T)
    lams = _sample_lambdas(T, candidates, int(tol["lambda_samples"]), seed)
    bad_h0 = bad_hd = bad_euler = 0
    for lam in lams:
        h = homology_dims(K, lam, tol["rank"])
        row = shift_tuple(T, lam).row()
        if h[0] != T.n - numerical_rank(row, tol["rank"], max(1.0, T.norm())):
            bad_h0 += 1
        if h[-1] != in_final_kernel(T, lam, tol["rank"]):
            bad_hd += 1
        if sum((-1) ** p * x for p, x in enumerate(h)) != 0:
            bad_euler += 1
    bad = bad_h0 + bad_hd + bad_euler
    return Check(
        "homology_identification",
        "koszul",
        "homology_dims",
        0.0,
        float(bad),
        bad == 0,
        {"samples": len(lams), "h0_mismatch": bad_h0, "hd_mismatch": bad_hd, "euler_nonzero": bad_euler},
    )


def interior_points(grid: GridSpec, d: int, count: int, candidates) -> np.ndarray:
    pts = grid.points(d)
    pts = pts[np.linalg.norm(pts, axis=1) < 1.0]
    extra = np.atleast_2d(candidates)
    out = np.concatenate([extra, pts], axis=0)
    if len(out) < count:
        rng = np.random.default_rng(grid.seed + 7)
        more = sphere_points(count - len(out), d, grid.seed + 7) * rng.uniform(0, 0.99, (count - len(out), 1))
        out = np.concatenate([out, more], axis=0)
    return out[:max(count, len(extra))]


def check_localization(model, tol, grid, candidates):
    E = model.evaluator
    K = build_koszul(model.T)
    pts = interior_points(grid, model.d, int(tol["interior_samples"]), candidates)
    bad = 0
    for lam in pts:
        if cf.cokernel_dim(E, lam) != homology_dims(K, lam, tol["rank"])[0]:
            bad += 1
    return Check(
        "interior_localization", "charfn", "charfn_eval", 0.0, float(bad), bad == 0, {"samples": len(pts)}
    )


def check_boundary(model, tol, grid):
    E = model.evaluator
    pts = grid.boundary(model.d)
    worst = np.inf
    failures = 0
    for z in pts:
        try:
            th = cf.charfn_eval(E, z)
        except OutsideDomainError:
            failures += 1
            continue
        mg = cf.surjectivity_margin(E, z)
        worst = min(worst, mg)
        if mg <= tol["rank"] * max(1.0, opnorm(th)):
            failures += 1
    return Check(
        "boundary_surjectivity",
        "charfn",
        "surjectivity_margin",
        tol["rank"],
        float(worst),
        failures == 0,
        {"points": len(pts), "min_margin": worst, "failures": failures},
    )


def check_dual(model, tol, grid):
    E = model.evaluator
    n_total = int(tol["dual_samples"])
    n_bnd = max(20, n_total // 4)
    inner = interior_points(grid, model.d, n_total - n_bnd, np.zeros((0, model.d)))[: n_total - n_bnd]
    bnd = grid.boundary(model.d)[:n_bnd]
    worst_ratio = 0.0
    worst_res = 0.0
    for z in np.concatenate([inner, bnd], axis=0):
        res = cf.dual_identity_residual(E, z)
        cond = cf.dual_condition(E, z)
        worst_res = max(worst_res, res)
        worst_ratio = max(worst_ratio, res / (1.0 + cond))
    return Check(
        "dual_identity",
        "charfn",
        "dual_identity_residual",
        tol["dual"],
        worst_ratio,
        worst_ratio <= tol["dual"],
        {"points": len(inner) + len(bnd), "boundary_points": len(bnd), "max_residual": worst_res},
    )


def dilation_profile(model: Model, N: int) -> dict:
    """Direct isometry defect at ``N`` and the tail ``||P_T^{N+1}(1)||``.

    ``1 - j_N^* j_N = P_T^{N+1}(1)`` exactly, so the purity sequence measures
    the defect below the roundoff floor of the direct computation.
    """
    J = cf.canonical_dilation(model.evaluator, N)
    direct = opnorm(J.conj().T @ J - np.eye(model.T.n))
    seq = purity_defects(model.T, max(2 * N + 1, N + 1))
    return {"direct": direct, "tail": seq}


def check_dilation(model, tol):
    N = int(tol["dilation_N"])
    prof = dilation_profile(model, N)
    tail = prof["tail"]
    direct = prof["direct"]
    detail = {"N": N, "direct_defect": direct}
    passed = True
    measured = direct
    r_max = None
    if model.quotient is not None:
        r_max = model.quotient.spec.max_radius
    else:
        r_max = float(np.max(np.abs(joint_eigenvalues(model.T).points)))
        r_max = max(r_max, float(np.max(np.linalg.norm(joint_eigenvalues(model.T).points, axis=1))))
    detail["r_max"] = r_max
    if r_max <= tol["dilation_radius_cap"]:
        passed = direct <= tol["dilation"]
    n1, n2 = N // 2, N
    t1, t2 = tail[n1], tail[n2]  # ||P^{n+1}(1)|| sits at index n
    detail["tail_at_half_N"] = t1
    detail["tail_at_N"] = t2
    if r_max > 0 and t1 > 0 and t2 > 0:
        slope = math.log(t2 / t1) / (n2 - n1)
        expected = 2 * math.log(r_max)
        rel = abs(slope / expected - 1.0)
        detail.update(slope=slope, expected_slope=expected, slope_rel_error=rel)
        passed = passed and rel <= tol["dilation_rate_rel"]
    else:
        detail["slope"] = "exact (tail vanishes)"
        passed = passed and t2 <= tol["dilation"]
    return Check("dilation_isometry", "charfn", "canonical_dilation", tol["dilation"], measured, passed, detail)


def check_beurling(model, tol):
    width = max(*model.evaluator.shape, 1 if model.quotient is None else model.quotient.spec.m)
    N = affordable_degree(model.d, int(tol["beurling_N"]), width)
    N_next = affordable_degree(model.d, N + 8, width)
    b1 = cf.beurling_range_check(model.evaluator, N, model.quotient)
    b2 = cf.beurling_range_check(model.evaluator, N_next, model.quotient) if N_next > N else b1
    angle = b1.max_angle if not math.isnan(b1.max_angle) else 0.0
    passed = b1.residual <= tol["beurling"] and angle <= tol["beurling_angle"]
    return Check(
        "beurling_identity",
        "charfn",
        "beurling_range_check",
        tol["beurling"],
        b1.residual,
        passed,
        {
            "N": N,
            "residual": b1.residual,
            "max_angle": b1.max_angle,
            "coefficient_isometry": b1.coefficient_isometry,
            "N_next": N_next,
            "residual_next": b2.residual,
            "max_angle_next": b2.max_angle,
        },
    )


def boundary_resolvent_point(model: Model) -> np.ndarray:
    """``(1, 0, ..., 0)``, the boundary point used for the normalization clause."""
    lam = np.zeros(model.d, dtype=complex)
    lam[0] = 1.0
    return lam


def annihilator_family(model: Model):
    """``det(theta V)`` for the standard choice of ``V`` and the normalized one.

    Empty when ``dim D_{T*} > dim D_T``, where no square choice exists.
    """
    E = model.evaluator
    r_s, r_t = E.shape
    fams = []
    if r_s == 0 or r_s > r_t:
        return fams
    fams.append(("standard", np.eye(r_t, dtype=complex)[:, :r_s]))
    try:
        fams.append(("normalized", cf.normalizing_vectors(E, boundary_resolvent_point(model))))
    except (InputError, OutsideDomainError):
        pass
    return fams


def affordable_degree(d: int, N: int, width: int = 1, cap: int = POLY_SIZE_CAP) -> int:
    """Largest ``N' <= N`` with ``binom(N'+d, d) * width <= cap`` (at least 1)."""
    while N > 1 and math.comb(N + d, d) * width > cap:
        N -= 1
    return N


def adjugate_residual(E: cf.CharFnEvaluator, V, N: int) -> float:
    """Largest coefficient of ``Theta adj(Theta) - det(Theta) I`` for ``Theta = theta_N V``.

    Exact polynomial arithmetic, relative to the largest coefficient of ``Theta``.
    """
    Theta = cf.charfn_taylor(E, N).compress(np.eye(E.shape[0]), V)
    adj = poly_adjugate(Theta)
    det = poly_det(Theta)
    size = Theta.shape[0]
    detI = PolyMatrix(Theta.d, (size, size), {a: c * np.eye(size) for a, c in det.terms.items()})
    scale = max(1.0, Theta.max_abs_coeff()) ** size
    return float((Theta.matmul(adj) - detI).max_abs_coeff() / scale)


def check_annihilator(model, tol):
    E = model.evaluator
    N = int(tol["annihilator_N"])
    fams = annihilator_family(model)
    nodes = model.node_points if model.node_points is not None else joint_eigenvalues(model.T).points
    worst = 0.0
    for _, V in fams:
        worst = max(worst, float(np.max(np.abs(cf.CharFnDeterminant(E, V)(nodes)))))
    detail = {"family_size": len(fams), "max_at_nodes": worst}
    passed = worst <= tol["annihilator"] and len(fams) > 0
    # Polynomial form, when the monomial count allows it.
    N_poly = affordable_degree(model.d, N, E.shape[0])
    detail["N"] = N_poly
    if fams:
        f = cf.annihilator_from_charfn(E, fams[0][1], N_poly, max_degree=N_poly)
        poly_worst = float(np.max(np.abs(f(nodes))))
        r_max = float(np.max(np.linalg.norm(nodes, axis=1)))
        allowed = max(tol["annihilator"], 10 * E.shape[0] * cf.taylor_tail_bound(r_max, N_poly))
        detail.update(poly_max_at_nodes=poly_worst, poly_allowed=allowed)
        passed = passed and poly_worst <= allowed
        adj_res = adjugate_residual(E, fams[0][1], ADJUGATE_DEGREE)
        detail["adjugate_residual"] = adj_res
        passed = passed and adj_res <= tol["identity"]
        worst = max(worst, poly_worst)
    named = dict(fams)
    if "normalized" in named:
        lam = boundary_resolvent_point(model)
        ts = 1.0 - np.array([1e-1, 1e-2, 1e-3, 1e-4])
        vals = cf.CharFnDeterminant(E, named["normalized"])(ts[:, None] * lam[None, :])
        detail["radial_values"] = vals
        limit_err = float(abs(vals[-1] - 1.0))
        detail["limit_error"] = limit_err
        passed = passed and limit_err <= tol["normalization"]
    return Check("determinant_annihilator", "charfn", "annihilator_from_charfn", tol["annihilator"], worst, passed, detail)


def az_profiles(f, lams, radii, samples) -> np.ndarray:
    """Vectorized :func:`~quotspec.polynomials.az_profile` over many centres."""
    samples = samples[np.linalg.norm(samples, axis=1) < 1.0]
    vals = np.abs(f(samples))
    ok = np.isfinite(vals)
    samples, vals = samples[ok], vals[ok]
    dist = np.linalg.norm(lams[:, None, :] - samples[None, :, :], axis=2)
    out = np.full((len(lams), len(radii)), np.nan)
    for k, r in enumerate(radii):
        mask = dist < r
        m = np.where(mask, vals[None, :], np.inf).min(axis=1)
        m[~mask.any(axis=1)] = np.nan
        out[:, k] = m
    return out


def check_az(model, tol, grid, spectrum):
    radii = list(tol["az_radii"])
    d = model.d
    if model.node_points is not None:
        gens = vanishing_ideal_generators(model.node_points)
    else:
        gens = vanishing_ideal_generators(spectrum)
    gens = gens + [cf.CharFnDeterminant(model.evaluator, V) for _, V in annihilator_family(model)]
    rings = []
    for p in spectrum:
        for r in radii:
            rings.append(p + (r / 100.0) * sphere_points(8, d, 11))
    grid_pts = grid.points(d)
    bnd = grid.boundary(d)
    pulled = np.concatenate([grid_pts * 0.99, grid_pts * 0.97, bnd * 0.99, bnd * 0.97], axis=0)
    samples = np.concatenate([grid_pts, pulled] + rings, axis=0)
    queries = np.concatenate([spectrum, grid_pts, bnd], axis=0)
    profiles = np.stack([az_profiles(g, queries, radii, samples) for g in gens])  # (G, Q, R)
    finest = profiles[:, :, -1]
    zero_at_spec = bool(np.all(finest[:, : len(spectrum)] < tol["az_zero"]))
    dist_spec = np.min(np.linalg.norm(queries[:, None, :] - spectrum[None, :, :], axis=2), axis=1)
    far = dist_spec > tol["az_far"]
    # Profile at the radius that keeps neighbourhoods of far points clear of the spectrum.
    far_radius_idx = next(i for i, r in enumerate(radii) if r <= tol["az_far"] / 2)
    far_vals = np.nanmax(profiles[:, far, far_radius_idx], axis=0) if far.any() else np.array([np.inf])
    lower = float(np.nanmin(far_vals))
    sampled_az = queries[np.nan_to_num(finest, nan=np.inf).max(axis=0) < tol["az_zero"]]
    stray = [q for q in sampled_az if np.min(np.linalg.norm(spectrum - q, axis=1)) > tol["az_far"]]
    passed = zero_at_spec and lower > 0 and not stray
    return Check(
        "approximate_zero_sets",
        "polynomials",
        "az_profile",
        tol["az_zero"],
        float(np.max(finest[:, : len(spectrum)])),
        passed,
        {
            "generators": len(gens),
            "far_points": int(far.sum()),
            "far_lower_bound": lower,
            "far_radius": radii[far_radius_idx],
            "stray_points": len(stray),
        },
    )


# -- scenario ----------------------------------------------------------------


@dataclass
class SpectrumReport:
    model: str
    seed: int
    candidates: list
    h_vectors: list
    right_flags: list
    right_margins: list
    right_essential: list
    grid_summary: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "seed": self.seed,
            "candidates": _jsonable(self.candidates),
            "h_vectors": _jsonable(self.h_vectors),
            "right_flags": _jsonable(self.right_flags),
            "right_margins": _jsonable(self.right_margins),
            "right_essential": _jsonable(self.right_essential),
            "grid_summary": _jsonable(self.grid_summary),
            "checks": [c.to_json() for c in self.checks],
            "passed": self.passed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


@dataclass
class Scenario:
    name: str
    spec: KernelModelSpec
    grid: GridSpec
    tolerances: dict
    checks: tuple

    @classmethod
    def from_json(cls, obj, name: str = "scenario") -> "Scenario":
        if not isinstance(obj, dict):
            raise InputError("scenario must be a JSON object")
        if "model" not in obj:
            raise InputError("scenario: missing field 'model'")
        spec = KernelModelSpec.from_json(obj["model"])
        grid = GridSpec.from_json(obj.get("grid"))
        tol = dict(DEFAULT_TOLERANCES)
        unknown = set(obj.get("tolerances", {})) - set(tol)
        if unknown:
            raise InputError(f"scenario: unknown tolerance keys {sorted(unknown)}")
        tol.update(obj.get("tolerances", {}))
        checks = tuple(obj.get("checks", ALL_CHECKS))
        bad = set(checks) - set(ALL_CHECKS)
        if bad:
            raise InputError(f"scenario: unknown checks {sorted(bad)}")
        return cls(obj.get("name", name), spec, grid, tol, checks)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return Scenario.from_json(obj, name=path.stem)


def run_model(model: Model, grid: GridSpec, tol: dict, checks=ALL_CHECKS, seed: int = 0) -> SpectrumReport:
    """Run the selected checks on a built model."""
    tol = {**DEFAULT_TOLERANCES, **tol}
    T = model.T
    ks = taylor_spectrum(T, tol["rank"], seed=seed)
    spectrum = ks.spectrum
    results = []
    if "model" in checks:
        res = model.evaluator.defects.intertwining_residuals()
        worst = max(res)
        results.append(
            Check(
                "model_validity",
                "charfn",
                "defect_data",
                tol["identity"],
                worst,
                worst <= tol["identity"] and model.evaluator.defects.pure and ks.oracle_stable,
                {"pure": model.evaluator.defects.pure, "oracle_stable": ks.oracle_stable},
            )
        )
    if "chain" in checks:
        results.append(check_chain(model, tol))
    if "homology" in checks:
        results.append(check_homology(model, tol, ks.points, seed))
    if "spectra" in checks:
        cmp = compare_spectra(model, tol["rank"], tol["spectra_match"], seed)
        results.append(
            Check(
                "three_way_spectra",
                "harness",
                "compare_spectra",
                tol["spectra_match"],
                float(sum(len(v) for v in cmp.differences.values())),
                cmp.passed,
                {
                    "oracle": cmp.oracle,
                    "koszul": cmp.koszul,
                    "margin_zero": cmp.margin_zero,
                    "right_agrees_with_taylor": cmp.right_agrees,
                },
            )
        )
    if "localization" in checks:
        results.append(check_localization(model, tol, grid, ks.points))
    if "boundary_surjectivity" in checks:
        results.append(check_boundary(model, tol, grid))
    if "dual_identity" in checks:
        results.append(check_dual(model, tol, grid))
    if "dilation" in checks:
        results.append(check_dilation(model, tol))
    if "beurling" in checks:
        results.append(check_beurling(model, tol))
    if "annihilator" in checks:
        results.append(check_annihilator(model, tol))
    if "az" in checks:
        results.append(check_az(model, tol, grid, spectrum))

    rows = scan_margins(model, grid)
    margins = np.array([r["margin"] for r in rows])
    pts = np.array([r["z"] for r in rows])
    dist = np.min(np.linalg.norm(pts[:, None, :] - spectrum[None, :, :], axis=2), axis=1)
    off = dist > 0.1
    summary = {
        "grid_points": len(rows),
        "min_margin_off_spectrum": float(np.nanmin(margins[off])) if off.any() else "nan",
        "max_margin_near_spectrum": float(np.nanmax(margins[~off])) if (~off).any() else "nan",
        "margins_at_spectrum": [cf.surjectivity_margin(model.evaluator, lam) for lam in spectrum],
    }
    return SpectrumReport(
        model=model.name,
        seed=seed,
        candidates=ks.points,
        h_vectors=ks.h_vectors,
        right_flags=ks.right,
        right_margins=ks.right_margins,
        right_essential=ks.right_essential,
        grid_summary=summary,
        checks=results,
    )


def run_scenario(scenario, seed: int | None = None) -> SpectrumReport:
    """Load (if given a path) and run a scenario. Deterministic for a fixed seed."""
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    grid = scenario.grid
    if seed is not None:
        grid = GridSpec(grid.radii, grid.points_per_sphere, seed, grid.extra_points, grid.boundary_points)
    model = Model.from_spec(scenario.spec, scenario.name, kappa_max=scenario.tolerances["kappa_max"])
    return run_model(model, grid, scenario.tolerances, scenario.checks, seed=grid.seed)
