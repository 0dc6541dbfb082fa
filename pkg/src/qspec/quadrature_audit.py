"""Quadrature rules and exactness audits against the Laplacian eigenbasis."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .manifold import EigenDescriptor, ManifoldSpec, canonicalize, eigen_matrix, eigenbasis

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """n points on a manifold with nonnegative weights.

    Points are canonicalized on construction; both arrays are read-only.
    """

    manifold: ManifoldSpec
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = canonicalize(self.manifold, self.points)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] < 1:
            raise InvalidInputError("a rule needs at least one point")
        if w.shape[0] != pts.shape[0]:
            raise InvalidInputError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be finite")
        bad = np.flatnonzero(w < 0)
        if bad.size:
            raise InvalidInputError(f"negative weight at row {bad[0]}: {w[bad[0]]}")
        pts.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def equal_weights(cls, manifold: ManifoldSpec, points) -> QuadratureRule:
        pts = canonicalize(manifold, points)
        n = pts.shape[0]
        return cls(manifold, pts, np.full(n, manifold.volume / n))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def total_weight(self) -> float:
        return float(math.fsum(self.weights))

    @property
    def normalized(self) -> bool:
        return abs(self.total_weight - self.manifold.volume) <= NORMALIZATION_TOL * self.manifold.volume


@dataclass
class AuditReport:
    residuals: list[tuple[EigenDescriptor, float]]
    k_star: int
    lambda_star: float | None
    first_failure: EigenDescriptor | None
    normalized: bool
    lambda_max: float
    tol: float

    @property
    def exact_count(self) -> int:
        """Number of exactly integrated eigenfunctions in ordinal order (k_star + 1)."""
        return self.k_star + 1

    def to_dict(self, max_rows: int | None = None) -> dict:
        rows = self.residuals if max_rows is None else self.residuals[:max_rows]
        ff = self.first_failure
        return {
            "k_star": self.k_star,
            "exact_count": self.exact_count,
            "lambda_star": self.lambda_star,
            "lambda_max": self.lambda_max,
            "tol": self.tol,
            "normalized": self.normalized,
            "first_failure": None if ff is None else _descriptor_dict(ff),
            "residuals": [dict(_descriptor_dict(e), residual=r) for e, r in rows],
        }


def _descriptor_dict(e: EigenDescriptor) -> dict:
    label = [list(e.label[0]), e.label[1]] if isinstance(e.label[0], tuple) else list(e.label)
    return {"ordinal": e.ordinal, "eigenvalue": e.eigenvalue, "label": label}


def moment_residuals(rule: QuadratureRule, basis) -> np.ndarray:
    """Signed errors sum_i a_i phi_j(x_i) - int phi_j for each descriptor."""
    m = rule.manifold
    phi = eigen_matrix(m, basis, rule.points)
    target = np.array([math.sqrt(m.volume) if e.is_constant else 0.0 for e in basis])
    return rule.weights @ phi - target


def audit_exactness(rule: QuadratureRule, lambda_max: float, tol: float | None = None) -> AuditReport:
    """Certify which eigenfunctions with eigenvalue <= lambda_max the rule
    integrates exactly (|residual| <= tol).

    ``k_star`` counts the exact prefix in ordinal order (-1 if even the
    constant fails). ``lambda_star`` treats eigenspaces atomically: it is the
    eigenvalue just below the first failing one, ``lambda_max`` when nothing
    fails, and None when the constant itself fails.
    """
    m = rule.manifold
    if not lambda_max > 0:
        raise InvalidInputError("lambda_max must be positive")
    if tol is None:
        tol = 1e-10 * m.volume
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    basis = eigenbasis(m, lambda_max)
    res = np.abs(moment_residuals(rule, basis))
    failing = np.flatnonzero(res > tol)
    if failing.size == 0:
        k_star = len(basis) - 1
        first = None
        lam_star = float(lambda_max)
    else:
        k_star = int(failing[0]) - 1
        first = basis[failing[0]]
        lower = [e.eigenvalue for e in basis if e.eigenvalue < first.eigenvalue]
        lam_star = max(lower) if lower else None
    return AuditReport(
        residuals=[(e, float(r)) for e, r in zip(basis, res)],
        k_star=k_star,
        lambda_star=lam_star,
        first_failure=first,
        normalized=rule.normalized,
        lambda_max=float(lambda_max),
        tol=float(tol),
    )


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = total} (sort-based)."""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, n + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    # fix the sum exactly on the support
    support = w > 0
    w[support] += (total - w.sum()) / support.sum()
    return np.maximum(w, 0.0)


def _power_norm(A: np.ndarray, iters: int = 200) -> float:
    """Largest eigenvalue of the PSD matrix A by power iteration."""
    v = np.random.default_rng(0).standard_normal(A.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = A @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        lam = float(v @ w / (v @ v))
        v = w / nrm
    return lam


def fit_weights(m: ManifoldSpec, points, lambda_max: float, steps: int = 10_000) -> np.ndarray:
    """Nonnegative weights summing to vol(M) that minimize the squared moment
    residuals over all eigenfunctions with eigenvalue <= lambda_max.

    Projected gradient descent from equal weights with step 1/L, where L is a
    power-iteration estimate (inflated by 10%) of the Hessian norm.
    """
    pts = canonicalize(m, points)
    n = pts.shape[0]
    vol = m.volume
    w = np.full(n, vol / n)
    if n == 1:
        return np.array([vol])
    basis = eigenbasis(m, lambda_max)
    phi = eigen_matrix(m, basis, pts)
    target = np.array([math.sqrt(vol) if e.is_constant else 0.0 for e in basis])
    H = 2.0 * phi @ phi.T
    L = 1.1 * _power_norm(H)
    if L <= 0:
        return w
    b = 2.0 * phi @ target
    for _ in range(steps):
        w = project_simplex(w - (H @ w - b) / L, vol)
    return w

