"""Rayleigh-quotient ceilings on the largest exactly integrated eigenvalue.

For a rule that integrates phi_0..phi_k exactly, the heat-mollified measure
G_t = sum_i a_i e^{t Delta} delta_{x_i} - 1 has no spectral mass below
lambda_{k+1}, so

    N(t) / D(t) >= lambda_{k+1} >= lambda_k,

with N(t) = sum_ij a_i a_j <grad e^{tD} d_xi, grad e^{tD} d_xj> and
D(t) = sum_ij a_i a_j <e^{tD} d_xi, e^{tD} d_xj> - vol(M). On the model
manifolds both sums are computed from exact kernels.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, PreconditionError
from .heat_kernel import DEFAULT_CONFIG, KernelConfig, kernel_terms
from .manifold import half_integer_gamma, pairwise_distances, weyl_count
from .quadrature_audit import QuadratureRule

# relative rounding allowance per kernel evaluation, in units of the sum of
# absolute series terms; covers series accumulation, Legendre recurrence and
# the conditioning of cos/exp in the point coordinates
ROUNDING = 1e-12


@dataclass(frozen=True)
class Quotient:
    """Numerator/denominator of the Rayleigh quotient with rounding radii."""

    t: float
    numerator: float
    denominator: float
    numerator_err: float
    denominator_err: float

    @property
    def resolved(self) -> bool:
        return self.denominator - self.denominator_err > 0.0

    @property
    def value(self) -> float:
        """Plain N/D (infinite when D <= 0)."""
        return self.numerator / self.denominator if self.denominator > 0 else math.inf

    @property
    def bound(self) -> float:
        """Upper end of the rounding interval of N/D; infinite when D is not
        distinguishable from zero."""
        if not self.resolved:
            return math.inf
        return (self.numerator + self.numerator_err) / (self.denominator - self.denominator_err)


def _require_normalized(rule: QuadratureRule):
    if not rule.normalized:
        raise PreconditionError(
            f"rule weights sum to {rule.total_weight!r}, expected vol(M) = {rule.manifold.volume!r}"
        )


def rayleigh_quotient(rule: QuadratureRule, t: float, cfg: KernelConfig | None = None) -> Quotient:
    cfg = cfg or DEFAULT_CONFIG
    _require_normalized(rule)
    if not (np.isfinite(t) and t > 0):
        raise InvalidInputError(f"t must be positive, got {t}")
    m = rule.manifold
    vol = m.volume
    a = rule.weights
    X = rule.points
    terms = kernel_terms(m, 2.0 * t, X[:, None, :], X[None, :, :], cfg)
    A = np.outer(a, a)
    S = math.fsum(a)
    S2 = S * S
    # sum a_i a_j K = sum a_i a_j (K - 1/vol) + S^2/vol; keeps large-t cancellation out
    den = float(np.sum(A * terms.centered)) + (S2 - vol * vol) / vol
    den_err = ROUNDING * float(np.sum(A * terms.abs_centered)) + S2 * cfg.tail_tol + 4e-16 * S2 / vol
    num = float(np.sum(A * terms.rate))
    num_err = ROUNDING * float(np.sum(A * terms.abs_rate)) + S2 * cfg.tail_tol
    return Quotient(float(t), num, den, num_err, den_err)


def rayleigh_bound(rule: QuadratureRule, t: float, cfg: KernelConfig | None = None) -> float:
    """Ceiling on lambda_{k*} at diffusion time t, or ``math.inf`` when the
    denominator cannot be resolved from zero (no information at this t)."""
    return rayleigh_quotient(rule, t, cfg).bound


def distance_weighted_majorant(rule: QuadratureRule, t: float, cfg: KernelConfig | None = None) -> float:
    """Diagnostic: sum a_i a_j (1/t + d_ij^2/t^2) K_2t / D(t), i.e. the
    distance-weighted form with the unknown constant set to 1."""
    q = rayleigh_quotient(rule, t, cfg)
    if not q.resolved:
        return math.inf
    m = rule.manifold
    X = rule.points
    K = kernel_terms(m, 2.0 * t, X[:, None, :], X[None, :, :], cfg).full
    d2 = pairwise_distances(m, X) ** 2
    A = np.outer(rule.weights, rule.weights)
    return float(np.sum(A * (1.0 / t + d2 / t**2) * K)) / q.denominator


def diagonal_ceiling(rule: QuadratureRule, t: float, cfg: KernelConfig | None = None) -> float:
    """The lossy flat-torus ceiling (d/4t) S / (S - vol) with the pair sum S
    replaced by its diagonal part sum_i a_i^2 K_2t(x_i, x_i).

    Valid only on flat manifolds, where -1/2 d/dt K_2t <= (d/4t) K_2t pairwise.
    """
    m = rule.manifold
    if not m.is_flat:
        raise InvalidInputError("diagonal_ceiling applies to flat manifolds only")
    _require_normalized(rule)
    x0 = rule.points[:1]
    kdiag = float(kernel_terms(m, 2.0 * t, x0, x0, cfg).full[0])
    s = float(np.sum(rule.weights**2)) * kdiag
    if s <= m.volume:
        return math.inf
    return m.dim / (4.0 * t) * s / (s - m.volume)


@dataclass
class BoundCurve:
    samples: list[tuple[float, float]]
    best_t: float | None
    best_bound: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.best_bound)

    def to_csv(self) -> str:
        lines = ["t,bound"]
        lines += [f"{t:.17g},{b:.17g}" for t, b in self.samples]
        return "\n".join(lines) + "\n"


def default_t_range(rule: QuadratureRule) -> tuple[float, float]:
    """[1e-4 vol^(2/d), vol^(2/d)]."""
    m = rule.manifold
    scale = m.volume ** (2.0 / m.dim)
    return 1e-4 * scale, scale


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QSPEC_THREADS", "1")))
    except ValueError:
        return 1


def bound_curve(rule: QuadratureRule, t_min: float | None = None, t_max: float | None = None,
                num: int = 64, cfg: KernelConfig | None = None) -> BoundCurve:
    """Evaluate :func:`rayleigh_bound` on a geometric grid of diffusion times.

    Samples run on up to ``QSPEC_THREADS`` worker threads; results do not
    depend on the thread count.
    """
    lo, hi = default_t_range(rule)
    t_min = lo if t_min is None else t_min
    t_max = hi if t_max is None else t_max
    if not (0 < t_min < t_max) or num < 2:
        raise InvalidInputError("need 0 < t_min < t_max and num >= 2")
    _require_normalized(rule)
    ts = np.geomspace(t_min, t_max, int(num))
    workers = min(_threads(), len(ts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bounds = list(pool.map(lambda t: rayleigh_bound(rule, float(t), cfg), ts))
    else:
        bounds = [rayleigh_bound(rule, float(t), cfg) for t in ts]
    samples = [(float(t), float(b)) for t, b in zip(ts, bounds)]
    finite = [(b, t) for t, b in samples if math.isfinite(b)]
    if finite:
        best_bound, best_t = min(finite)
    else:
        best_bound, best_t = math.inf, None
    return BoundCurve(samples, best_t, best_bound)


def c_d(d: int) -> float:
    """(d/2 + 1)^(d/2 + 1) / Gamma(d/2 + 1): eigenfunctions per node ceiling."""
    if int(d) != d or d <= 0:
        raise InvalidInputError(f"dimension must be a positive integer, got {d}")
    x = d / 2.0 + 1.0
    return x**x / half_integer_gamma(d + 2)


def lambda_ceiling_coefficient(d: int) -> float:
    """2^(1 - 2/d) (d + 2)^(2/d + 1) pi, the coefficient of n^(2/d)."""
    return 2.0 ** (1.0 - 2.0 / d) * (d + 2.0) ** (2.0 / d + 1.0) * math.pi


def theorem2_ceiling(d: int, n: int) -> tuple[float, float]:
    """Leading-order (lambda, k) ceilings for n nodes on a volume-1 manifold."""
    if d < 1 or n < 1:
        raise InvalidInputError("d and n must be >= 1")
    return lambda_ceiling_coefficient(d) * n ** (2.0 / d), c_d(d) * n


def weyl_count_of_ceiling(d: int, n: int) -> float:
    return weyl_count(d, theorem2_ceiling(d, n)[0], 1.0)
