"""Gaussian pair energies and gradient descent on point configurations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .manifold import TWO_PI, ManifoldSpec, pairwise_distances
from .quadrature_audit import QuadratureRule
from .rules import random_points


@dataclass(frozen=True)
class OptimizerConfig:
    t: float
    max_iters: int = 5000
    grad_tol: float = 1e-8
    step0: float | None = None  # defaults to t
    backtrack: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidInputError("t must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if not 0 < self.backtrack < 1:
            raise InvalidInputError("backtrack must lie in (0, 1)")

    @classmethod
    def default(cls, m: ManifoldSpec, n: int, **kw) -> OptimizerConfig:
        return cls(t=default_time(m, n), **kw)


def default_time(m: ManifoldSpec, n: int) -> float:
    """Minimizer in t of the diagonal ceiling (d/4t) S/(S - vol) with
    S = vol^2 / (n (8 pi t)^(d/2)); pi/(4n) on the 2-torus.

    Scales like vol^(2/d) n^(-2/d), but with a small enough constant that the
    Gaussian never sees the half-period kink of the wrapped distance.
    """
    d = m.dim
    return (2.0 * m.volume / ((d + 2.0) * n)) ** (2.0 / d) / (8.0 * math.pi)


def _pair_vectors(m: ManifoldSpec, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Squared distances and v[i, j] = d(x_i, x_j) * grad_{x_i} d(x_i, x_j).

    v is zero on the cut locus (antipodes, half-period ties).
    """
    if m.is_flat:
        n = X.shape[0]
        v = np.empty((n, n, m.dim))
        d2 = np.zeros((n, n))
        for c in range(m.dim):
            diff = X[:, c, None] - X[None, :, c]
            diff -= TWO_PI * np.round(diff * (1.0 / TWO_PI))
            v[:, :, c] = diff
            d2 += diff * diff
        if np.abs(v).max() >= math.pi - 1e-15:
            v[np.any(np.abs(v) >= math.pi - 1e-15, axis=-1)] = 0.0
        return d2, v
    dot = np.clip(X @ X.T, -1.0, 1.0)
    d = pairwise_distances(m, X)
    sin_d = np.sin(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(sin_d > 1e-12, d / sin_d, 0.0)
    factor[d < 1e-12] = 1.0
    # grad_x d(x, y) = -(y - (x.y) x) / sin d
    tang = X[None, :, :] - dot[:, :, None] * X[:, None, :]
    return d * d, -factor[:, :, None] * tang


class _PairState:
    """Energy of one configuration, keeping what the gradient needs."""

    def __init__(self, m: ManifoldSpec, X: np.ndarray, w: np.ndarray, t: float):
        self.m, self.X, self.t = m, X, t
        self.d2, self.v = _pair_vectors(m, X)
        self.A = np.outer(w, w) / (8.0 * math.pi * t) ** (m.dim / 2.0)
        self.g = np.exp(-self.d2 / (8.0 * t))
        self.energy = float(np.sum(self.A * self.g))

    def gradient(self) -> np.ndarray:
        # each unordered pair appears twice in the double sum
        coef = -self.A * self.g / (2.0 * self.t)
        np.fill_diagonal(coef, 0.0)
        grad = np.einsum("ij,ijk->ik", coef, self.v)
        if not self.m.is_flat:
            grad -= np.sum(grad * self.X, axis=1, keepdims=True) * self.X
        return grad


def simplified_energy(rule: QuadratureRule, t: float) -> float:
    """sum_ij a_i a_j (8 pi t)^(-d/2) exp(-d(x_i, x_j)^2 / 8t), diagonal included."""
    if not t > 0:
        raise InvalidInputError("t must be positive")
    return _PairState(rule.manifold, rule.points, rule.weights, t).energy


def approx_energy(rule: QuadratureRule, t: float) -> float:
    """Gaussian stand-in for the Rayleigh quotient; infinite when the
    denominator is not positive."""
    if not t > 0:
        raise InvalidInputError("t must be positive")
    st = _PairState(rule.manifold, rule.points, rule.weights, t)
    den = st.energy - rule.manifold.volume
    if den <= 0:
        return math.inf
    return float(np.sum(st.A * (1.0 / t + st.d2 / t**2) * st.g)) / den


def energy_gradient(rule: QuadratureRule, t: float) -> np.ndarray:
    """Gradient of :func:`simplified_energy` with respect to each point.

    Shape (n, coord_dim); on the sphere each row lies in the tangent plane.
    """
    if not t > 0:
        raise InvalidInputError("t must be positive")
    return _PairState(rule.manifold, rule.points, rule.weights, t).gradient()


def _retract(m: ManifoldSpec, X: np.ndarray, step: np.ndarray) -> np.ndarray:
    Y = X + step
    if m.is_flat:
        Y = np.mod(Y, 2.0 * math.pi)
    else:
        Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    return Y


def optimize_points(m: ManifoldSpec, n: int, cfg: OptimizerConfig,
                    weights=None, initial=None) -> tuple[QuadratureRule, list[float]]:
    """Gradient descent on the simplified energy from seeded random points.

    Weights are held fixed (vol/n each unless given). Each step starts from
    the last accepted step length times 1/backtrack and is shrunk by
    ``backtrack`` until the energy strictly decreases; when no decrease is
    found the iteration stops. Returns the final rule and the energy trace
    (initial energy first).
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if weights is None:
        weights = np.full(n, m.volume / n)
    if initial is None:
        initial = random_points(m, n, np.random.default_rng(cfg.seed))
    rule = QuadratureRule(m, initial, weights)
    w = rule.weights
    state = _PairState(m, rule.points, w, cfg.t)
    trace = [state.energy]
    if n == 1:
        return rule, trace
    step = cfg.t if cfg.step0 is None else cfg.step0
    for _ in range(cfg.max_iters):
        grad = state.gradient()
        if np.linalg.norm(grad) < cfg.grad_tol:
            break
        alpha = step / cfg.backtrack
        accepted = None
        while alpha > 1e-300:
            cand = _PairState(m, _retract(m, state.X, -alpha * grad), w, cfg.t)
            if cand.energy < state.energy:
                accepted = cand
                break
            alpha *= cfg.backtrack
        if accepted is None:
            break
        assert accepted.energy < state.energy
        state = accepted
        step = alpha
        trace.append(state.energy)
    return QuadratureRule(m, state.X, w), trace


def gradient_norm(rule: QuadratureRule, t: float) -> float:
    return float(np.linalg.norm(energy_gradient(rule, t)))
