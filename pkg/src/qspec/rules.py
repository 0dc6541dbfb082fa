"""Standard point sets used by tests, the CLI and demos."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .manifold import TWO_PI, ManifoldSpec
from .quadrature_audit import QuadratureRule


def equispaced_circle(n: int) -> QuadratureRule:
    x = TWO_PI * np.arange(n) / n
    return QuadratureRule.equal_weights(ManifoldSpec.circle(), x[:, None])


def torus_grid(m: int, d: int = 2) -> QuadratureRule:
    """m^d grid on the flat torus with equal weights."""
    axis = TWO_PI * np.arange(m) / m
    pts = np.array(list(itertools.product(axis, repeat=d)))
    return QuadratureRule.equal_weights(ManifoldSpec.torus(d), pts)


def octahedron() -> QuadratureRule:
    pts = np.vstack([np.eye(3), -np.eye(3)])
    return QuadratureRule.equal_weights(ManifoldSpec.sphere2(), pts)


def icosahedron() -> QuadratureRule:
    g = (1.0 + math.sqrt(5.0)) / 2.0
    pts = []
    for a, b in itertools.product((-1.0, 1.0), repeat=2):
        pts += [(0.0, a, b * g), (a, b * g, 0.0), (b * g, 0.0, a)]
    return QuadratureRule.equal_weights(ManifoldSpec.sphere2(), np.array(pts))


def random_points(m: ManifoldSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random points (normalized Gaussians on the sphere)."""
    if m.is_flat:
        return rng.uniform(0.0, TWO_PI, size=(n, m.dim))
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rule(m: ManifoldSpec, n: int, rng: np.random.Generator,
                equal: bool = False) -> QuadratureRule:
    """Random points with random (or equal) nonnegative weights summing to vol(M)."""
    pts = random_points(m, n, rng)
    if equal:
        return QuadratureRule.equal_weights(m, pts)
    w = rng.exponential(size=n)
    return QuadratureRule(m, pts, w * (m.volume / w.sum()))
