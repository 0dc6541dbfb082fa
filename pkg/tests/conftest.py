from __future__ import annotations

import numpy as np
import pytest

from qspec.manifold import ManifoldSpec

MANIFOLDS = [ManifoldSpec.circle(), ManifoldSpec.torus(2), ManifoldSpec.torus(3), ManifoldSpec.sphere2()]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def flat_grid(m: ManifoldSpec, per_axis: int):
    """Equispaced product grid (exact for trig polynomials of degree < per_axis)."""
    axis = 2 * np.pi * np.arange(per_axis) / per_axis
    mesh = np.meshgrid(*([axis] * m.dim), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    return pts, np.full(len(pts), m.volume / len(pts))


def sphere_grid(nlat: int, nlon: int):
    """Gauss-Legendre in cos(theta) times equispaced longitude."""
    z, wz = np.polynomial.legendre.leggauss(nlat)
    phi = 2 * np.pi * np.arange(nlon) / nlon
    Z, P = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1 - Z**2)
    pts = np.stack([(s * np.cos(P)).ravel(), (s * np.sin(P)).ravel(), Z.ravel()], axis=1)
    w = np.repeat(wz, nlon) * (2 * np.pi / nlon)
    return pts, w
