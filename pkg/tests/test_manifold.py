from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from qspec.errors import InvalidInputError
from qspec.manifold import (
    EigenDescriptor,
    ManifoldSpec,
    canonicalize,
    eigen_matrix,
    eigenbasis,
    eval_eigenfunction,
    geodesic_distance,
    half_integer_gamma,
    unit_ball_volume,
    weyl_count,
    weyl_lambda,
)

from conftest import MANIFOLDS, flat_grid, sphere_grid

C, T2, T3, S2 = MANIFOLDS


def test_volumes_and_parse():
    assert C.volume == pytest.approx(2 * math.pi)
    assert T2.volume == pytest.approx(4 * math.pi**2)
    assert T3.volume == pytest.approx(8 * math.pi**3)
    assert S2.volume == pytest.approx(4 * math.pi)
    assert S2.dim == 2 and S2.coord_dim == 3
    for m in MANIFOLDS:
        assert ManifoldSpec.parse(str(m)) == m
    assert ManifoldSpec.parse(" Torus:4 ") == ManifoldSpec.torus(4)
    for bad in ["torus", "torus:0", "torus:x", "sphere3", ""]:
        with pytest.raises(InvalidInputError):
            ManifoldSpec.parse(bad)


def test_canonicalize():
    x = canonicalize(T2, [[-0.5, 7.0]])
    assert np.allclose(x, [[2 * math.pi - 0.5, 7.0 - 2 * math.pi]])
    assert np.all((x >= 0) & (x < 2 * math.pi))
    s = canonicalize(S2, [[0, 0, 5.0]])
    assert abs(np.linalg.norm(s) - 1) < 1e-12
    assert canonicalize(C, [0.0, 1.0, 2.0]).shape == (3, 1)
    with pytest.raises(InvalidInputError):
        canonicalize(S2, [[1.0, 0.0]])
    with pytest.raises(InvalidInputError):
        canonicalize(S2, [[0.0, 0.0, 0.0]])
    with pytest.raises(InvalidInputError):
        canonicalize(T2, [[np.nan, 0.0]])


def test_distance_examples():
    assert geodesic_distance(C, [0.0], [1.5 * math.pi]) == pytest.approx(math.pi / 2)
    assert geodesic_distance(T2, [0, 0], [math.pi, math.pi]) == pytest.approx(math.sqrt(2) * math.pi)
    assert geodesic_distance(S2, [0, 0, 1], [0, 0, -1]) == pytest.approx(math.pi)
    assert geodesic_distance(S2, [1, 0, 0], [0, 1, 0]) == pytest.approx(math.pi / 2)
    with pytest.raises(InvalidInputError):
        geodesic_distance(T2, [0, 0], [0, 0, 1])


@pytest.mark.parametrize("m", MANIFOLDS, ids=str)
def test_distance_axioms(m, rng):
    from qspec.rules import random_points

    x, y, z = (random_points(m, 1000, rng) for _ in range(3))
    dxy, dyx = geodesic_distance(m, x, y), geodesic_distance(m, y, x)
    assert np.array_equal(dxy, dyx)
    assert np.all(dxy >= 0)
    assert np.all(geodesic_distance(m, x, x) < 1e-12)
    assert np.all(dxy <= geodesic_distance(m, x, z) + geodesic_distance(m, z, y) + 1e-12)


def test_eigenbasis_examples():
    assert [e.eigenvalue for e in eigenbasis(C, 4)] == [0, 1, 1, 4, 4]
    assert [e.label for e in eigenbasis(C, 4)] == [
        ((0,), "const"), ((1,), "cos"), ((1,), "sin"), ((2,), "cos"), ((2,), "sin")]
    sph = eigenbasis(S2, 6)
    assert len(sph) == 9 and sorted({e.eigenvalue for e in sph}) == [0, 2, 6]
    tb = eigenbasis(T2, 1)
    assert len(tb) == 5
    assert {e.label[0] for e in tb[1:]} == {(0, 1), (1, 0)}
    for m in MANIFOLDS:
        basis = eigenbasis(m, 30)
        assert basis[0].is_constant and basis[0].ordinal == 0
        assert [e.ordinal for e in basis] == list(range(len(basis)))
        assert [(e.eigenvalue, e.label) for e in basis] == sorted((e.eigenvalue, e.label) for e in basis)
    assert len(eigenbasis(T2, 0)) == 1
    with pytest.raises(InvalidInputError):
        eigenbasis(C, -1)


@pytest.mark.parametrize("lam", [0, 1, 2, 5, 10, 25, 50, 99, 100, 200])
def test_torus_count_matches_lattice(lam):
    brute = sum(1 for a in range(-20, 21) for b in range(-20, 21) if a * a + b * b <= lam)
    assert len(eigenbasis(T2, lam)) == brute
    brute3 = sum(1 for k in itertools.product(range(-8, 9), repeat=3) if sum(c * c for c in k) <= min(lam, 60))
    assert len(eigenbasis(T3, min(lam, 60))) == brute3


def test_eigenvalue_relations():
    for e in eigenbasis(T2, 40):
        assert e.eigenvalue == sum(c * c for c in e.label[0])
    for e in eigenbasis(S2, 42):
        l, mm = e.label
        assert e.eigenvalue == l * (l + 1) and -l <= mm <= l


def test_eval_examples():
    for m in MANIFOLDS:
        e0 = eigenbasis(m, 0)[0]
        x = canonicalize(m, np.ones(m.coord_dim))[0]
        assert eval_eigenfunction(m, e0, x) == pytest.approx(m.volume ** -0.5)
    cos1 = eigenbasis(C, 1)[1]
    assert eval_eigenfunction(C, cos1, [0.0]) == pytest.approx(1 / math.sqrt(math.pi))
    y10 = next(e for e in eigenbasis(S2, 2) if e.label == (1, 0))
    assert eval_eigenfunction(S2, y10, [0, 0, 1]) == pytest.approx(math.sqrt(3 / (4 * math.pi)))
    with pytest.raises(InvalidInputError):
        eval_eigenfunction(S2, cos1, [0, 0, 1])
    with pytest.raises(InvalidInputError):
        eval_eigenfunction(T2, EigenDescriptor(1.0, ((1, 0, 0), "cos")), [0, 0])


@pytest.mark.parametrize("m", MANIFOLDS, ids=str)
def test_orthonormality(m):
    basis = eigenbasis(m, 20)
    if m.is_flat:
        pts, w = flat_grid(m, 24 if m.dim < 3 else 12)
    else:
        pts, w = sphere_grid(30, 60)
    Phi = eigen_matrix(m, basis, pts)
    G = Phi.T @ (w[:, None] * Phi)
    assert np.max(np.abs(G - np.eye(len(basis)))) < 1e-8


def _laplacian_fd(m, e, x, h):
    """Central-difference Laplacian; on the sphere via the 0-homogeneous extension
    f(y) = phi(y/|y|), whose Euclidean Laplacian at |y| = 1 is the Laplace-Beltrami one."""
    def f(y):
        return eval_eigenfunction(m, e, y / np.linalg.norm(y) if not m.is_flat else y)
    total = 0.0
    for c in range(m.coord_dim):
        dx = np.zeros(m.coord_dim)
        dx[c] = h
        total += f(x + dx) - 2 * f(x) + f(x - dx)
    return total / h**2


@pytest.mark.parametrize("m", MANIFOLDS, ids=str)
def test_eigen_equation(m, rng):
    from qspec.rules import random_points

    for e in eigenbasis(m, 20)[1:]:
        x = random_points(m, 1, rng)[0]
        val = eval_eigenfunction(m, e, x)
        lap = _laplacian_fd(m, e, x, 1e-3)
        scale = e.eigenvalue * max(abs(val), 0.1 * m.volume ** -0.5)
        assert abs(lap + e.eigenvalue * val) <= 1e-4 * scale


def test_sphere_high_degree_finite():
    from qspec.manifold import real_spherical_harmonics

    pts = np.array([[0, 0, 1.0], [1, 0, 0], [0.6, 0.0, 0.8]])
    Y = real_spherical_harmonics(200, pts)
    assert np.all(np.isfinite(Y))
    # addition theorem: sum_m Y_lm(x)^2 = (2l+1)/(4 pi)
    for l in (50, 200):
        cols = slice(l * l, (l + 1) ** 2)
        assert np.allclose((Y[:, cols] ** 2).sum(axis=1), (2 * l + 1) / (4 * math.pi), rtol=1e-10)


def test_half_integer_gamma_and_ball():
    for two_x in range(1, 30):
        assert half_integer_gamma(two_x) == pytest.approx(math.gamma(two_x / 2), rel=1e-13)
    assert unit_ball_volume(1) == pytest.approx(2)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    with pytest.raises(InvalidInputError):
        half_integer_gamma(0)


def test_weyl():
    assert weyl_lambda(2, 0, 1.0) == 0
    for k in (1, 10, 1000):
        assert weyl_lambda(2, k, 4 * math.pi**2) == pytest.approx(k / math.pi)
        assert weyl_lambda(1, k, 2 * math.pi) == pytest.approx(k * k / 4)
    spectrum = sorted(m * m for m in range(-5001, 5002))
    for k in (100, 1000, 10000):
        assert spectrum[k] / weyl_lambda(1, k, 2 * math.pi) == pytest.approx(1.0, abs=2.5 / math.sqrt(k) + 4.0 / k)
    assert weyl_count(3, weyl_lambda(3, 77, 5.0), 5.0) == pytest.approx(77)
