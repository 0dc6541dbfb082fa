from __future__ import annotations

import math

import numpy as np
import pytest

from qspec.errors import InvalidInputError, ResourceError
from qspec.heat_kernel import (
    KernelConfig,
    grad_kernel_inner,
    heat_kernel,
    kernel_inner,
    sphere_cutoff,
)
from qspec.rules import random_points

from conftest import MANIFOLDS, flat_grid, sphere_grid

C, T2, T3, S2 = MANIFOLDS


def _grid(m, t):
    if m.is_flat:
        return flat_grid(m, 96 if m.dim == 1 else (64 if m.dim == 2 else 24))
    return sphere_grid(80, 160)


@pytest.mark.parametrize("m", [C, T2, S2], ids=str)
@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_mass_preservation(m, t, rng):
    pts, w = _grid(m, t)
    x = random_points(m, 1, rng)[0]
    assert abs(np.dot(w, heat_kernel(m, t, x, pts)) - 1.0) < 1e-8


@pytest.mark.parametrize("m", [C, T2, S2], ids=str)
@pytest.mark.parametrize("t", [0.02, 0.3])
def test_semigroup(m, t, rng):
    pts, w = _grid(m, t)
    x, y = random_points(m, 2, rng)
    lhs = np.dot(w, heat_kernel(m, t, x, pts) * heat_kernel(m, t, pts, y))
    assert abs(lhs - heat_kernel(m, 2 * t, x, y)) < 1e-8


@pytest.mark.parametrize("m", [C, T2, T3], ids=str)
def test_representations_agree(m, rng):
    x, y = random_points(m, 50, rng), random_points(m, 50, rng)
    for t in np.geomspace(0.05, 1.0, 9):
        a = heat_kernel(m, t, x, y, method="image")
        b = heat_kernel(m, t, x, y, method="fourier")
        assert np.max(np.abs(a - b)) < 1e-12
        ga = grad_kernel_inner(m, t, x, y, method="image")
        gb = grad_kernel_inner(m, t, x, y, method="fourier")
        assert np.max(np.abs(ga - gb)) < 1e-11


def test_torus_diagonal_example():
    x = np.array([0.3, 1.1])
    a = heat_kernel(T2, 0.05, x, x, method="image")
    b = heat_kernel(T2, 0.05, x, x, method="fourier")
    assert abs(a - b) < 1e-12


def _lattice_sum_2d(t, x, y, R=6):
    """Direct lattice sums for K_2t and -1/2 d/dt K_2t on [0, 2pi)^2."""
    k = 2 * np.pi * np.arange(-R, R + 1)
    K1, K2 = np.meshgrid(k, k)
    r2 = (x[0] - y[0] + K1) ** 2 + (x[1] - y[1] + K2) ** 2
    g = np.exp(-r2 / (8 * t))
    kern = g.sum() / (8 * np.pi * t)
    grad = g.sum() / (16 * np.pi * t**2) - (r2 * g).sum() / (128 * np.pi * t**3)
    return kern, grad


def test_torus_lattice_oracle(rng):
    for t in (0.005, 0.02, 0.08, 0.3):
        for _ in range(5):
            x, y = random_points(T2, 2, rng)
            kern, grad = _lattice_sum_2d(t, x, y)
            assert kernel_inner(T2, t, x, y) == pytest.approx(kern, rel=1e-12, abs=1e-14)
            assert grad_kernel_inner(T2, t, x, y) == pytest.approx(grad, rel=1e-10, abs=1e-12)


def _legendre_sum(t, cos_theta, weight):
    total, p_prev, p = 0.0, 1.0, cos_theta
    total += weight(0) / (4 * np.pi)
    for l in range(1, 400):
        total += weight(l) * (2 * l + 1) / (4 * np.pi) * p
        p_prev, p = p, ((2 * l + 1) * cos_theta * p - l * p_prev) / (l + 1)
    return total


def test_sphere_direct_spectral_sum(rng):
    t = 0.1
    for _ in range(5):
        x, y = random_points(S2, 2, rng)
        c = float(np.dot(x, y))
        k = _legendre_sum(t, c, lambda l: math.exp(-2 * l * (l + 1) * t))
        g = _legendre_sum(t, c, lambda l: l * (l + 1) * math.exp(-2 * l * (l + 1) * t))
        assert kernel_inner(S2, t, x, y) == pytest.approx(k, rel=1e-12, abs=1e-14)
        assert grad_kernel_inner(S2, t, x, y) == pytest.approx(g, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("m", MANIFOLDS, ids=str)
def test_grad_matches_time_difference(m, rng):
    for t in (0.003, 0.03, 0.2, 1.0):
        x, y = random_points(m, 4, rng), random_points(m, 4, rng)
        x = np.vstack([x, y[:1]])
        y = np.vstack([y, y[:1]])
        h = 1e-5 * t
        fd = -0.5 * (heat_kernel(m, 2 * (t + h), x, y) - heat_kernel(m, 2 * (t - h), x, y)) / (2 * h)
        an = grad_kernel_inner(m, t, x, y)
        # relative to the size of the time derivative's pieces, since values can cross zero
        # floor of 1 absorbs the absolute (~1e-16) kernel rounding amplified by 1/h
        assert np.all(np.abs(an - fd) <= 1e-6 * np.maximum(np.abs(an), 1.0))


@pytest.mark.parametrize("m", [C, T2, T3], ids=str)
def test_diagonal_bounds(m, rng):
    d = m.dim
    for t in np.geomspace(1e-4, 0.1, 12):
        x = random_points(m, 1, rng)[0]
        k = kernel_inner(m, t, x, x)
        # a few ulps of slack: at tiny t the bound holds with equality in floating point
        assert k >= 1.0 / (8 * np.pi * t) ** (d / 2) * (1 - 1e-15)
        assert grad_kernel_inner(m, t, x, x) <= d / (4 * t) * k * (1 + 1e-14)


@pytest.mark.parametrize("m", MANIFOLDS, ids=str)
def test_symmetry_positivity_equilibrium(m, rng):
    x, y = random_points(m, 40, rng), random_points(m, 40, rng)
    for t in (0.02, 0.05, 0.5, 3.0):
        a, b = heat_kernel(m, t, x, y), heat_kernel(m, t, y, x)
        assert np.max(np.abs(a - b)) <= 1e-15 * np.max(a)
        if m.is_flat or t >= 0.05:
            assert np.all(a > 0)
        else:  # spectral sum: rounding of order 1e-16 near the far side
            assert np.all(a > -1e-14)
        ga, gb = grad_kernel_inner(m, t, x, y), grad_kernel_inner(m, t, y, x)
        assert np.max(np.abs(ga - gb)) <= 1e-14 * np.max(np.abs(ga))
    big = heat_kernel(m, 1e3, x, y)
    assert np.max(np.abs(big - 1 / m.volume)) < 1e-12
    assert np.max(np.abs(kernel_inner(m, 1e3, x, y) - 1 / m.volume)) < 1e-12


def test_well_separated_gradient_negative():
    x, y = np.array([0.0, 0.0]), np.array([np.pi / 2, 0.0])
    assert grad_kernel_inner(T2, 0.01, x, y) < 0


def test_errors():
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(InvalidInputError):
            heat_kernel(T2, bad, [0, 0], [0, 0])
    with pytest.raises(InvalidInputError):
        heat_kernel(T2, 0.1, [0, 0], [0, 0, 0])
    with pytest.raises(InvalidInputError):
        KernelConfig(tail_tol=0)
    with pytest.raises(InvalidInputError):
        KernelConfig(switch_time=-1)
    with pytest.raises(ResourceError):
        sphere_cutoff(1e-12, 1e-14)
    with pytest.raises(ResourceError):
        heat_kernel(S2, 1e-12, [0, 0, 1], [0, 0, 1])
    with pytest.raises(ResourceError):
        heat_kernel(C, 1e-18, [0.0], [0.0], method="fourier")
