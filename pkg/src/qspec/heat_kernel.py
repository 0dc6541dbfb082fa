"""Exact heat kernels on the model manifolds.

Flat kernels are products of the 1-d periodic kernel, evaluated either as an
image sum (small times) or as a Fourier series (large times). The sphere
kernel is the Legendre series. Every truncation is chosen from a geometric
majorant of the neglected tail, so ``KernelConfig.tail_tol`` is an absolute
guarantee on the truncation error of both the kernel and its time derivative.

Conventions: ``heat_kernel(t)`` is [e^{t Delta} delta_x](y); the semigroup
inner product <e^{tD} d_x, e^{tD} d_y> is the kernel at time 2t, and the
gradient inner product <grad e^{tD} d_x, grad e^{tD} d_y> equals
-(d/ds) K_s(x, y) at s = 2t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, ResourceError
from .manifold import SPHERE2, TWO_PI, ManifoldSpec

MAX_TERMS = 10**6
MAX_SPHERE_DEGREE = 10**4


@dataclass(frozen=True)
class KernelConfig:
    tail_tol: float = 1e-14
    switch_time: float = 1.0 / (2.0 * math.pi)

    def __post_init__(self):
        if not (self.tail_tol > 0 and self.switch_time > 0):
            raise InvalidInputError("tail_tol and switch_time must be positive")


DEFAULT_CONFIG = KernelConfig()


class KernelTerms(NamedTuple):
    """Kernel K_s and derived quantities at one diffusion time s.

    ``abs_centered`` and ``abs_rate`` bound the sum of absolute values of the
    series terms; callers use them to bound floating-point rounding.
    """

    full: np.ndarray
    centered: np.ndarray  # K_s - 1/vol
    rate: np.ndarray  # -dK_s/ds
    abs_centered: np.ndarray
    abs_rate: np.ndarray
    nterms: int


# --- truncation radii -------------------------------------------------------

@lru_cache(maxsize=512)
def image_cutoff(s: float, tol: float) -> int:
    """Smallest J such that images |j| > J contribute < tol to 2*pi*k and to
    2*pi*dk/ds (1-d periodic kernel, displacement in [-pi, pi))."""
    norm = 1.0 / math.sqrt(4.0 * math.pi * s)
    for J in range(MAX_TERMS):
        R = math.pi * (2 * J + 1)
        q = ((R + TWO_PI) / R) ** 2 * math.exp(-math.pi * (R + math.pi) / s)
        if q < 1.0:
            g = norm * (1.0 + 0.5 / s + R * R / (4.0 * s * s)) * math.exp(-R * R / (4.0 * s))
            if 2.0 * TWO_PI * g / (1.0 - q) < tol:
                return J
    raise ResourceError(f"image sum at s={s} needs more than {MAX_TERMS} terms")


@lru_cache(maxsize=512)
def fourier_cutoff(s: float, tol: float) -> int:
    """Smallest M such that frequencies m > M contribute < tol to
    h = 2 sum e^{-m^2 s} cos(m x) and to its s-derivative."""
    for M in range(MAX_TERMS):
        m = M + 1
        q = ((m + 1) / m) ** 2 * math.exp(-(2 * m + 1) * s)
        if q < 1.0:
            g = 2.0 * (1.0 + m * m) * math.exp(-m * m * s)
            if g / (1.0 - q) < tol:
                return M
    raise ResourceError(f"Fourier sum at s={s} needs more than {MAX_TERMS} terms")


@lru_cache(maxsize=512)
def sphere_cutoff(s: float, tol: float) -> int:
    """Smallest degree L such that the Legendre tail beyond L is < tol for
    both the kernel and its s-derivative."""
    for L in range(1, MAX_SPHERE_DEGREE + 1):
        ell = L + 1
        lam = ell * (ell + 1)
        q = ((ell + 2) / ell) * ((2 * ell + 3) / (2 * ell + 1)) * math.exp(-2.0 * (ell + 1) * s)
        if q < 1.0:
            g = (1.0 + lam) * (2 * ell + 1) / (4.0 * math.pi) * math.exp(-lam * s)
            if g / (1.0 - q) < tol:
                return L
    raise ResourceError(f"sphere kernel at s={s} needs degree above {MAX_SPHERE_DEGREE}")


def _coordinate_tol(d: int, s: float, tail_tol: float) -> float:
    # error budget per 1-d factor so the product kernel error stays below tail_tol
    if d == 1:
        return tail_tol * TWO_PI
    B = 1.0 + math.sqrt(math.pi / s)
    Bp = math.sqrt(math.pi) / (2.0 * s**1.5) + 2.0 / (math.e * s)
    return tail_tol * TWO_PI**d / (d * (B ** (d - 1) + (d - 1) * Bp * B ** (d - 2)))


# --- 1-d periodic factors, in units h = 2*pi*k - 1 ----------------------------

def _image_factor(delta, s, J):
    j = np.arange(-J, J + 1, dtype=float)
    r = delta[..., None] + TWO_PI * j
    g = np.exp(-r * r / (4.0 * s)) * (TWO_PI / math.sqrt(4.0 * math.pi * s))
    poly = r * r / (4.0 * s * s) - 0.5 / s
    k = g.sum(axis=-1)
    dk = (poly * g).sum(axis=-1)
    return k - 1.0, dk, k + 1.0, (np.abs(poly) * g).sum(axis=-1), k


def _fourier_factor(delta, s, M):
    m = np.arange(1, M + 1, dtype=float)
    e = 2.0 * np.exp(-m * m * s)
    c = np.cos(delta[..., None] * m)
    h = (e * c).sum(axis=-1)
    dh = -(m * m * e * c).sum(axis=-1)
    abs_h = np.full(np.shape(delta), e.sum())
    abs_dh = np.full(np.shape(delta), (m * m * e).sum())
    return h, dh, abs_h, abs_dh, 1.0 + h


def _flat_terms(m: ManifoldSpec, s, x, y, cfg, method):
    # the 1-d kernels are even, so fold to |x - y| in [0, pi]: exactly symmetric
    a = np.mod(np.abs(x - y), TWO_PI)
    delta = np.minimum(a, TWO_PI - a)
    d = m.dim
    tol_c = _coordinate_tol(d, s, cfg.tail_tol)
    if method is None:
        method = "image" if s <= cfg.switch_time else "fourier"
    if method == "image":
        J = image_cutoff(s, tol_c)
        parts = [_image_factor(delta[..., c], s, J) for c in range(d)]
        nterms = 2 * J + 1
    elif method == "fourier":
        M = fourier_cutoff(s, tol_c)
        parts = [_fourier_factor(delta[..., c], s, M) for c in range(d)]
        nterms = M + 1
    else:
        raise InvalidInputError(f"unknown method {method!r}")

    # prod(1 + h_c) - 1 accumulated without cancelling against the constant
    P = np.zeros(delta.shape[:-1])
    Pabs = np.zeros(delta.shape[:-1])
    full = np.ones(delta.shape[:-1])
    for h, _, ah, _, k in parts:
        P = P + h + P * h
        Pabs = Pabs + ah + Pabs * ah
        full = full * k  # direct product: stays positive where P + 1 would cancel
    rate = np.zeros(delta.shape[:-1])
    abs_rate = np.zeros(delta.shape[:-1])
    for c, (_, dh, _, adh, _) in enumerate(parts):
        prod = dh
        aprod = adh
        for c2, (_, _, ah2, _, k2) in enumerate(parts):
            if c2 != c:
                prod = prod * k2
                aprod = aprod * (1.0 + ah2)
        rate = rate - prod
        abs_rate = abs_rate + aprod
    scale = 1.0 / m.volume
    centered = P * scale
    return KernelTerms(
        full=full * scale,
        centered=centered,
        rate=rate * scale,
        abs_centered=Pabs * scale,
        abs_rate=abs_rate * scale,
        nterms=nterms,
    )


def _sphere_terms(s, x, y, cfg):
    z = np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)
    L = sphere_cutoff(s, cfg.tail_tol)
    centered = np.zeros(z.shape)
    rate = np.zeros(z.shape)
    abs_c = 0.0
    abs_r = 0.0
    p_prev, p = np.ones(z.shape), z
    for ell in range(1, L + 1):
        lam = ell * (ell + 1)
        coef = (2 * ell + 1) / (4.0 * math.pi) * math.exp(-lam * s)
        centered += coef * p
        rate += (lam * coef) * p
        abs_c += coef
        abs_r += lam * coef
        p_prev, p = p, ((2 * ell + 1) * z * p - ell * p_prev) / (ell + 1)
    return KernelTerms(
        full=centered + 1.0 / (4.0 * math.pi),
        centered=centered,
        rate=rate,
        abs_centered=np.full(z.shape, abs_c),
        abs_rate=np.full(z.shape, abs_r),
        nterms=L + 1,
    )


def _prepare(m: ManifoldSpec, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if m.coord_dim == 1:
        if x.ndim == 0 or x.shape[-1:] != (1,):
            x = x[..., None]
        if y.ndim == 0 or y.shape[-1:] != (1,):
            y = y[..., None]
    if x.shape[-1:] != (m.coord_dim,) or y.shape[-1:] != (m.coord_dim,):
        raise InvalidInputError(f"point dimension mismatch for {m}")
    if m.kind == SPHERE2:
        x = x / np.linalg.norm(x, axis=-1, keepdims=True)
        y = y / np.linalg.norm(y, axis=-1, keepdims=True)
    return x, y


def kernel_terms(m: ManifoldSpec, s: float, x, y, cfg: KernelConfig | None = None,
                 method: str | None = None) -> KernelTerms:
    """Evaluate K_s and -dK_s/ds for all broadcast pairs (x, y).

    ``method`` forces ``"image"`` or ``"fourier"`` on flat manifolds; by
    default the representation switches at ``cfg.switch_time``.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not (np.isfinite(s) and s > 0):
        raise InvalidInputError(f"diffusion time must be positive, got {s}")
    x, y = _prepare(m, x, y)
    if m.kind == SPHERE2:
        return _sphere_terms(float(s), x, y, cfg)
    return _flat_terms(m, float(s), x, y, cfg, method)


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def heat_kernel(m: ManifoldSpec, t: float, x, y, cfg: KernelConfig | None = None,
                method: str | None = None):
    """[e^{t Delta} delta_x](y)."""
    return _out(kernel_terms(m, t, x, y, cfg, method).full)


def kernel_inner(m: ManifoldSpec, t: float, x, y, cfg: KernelConfig | None = None,
                 method: str | None = None):
    """<e^{t Delta} delta_x, e^{t Delta} delta_y> = K_{2t}(x, y)."""
    return heat_kernel(m, 2.0 * t, x, y, cfg, method)


def grad_kernel_inner(m: ManifoldSpec, t: float, x, y, cfg: KernelConfig | None = None,
                      method: str | None = None):
    """<grad e^{t Delta} delta_x, grad e^{t Delta} delta_y> = -1/2 d/dt K_{2t}(x, y).

    Negative for well-separated points at small t.
    """
    if not (np.isfinite(t) and t > 0):
        raise InvalidInputError(f"diffusion time must be positive, got {t}")
    return _out(kernel_terms(m, 2.0 * t, x, y, cfg, method).rate)
