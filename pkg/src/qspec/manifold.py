"""Model manifolds, geodesic distances and real Laplacian eigenbases.

Three manifolds are supported: the circle of length 2*pi, the flat torus
[0, 2*pi)^d and the unit sphere S^2. Points are stored as float arrays of
shape (n, coord_dim): angles for the circle/torus, unit 3-vectors on the
sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError

TWO_PI = 2.0 * math.pi

CIRCLE = "circle"
TORUS = "torus"
SPHERE2 = "sphere2"


def half_integer_gamma(two_x: int) -> float:
    """Gamma(two_x / 2) for a positive integer ``two_x``.

    Exact recurrence from Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
    """
    two_x = int(two_x)
    if two_x < 1:
        raise InvalidInputError(f"half_integer_gamma needs two_x >= 1, got {two_x}")
    if two_x % 2 == 0:
        x, g = 1.0, 1.0
    else:
        x, g = 0.5, math.sqrt(math.pi)
    while 2 * x < two_x:
        g *= x
        x += 1.0
    return g


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / half_integer_gamma(d + 2)


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind == CIRCLE and self.dim != 1:
            raise InvalidInputError("circle has dimension 1")
        if self.kind == SPHERE2 and self.dim != 2:
            raise InvalidInputError("sphere2 has dimension 2")
        if self.kind == TORUS and (not isinstance(self.dim, int) or self.dim < 1):
            raise InvalidInputError(f"torus dimension must be a positive integer, got {self.dim!r}")
        if self.kind not in (CIRCLE, TORUS, SPHERE2):
            raise InvalidInputError(f"unknown manifold kind {self.kind!r}")

    @classmethod
    def circle(cls) -> ManifoldSpec:
        return cls(CIRCLE, 1)

    @classmethod
    def torus(cls, d: int) -> ManifoldSpec:
        return cls(TORUS, int(d))

    @classmethod
    def sphere2(cls) -> ManifoldSpec:
        return cls(SPHERE2, 2)

    @classmethod
    def parse(cls, text: str) -> ManifoldSpec:
        """Parse ``"circle"``, ``"torus:d"`` or ``"sphere2"``."""
        s = text.strip().lower()
        if s == CIRCLE:
            return cls.circle()
        if s == SPHERE2:
            return cls.sphere2()
        if s.startswith(TORUS + ":"):
            try:
                d = int(s.split(":", 1)[1])
            except ValueError:
                raise InvalidInputError(f"bad torus dimension in {text!r}") from None
            if d < 1:
                raise InvalidInputError(f"bad torus dimension in {text!r}")
            return cls.torus(d)
        raise InvalidInputError(f"unknown manifold {text!r}; expected circle, torus:d or sphere2")

    def __str__(self) -> str:
        return f"torus:{self.dim}" if self.kind == TORUS else self.kind

    @property
    def is_flat(self) -> bool:
        return self.kind in (CIRCLE, TORUS)

    @property
    def coord_dim(self) -> int:
        return 3 if self.kind == SPHERE2 else self.dim

    @property
    def volume(self) -> float:
        if self.kind == SPHERE2:
            return 4.0 * math.pi
        return TWO_PI ** self.dim


def canonicalize(m: ManifoldSpec, coords) -> np.ndarray:
    """Return points as an (n, coord_dim) array in canonical form.

    Angles are reduced into [0, 2*pi); sphere points are renormalized.
    A 1-d array is read as a single point, except on the circle where it is
    read as a list of angles.
    """
    x = np.array(coords, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(-1, 1) if m.coord_dim == 1 else x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != m.coord_dim:
        raise InvalidInputError(
            f"points for {m} need {m.coord_dim} coordinates, got array of shape {np.shape(coords)}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("point coordinates must be finite")
    if m.is_flat:
        x = np.mod(x, TWO_PI)
        x[x >= TWO_PI] = 0.0
    else:
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0.0):
            raise InvalidInputError("sphere points must be nonzero vectors")
        # leave rows that are already unit to a few ulps untouched, so that
        # canonicalization is idempotent and files round-trip bit-exactly
        off = np.abs(norms - 1.0) > 4e-16
        x[off] = x[off] / norms[off, None]
    return x


def wrap(delta):
    """Reduce angle differences into [-pi, pi)."""
    return np.mod(np.asarray(delta, dtype=float) + math.pi, TWO_PI) - math.pi


def _check_coords(m: ManifoldSpec, *arrays):
    for a in arrays:
        if np.shape(a)[-1:] != (m.coord_dim,):
            raise InvalidInputError(f"point dimension mismatch for {m}: shape {np.shape(a)}")


def geodesic_distance(m: ManifoldSpec, x, y):
    """Geodesic distance, broadcasting over leading axes of ``x`` and ``y``.

    Flat manifolds use wrapped per-coordinate differences; the sphere uses the
    angle between unit vectors (atan2 form, accurate for nearby points).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if m.coord_dim == 1 and x.ndim == 0:
        x = x[None]
    if m.coord_dim == 1 and y.ndim == 0:
        y = y[None]
    _check_coords(m, x, y)
    if m.is_flat:
        a = np.mod(np.abs(x - y), TWO_PI)  # |x - y| keeps the result exactly symmetric
        out = np.linalg.norm(np.minimum(a, TWO_PI - a), axis=-1)
    else:
        x = x / np.linalg.norm(x, axis=-1, keepdims=True)
        y = y / np.linalg.norm(y, axis=-1, keepdims=True)
        cr = np.linalg.norm(np.cross(x, y), axis=-1)
        dot = np.sum(x * y, axis=-1)
        out = np.arctan2(cr, dot)
    return float(out) if np.ndim(out) == 0 else out


def pairwise_distances(m: ManifoldSpec, points: np.ndarray) -> np.ndarray:
    return geodesic_distance(m, points[:, None, :], points[None, :, :])


@dataclass(frozen=True, order=True)
class EigenDescriptor:
    """One real L2-normalized Laplacian eigenfunction.

    ``label`` is ``(k, part)`` on circle/torus with ``k`` a canonical lattice
    vector (first nonzero entry positive) and ``part`` one of
    ``"const"``, ``"cos"``, ``"sin"``; on the sphere it is ``(degree, order)``.
    """

    eigenvalue: float
    label: tuple
    ordinal: int = -1

    @property
    def is_constant(self) -> bool:
        return self.eigenvalue == 0.0


def _lattice_ball(d: int, bound: int):
    """All integer vectors of length d with squared norm <= bound."""
    if d == 0:
        yield ()
        return
    r = math.isqrt(bound)
    for k0 in range(-r, r + 1):
        for rest in _lattice_ball(d - 1, bound - k0 * k0):
            yield (k0,) + rest


def _is_canonical(k) -> bool:
    for c in k:
        if c != 0:
            return c > 0
    return False


@lru_cache(maxsize=64)
def _eigenbasis_cached(m: ManifoldSpec, lam_floor: int) -> tuple:
    items = []
    if m.kind == SPHERE2:
        ell = 0
        while ell * (ell + 1) <= lam_floor:
            items.extend((float(ell * (ell + 1)), (ell, order)) for order in range(-ell, ell + 1))
            ell += 1
    else:
        items.append((0.0, ((0,) * m.dim, "const")))
        for k in _lattice_ball(m.dim, lam_floor):
            if _is_canonical(k):
                lam = float(sum(c * c for c in k))
                items.append((lam, (k, "cos")))
                items.append((lam, (k, "sin")))
    items.sort()
    return tuple(EigenDescriptor(lam, label, i) for i, (lam, label) in enumerate(items))


def eigenbasis(m: ManifoldSpec, lambda_max: float) -> list[EigenDescriptor]:
    """All eigenfunctions with eigenvalue <= lambda_max, ordered by
    (eigenvalue, label). Ordinal 0 is the constant."""
    if lambda_max < 0:
        raise InvalidInputError("lambda_max must be >= 0")
    # all eigenvalues are integers on the model manifolds
    return list(_eigenbasis_cached(m, int(math.floor(lambda_max + 1e-9))))


def _flat_normalizers(m: ManifoldSpec):
    vol = m.volume
    return vol ** -0.5, (vol / 2.0) ** -0.5


def real_spherical_harmonics(lmax: int, points) -> np.ndarray:
    """Real orthonormal spherical harmonics Y_l^m at unit vectors.

    Returns shape (n, (lmax+1)**2); column l*l + l + m holds order m in [-l, l].
    m > 0 uses cos(m*phi), m < 0 uses sin(|m|*phi). Normalized associated
    Legendre functions are built by recurrence so nothing overflows.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    z = np.clip(pts[:, 2], -1.0, 1.0)
    s = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    n = pts.shape[0]
    out = np.empty((n, (lmax + 1) ** 2))

    pmm = np.full(n, 1.0 / math.sqrt(4.0 * math.pi))
    for order in range(lmax + 1):
        if order > 0:
            pmm = math.sqrt((2 * order + 1) / (2 * order)) * s * pmm
        if order == 0:
            cols = [(1.0, None)]
        else:
            cols = [(math.sqrt(2.0), np.cos(order * phi)), (math.sqrt(2.0), np.sin(order * phi))]
        p_prev2 = None
        p_prev = pmm
        for ell in range(order, lmax + 1):
            if ell == order:
                p = pmm
            elif ell == order + 1:
                p = math.sqrt(2 * order + 3) * z * pmm
            else:
                a = math.sqrt((4 * ell * ell - 1) / (ell * ell - order * order))
                b = math.sqrt(((ell - 1) ** 2 - order * order) / (4 * (ell - 1) ** 2 - 1))
                p = a * (z * p_prev - b * p_prev2)
            if ell > order:
                p_prev2, p_prev = p_prev, p
            base = ell * ell + ell
            if order == 0:
                out[:, base] = p
            else:
                out[:, base + order] = cols[0][0] * p * cols[0][1]
                out[:, base - order] = cols[1][0] * p * cols[1][1]
    return out


def eigen_matrix(m: ManifoldSpec, basis, points) -> np.ndarray:
    """Matrix of eigenfunction values, shape (n_points, len(basis))."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, m.coord_dim) if m.coord_dim == 1 else pts.reshape(1, -1)
    _check_coords(m, pts)
    basis = list(basis)
    if not basis:
        return np.empty((pts.shape[0], 0))
    if m.kind == SPHERE2:
        for e in basis:
            if not (isinstance(e.label[1], int) and abs(e.label[1]) <= e.label[0]):
                raise InvalidInputError(f"descriptor {e.label} does not belong to {m}")
        lmax = max(e.label[0] for e in basis)
        table = real_spherical_harmonics(lmax, pts)
        idx = [e.label[0] ** 2 + e.label[0] + e.label[1] for e in basis]
        return table[:, idx]

    for e in basis:
        k, part = e.label
        if len(k) != m.dim or part not in ("const", "cos", "sin"):
            raise InvalidInputError(f"descriptor {e.label} does not belong to {m}")
    c0, c1 = _flat_normalizers(m)
    ks = np.array([e.label[0] for e in basis], dtype=float).reshape(len(basis), m.dim)
    phase = pts @ ks.T
    out = np.where(
        np.array([e.label[1] == "sin" for e in basis]), c1 * np.sin(phase), c1 * np.cos(phase)
    )
    const = np.array([e.label[1] == "const" for e in basis])
    out[:, const] = c0
    return out


def eval_eigenfunction(m: ManifoldSpec, e: EigenDescriptor, x) -> float:
    x = np.asarray(x, dtype=float).reshape(1, m.coord_dim)
    return float(eigen_matrix(m, [e], x)[0, 0])


def weyl_lambda(d: int, k: float, volume: float) -> float:
    """Leading-order Weyl prediction for the k-th eigenvalue:
    lambda_k^(d/2) ~ (2 pi)^d k / (omega_d * volume)."""
    if k <= 0:
        return 0.0
    return ((TWO_PI ** d) * k / (unit_ball_volume(d) * volume)) ** (2.0 / d)


def weyl_count(d: int, lam: float, volume: float) -> float:
    """Inverse of :func:`weyl_lambda`: predicted number of eigenvalues <= lam."""
    if lam <= 0:
        return 0.0
    return unit_ball_volume(d) * volume * lam ** (d / 2.0) / TWO_PI ** d
