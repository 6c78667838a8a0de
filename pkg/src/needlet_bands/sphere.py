"""Points, uniform sampling and evaluation grids on the circle and the 2-sphere.

Points are stored as unit vectors in R^{d+1}.  Bulk routines work on
``(n, d + 1)`` float arrays; :class:`SpherePoint` is the single-point wrapper.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from needlet_bands.errors import InvalidInputError

SUPPORTED_DIMS = (1, 2)
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def surface_area(d: int) -> float:
    """Lebesgue measure of S^d, ``2 pi^{(d+1)/2} / Gamma((d+1)/2)``."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def _check_dim(d: int) -> None:
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.shape[0] - 1


def make_point(coords) -> SpherePoint:
    c = np.asarray(coords, dtype=float)
    if c.ndim != 1 or c.shape[0] not in (2, 3):
        raise InvalidInputError("coords must be a vector of length 2 or 3")
    norm = np.linalg.norm(c)
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidInputError("cannot normalize a zero or non-finite vector")
    return SpherePoint(c / norm)


def as_array(x) -> np.ndarray:
    """Coordinates of a point, a list of points or an array, as a float array."""
    if isinstance(x, SpherePoint):
        return x.coords
    if isinstance(x, (list, tuple)) and x and isinstance(x[0], SpherePoint):
        return np.stack([p.coords for p in x])
    return np.asarray(x, dtype=float)


def geodesic_distance(x, y):
    """Great-circle distance in radians; broadcasts over leading axes."""
    a, b = as_array(x), as_array(y)
    if a.shape[-1] != b.shape[-1]:
        raise InvalidInputError("points live on spheres of different dimension")
    inner = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
    out = np.arccos(inner)
    return float(out) if out.ndim == 0 else out


def sample_uniform(seed: int, d: int, n: int) -> np.ndarray:
    """``n`` i.i.d. points from the normalized surface measure on S^d."""
    _check_dim(d)
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return uniform_points(rng, d, n)


def uniform_points(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    if d == 1:
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    z = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    r = np.sqrt(1.0 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def spherical_angles(points: np.ndarray):
    """(cos theta, sin theta, phi) for points on S^2, theta measured from +z."""
    t = np.clip(points[:, 2], -1.0, 1.0)
    s = np.hypot(points[:, 0], points[:, 1])
    phi = np.arctan2(points[:, 1], points[:, 0])
    return t, s, phi


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d + 1, d + 1)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@dataclass(frozen=True, eq=False)
class EvalGrid:
    """Finite point set on which sup-norms over the sphere are taken.

    ``kind`` is ``"circle"`` (equispaced angles), ``"rings"`` (iso-latitude
    rings with equispaced longitudes; enables FFT synthesis) or
    ``"fibonacci"``.  For rings, ``theta`` holds the ring colatitudes and the
    points are stored ring-major with ``n_phi`` longitudes per ring.
    """

    points: np.ndarray
    design_level: int
    mesh_norm: float
    d: int
    kind: str
    theta: np.ndarray | None = None
    n_phi: int | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    def mask(self, predicate) -> np.ndarray:
        """Boolean mask of grid points satisfying ``predicate(points)``."""
        m = np.asarray(predicate(self.points), dtype=bool)
        if m.shape != (len(self),):
            raise InvalidInputError("predicate must return one flag per grid point")
        return m


def mesh_target(design_level: int) -> float:
    return math.pi * 2.0 ** (-(design_level + 3))


def _circle_grid(level: int) -> EvalGrid:
    m = 2 ** (level + 4)
    ang = 2.0 * math.pi * np.arange(m) / m
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    return EvalGrid(pts, level, math.pi / m, 1, "circle")


def ring_grid(n_rings: int, n_phi: int, level: int = -1) -> EvalGrid:
    theta = (np.arange(n_rings) + 0.5) * math.pi / n_rings
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    st, ct = np.sin(theta), np.cos(theta)
    pts = np.empty((n_rings, n_phi, 3))
    pts[..., 0] = st[:, None] * np.cos(phi)[None, :]
    pts[..., 1] = st[:, None] * np.sin(phi)[None, :]
    pts[..., 2] = ct[:, None]
    # walk half a longitude step along the parallel, then half a ring step
    mesh = 0.5 * math.pi / n_rings + 0.5 * (2.0 * math.pi / n_phi)
    return EvalGrid(pts.reshape(-1, 3), level, mesh, 2, "rings", theta=theta, n_phi=n_phi)


def fibonacci_points(n: int) -> np.ndarray:
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(1.0 - z * z)
    phi = GOLDEN_ANGLE * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def measure_mesh_norm(points: np.ndarray, probe: np.ndarray) -> float:
    """Largest geodesic distance from a probe point to its nearest grid point."""
    chord, _ = cKDTree(points).query(probe)
    return float(2.0 * np.arcsin(np.minimum(np.max(chord) / 2.0, 1.0)))


def _fibonacci_grid(level: int) -> EvalGrid:
    target = mesh_target(level)
    n = int(math.ceil((2.2 / target) ** 2))
    while True:
        pts = fibonacci_points(n)
        mesh = measure_mesh_norm(pts, fibonacci_points(8 * n + 1))
        if mesh <= 0.9 * target:
            return EvalGrid(pts, level, mesh, 2, "fibonacci")
        n = int(n * 1.25) + 1


@functools.lru_cache(maxsize=16)
def build_eval_grid(d: int, design_level: int, kind: str | None = None) -> EvalGrid:
    """Grid whose mesh norm is at most ``pi * 2^-(design_level+3)``.

    d=1 uses ``2^(level+4)`` equispaced angles.  d=2 defaults to an
    iso-latitude ring grid (``2^(level+3)`` rings, twice as many longitudes);
    ``kind="fibonacci"`` gives a Fibonacci lattice whose mesh norm is measured
    against a denser probe lattice.
    """
    _check_dim(d)
    if design_level < 0:
        raise InvalidInputError("design_level must be nonnegative")
    if d == 1:
        return _circle_grid(design_level)
    kind = kind or "rings"
    if kind == "rings":
        r = 2 ** (design_level + 3)
        return ring_grid(r, 2 * r, design_level)
    if kind == "fibonacci":
        return _fibonacci_grid(design_level)
    raise InvalidInputError(f"unknown grid kind {kind!r}")
