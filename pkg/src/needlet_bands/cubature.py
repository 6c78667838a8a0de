"""Positive-weight product cubature, needlet scaling/frame functions and c0."""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from needlet_bands.errors import InvalidInputError
from needlet_bands.harmonics import Coeffs, analyze, analyze_rings, synthesize
from needlet_bands.kernels import KernelSpec, kernel_Cj, kernel_psi, window_a, zonal_series
from needlet_bands.sphere import SUPPORTED_DIMS, build_eval_grid

REFERENCE_MARGIN = 32
REFERENCE_LAT_FACTOR = 4


@dataclass(frozen=True, eq=False)
class CubatureSet:
    """Nodes and positive weights exact on polynomials of degree <= ``degree``.

    On S^2 the nodes are iso-latitude rings (Gauss-Legendre in cos theta)
    stored ring-major, ``n_lon`` equispaced longitudes per ring.
    """

    d: int
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    ring_t: np.ndarray | None = None
    ring_weights: np.ndarray | None = None
    n_lon: int | None = None

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def analyze(self, values, kmax: int) -> Coeffs:
        """Harmonic coefficients of the weighted node function ``values``."""
        values = np.asarray(values, dtype=float)
        if self.d == 2 and self.n_lon > kmax:
            grid = values.reshape(len(self.ring_t), self.n_lon)
            s = np.sqrt(1.0 - self.ring_t ** 2)
            return analyze_rings(grid, self.ring_t, s, self.ring_weights, kmax)
        return analyze(self.nodes, kmax, weights=self.weights * values, d=self.d)

    def weight_constant(self, level: int) -> float:
        """Smallest k1 with k1^-1 2^-dj <= b <= k1 2^-dj for every weight."""
        scaled = self.weights * 2.0 ** (self.d * level)
        return float(max(scaled.max(), 1.0 / scaled.min()))

    def count_constant(self, level: int) -> float:
        ratio = len(self) / 2.0 ** (self.d * level)
        return float(max(ratio, 1.0 / ratio))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if self.d == 1:
                w.writerow(["theta", "weight"])
                theta = np.arctan2(self.nodes[:, 1], self.nodes[:, 0])
                for th, b in zip(theta, self.weights):
                    w.writerow([repr(float(th)), repr(float(b))])
            else:
                w.writerow(["x", "y", "z", "weight"])
                for p, b in zip(self.nodes, self.weights):
                    w.writerow([repr(float(v)) for v in p] + [repr(float(b))])


def ring_cubature(t, wt, n_lon: int, degree: int = -1) -> CubatureSet:
    """Latitude rule ``(t, wt)`` in cos theta times ``n_lon`` equispaced longitudes."""
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
    phi = 2.0 * math.pi * np.arange(n_lon) / n_lon
    nodes = np.empty((len(t), n_lon, 3))
    nodes[..., 0] = s[:, None] * np.cos(phi)
    nodes[..., 1] = s[:, None] * np.sin(phi)
    nodes[..., 2] = t[:, None]
    ring_w = np.asarray(wt, dtype=float) * (2.0 * math.pi / n_lon)
    weights = np.repeat(ring_w, n_lon)
    return CubatureSet(2, degree, nodes.reshape(-1, 3), weights, t, ring_w, n_lon)


def product_cubature(n_lat: int, n_lon: int, degree: int = -1) -> CubatureSet:
    """Gauss-Legendre in cos theta times ``n_lon`` equispaced longitudes."""
    t, wt = roots_legendre(n_lat)
    return ring_cubature(t, wt, n_lon, degree)


def graded_cubature(n_lon: int, panels: int = 40, order: int = 32, ratio: float = 0.5) -> CubatureSet:
    """Ring rule with colatitude panels refined geometrically towards the north pole.

    Panel edges are ``pi * ratio^i``; each panel carries ``order``
    Gauss-Legendre nodes in theta with weight ``sin theta``.  Integrands
    behaving like ``theta^alpha`` at the pole converge geometrically.
    """
    edges = np.concatenate([[0.0], math.pi * ratio ** np.arange(panels, -1, -1.0)])
    x, w = roots_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    theta = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    wth = (0.5 * (hi - lo) * w).ravel() * np.sin(theta)
    return ring_cubature(np.cos(theta), wth, n_lon)


def circle_cubature(n_nodes: int, degree: int = -1) -> CubatureSet:
    ang = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    nodes = np.column_stack([np.cos(ang), np.sin(ang)])
    return CubatureSet(1, degree, nodes, np.full(n_nodes, 2.0 * math.pi / n_nodes))


@functools.lru_cache(maxsize=64)
def build_cubature(d: int, degree: int) -> CubatureSet:
    """Exact cubature for spherical polynomials of degree <= ``degree``.

    d=1: ``2N+2`` equispaced angles (exact through degree 2N+1).
    d=2: ``ceil((N+1)/2)+1`` Gauss-Legendre latitudes times ``N+1`` longitudes.
    """
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")
    if degree < 0:
        raise InvalidInputError("degree must be nonnegative")
    if d == 1:
        return circle_cubature(2 * degree + 2, degree)
    return product_cubature(math.ceil((degree + 1) / 2) + 1, degree + 1, degree)


@functools.lru_cache(maxsize=32)
def reference_cubature(d: int, kmax: int, margin: int = REFERENCE_MARGIN, lat_factor: int = REFERENCE_LAT_FACTOR) -> CubatureSet:
    """Cubature for analysing non-polynomial integrands up to degree ``kmax``.

    Exact through degree ``kmax + margin``; on S^2 it carries ``lat_factor``
    times the minimal number of latitudes, because densities with a
    Hoelder point converge slowly in the latitude direction.
    """
    if d == 1:
        return build_cubature(1, kmax + margin)
    deg = kmax + margin
    return product_cubature(lat_factor * (math.ceil((deg + 1) / 2) + 1), deg + 1, deg)


def _interp_table(spec: KernelSpec, weights, n_table: int):
    theta = np.linspace(0.0, math.pi, n_table)
    return theta, zonal_series(spec.d, weights, np.cos(theta))


def _abs_sum(points, nodes, coef, theta, table, chunk=1 << 22):
    """``sum_eta coef_eta |K(<x, eta>)|`` for each x, K tabulated on a uniform angle grid."""
    out = np.zeros(points.shape[0])
    inv_h = (len(theta) - 1) / theta[-1]
    slope = np.diff(table)
    last = len(table) - 2
    step = max(1, chunk // max(1, points.shape[0]))
    for lo in range(0, nodes.shape[0], step):
        u = np.arccos(np.clip(points @ nodes[lo: lo + step].T, -1.0, 1.0))
        u *= inv_h
        idx = np.minimum(u.astype(np.intp), last)
        u -= idx
        u *= slope[idx]
        u += table[idx]
        out += np.abs(u) @ coef[lo: lo + step]
    return out


def _c0_probe_points(d: int, j: int, sys_n_lon: int):
    """Grid points of the level-(j+1) EvalGrid in one symmetry cell of the node set."""
    grid = build_eval_grid(d, j + 1)
    if d == 1:
        # node set invariant under rotation by 2 pi / |Z| and reflection
        m = len(grid)
        keep = m // (2 * sys_n_lon) + 1
        return grid.points[:keep]
    n_phi = grid.n_phi
    half = len(grid.theta) // 2
    keep = n_phi // (2 * sys_n_lon) + 1
    pts = grid.points.reshape(len(grid.theta), n_phi, 3)
    return pts[:half, :keep].reshape(-1, 3)


def _c0_for(spec: KernelSpec, cub: CubatureSet) -> float:
    sym = cub.n_lon if spec.d == 2 else len(cub)
    pts = _c0_probe_points(spec.d, spec.j, sym)
    theta, table = _interp_table(spec, spec.c_weights(), 2 ** (spec.j + 12) + 1)
    total = _abs_sum(pts, cub.nodes, np.sqrt(cub.weights), theta, table)
    return float(total.max() * 2.0 ** (-spec.j * spec.d / 2.0))


@functools.lru_cache(maxsize=64)
def compute_c0(d: int, j: int, mode: str = "eig") -> float:
    """``2^{-jd/2} max_x sum_eta |phi_{j eta}(x)|`` over the level-(j+1) grid."""
    spec = KernelSpec(d, j, mode)
    return _c0_for(spec, needlet_cubature(spec))


def needlet_cubature(spec: KernelSpec) -> CubatureSet:
    """Cubature exact for products of two degree-k(j) polynomials."""
    return build_cubature(spec.d, 2 * spec.kmax + 1)


@dataclass(frozen=True, eq=False)
class NeedletSystem:
    spec: KernelSpec
    cubature: CubatureSet
    c0: float

    @property
    def size(self) -> int:
        return len(self.cubature)

    def _check_index(self, eta_index: int) -> None:
        if not 0 <= eta_index < self.size:
            raise InvalidInputError(f"eta index {eta_index} outside [0, {self.size})")

    def phi(self, eta_index: int, x):
        """``sqrt(b_eta) C_j(<x, eta>)``."""
        self._check_index(eta_index)
        eta = self.cubature.nodes[eta_index]
        ip = np.asarray(x, dtype=float) @ eta
        return math.sqrt(self.cubature.weights[eta_index]) * kernel_Cj(self.spec, ip)

    def phi_matrix(self, points) -> np.ndarray:
        """Rows are needlets, columns are evaluation points."""
        ip = self.cubature.nodes @ np.asarray(points, dtype=float).T
        return np.sqrt(self.cubature.weights)[:, None] * kernel_Cj(self.spec, ip)

    def phi_sup(self) -> np.ndarray:
        """Exact sup norms; each needlet peaks at its own node."""
        return np.sqrt(self.cubature.weights) * kernel_Cj(self.spec, 1.0)

    def phi_l2(self) -> np.ndarray:
        """L2 norms: ``b_eta * sum_k a_k L_k(1)`` by orthogonality."""
        return np.sqrt(self.cubature.weights * zonal_series(self.spec.d, self.spec.a_weights(), 1.0))

    def project_coeffs(self, f, reference: CubatureSet | None = None) -> np.ndarray:
        return needlet_projection_coeffs(self, f, reference)

    def reconstruct(self, coeffs, points) -> np.ndarray:
        return np.asarray(coeffs) @ self.phi_matrix(points)


@functools.lru_cache(maxsize=64)
def _system(d: int, j: int, mode: str) -> NeedletSystem:
    spec = KernelSpec(d, j, mode)
    return NeedletSystem(spec, needlet_cubature(spec), compute_c0(d, j, mode))


def build_needlet_system(spec: KernelSpec) -> NeedletSystem:
    if spec.window is window_a:
        return _system(spec.d, spec.j, spec.mode)
    cub = needlet_cubature(spec)
    return NeedletSystem(spec, cub, _c0_for(spec, cub))


def needlet_phi(sys: NeedletSystem, eta_index: int, x):
    return sys.phi(eta_index, x)


def function_coeffs(f, d: int, kmax: int, reference: CubatureSet | None = None) -> Coeffs:
    """Harmonic coefficients of ``f`` from a cubature of degree kmax + margin."""
    cub = reference if reference is not None else reference_cubature(d, kmax)
    return cub.analyze(np.asarray(f(cub.nodes), dtype=float), kmax)


def needlet_projection_coeffs(sys: NeedletSystem, f, reference: CubatureSet | None = None) -> np.ndarray:
    """``<phi_{j eta}, f>`` for every node eta."""
    spec = sys.spec
    fc = function_coeffs(f, spec.d, spec.kmax, reference)
    vals = synthesize(fc, spec.c_weights(), sys.cubature.nodes)
    return np.sqrt(sys.cubature.weights) * vals


def psi_cubature(spec: KernelSpec) -> CubatureSet:
    """Nodes for the level-l frame functions, whose degree is that of level l+1."""
    return needlet_cubature(spec.at_level(spec.j + 1))


def needlet_psi(spec: KernelSpec, eta_index: int, x):
    cub = psi_cubature(spec)
    if not 0 <= eta_index < len(cub):
        raise InvalidInputError(f"eta index {eta_index} outside [0, {len(cub)})")
    ip = np.asarray(x, dtype=float) @ cub.nodes[eta_index]
    return math.sqrt(cub.weights[eta_index]) * kernel_psi(spec, ip)


def psi_coeffs(spec: KernelSpec, f, reference: CubatureSet | None = None) -> np.ndarray:
    """``<f, psi_{l eta}>`` for every frame node at level ``spec.j``."""
    cub = psi_cubature(spec)
    w = spec.psi_weights()
    fc = function_coeffs(f, spec.d, len(w) - 1, reference)
    return np.sqrt(cub.weights) * synthesize(fc, w, cub.nodes)


def measured_constants(d: int, levels, mode: str = "eig") -> dict:
    """k1, k2 and c0 over ``levels``; ``C_M`` is the largest c0 seen."""
    k1, k2, c0 = {}, {}, {}
    for j in levels:
        cub = needlet_cubature(KernelSpec(d, j, mode))
        k1[j] = cub.weight_constant(j)
        k2[j] = cub.count_constant(j)
        c0[j] = compute_c0(d, j, mode)
    return {"k1": k1, "k2": k2, "c0": c0, "k1_max": max(k1.values()),
            "k2_max": max(k2.values()), "C_M": max(c0.values())}
