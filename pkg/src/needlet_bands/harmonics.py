"""Real orthonormal harmonic bases and fast analysis/synthesis.

On S^2 the basis is ``Pbar_k0``, ``sqrt(2) Pbar_km cos(m phi)`` and
``sqrt(2) Pbar_km sin(m phi)``, orthonormal for surface measure, so that
``sum_m Y_km(x) Y_km(y) = L_k(<x, y>)``.  On S^1 it is ``1/sqrt(2 pi)``,
``cos(k theta)/sqrt(pi)`` and ``sin(k theta)/sqrt(pi)``.

Every zonal-kernel field ``y -> sum_i w_i sum_k g_k L_k(<x_i, y>)`` is then
``sum_k g_k sum_m c_km Y_km(y)`` with ``c_km = sum_i w_i Y_km(x_i)``; the
estimator, its Rademacher twin and the population projection are all
computed this way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from needlet_bands.errors import InvalidInputError
from needlet_bands.sphere import SUPPORTED_DIMS, EvalGrid, spherical_angles


@dataclass(frozen=True, eq=False)
class Coeffs:
    """Harmonic coefficients up to degree ``kmax``.

    For d=2, ``cos_part[k, m]`` and ``sin_part[k, m]`` are (kmax+1, kmax+1)
    arrays that vanish above the diagonal; for d=1 they are vectors.
    """

    d: int
    kmax: int
    cos_part: np.ndarray
    sin_part: np.ndarray

    def truncate(self, kmax: int) -> "Coeffs":
        if kmax > self.kmax:
            raise InvalidInputError("cannot truncate to a larger degree")
        if self.d == 1:
            return Coeffs(1, kmax, self.cos_part[: kmax + 1], self.sin_part[: kmax + 1])
        s = slice(0, kmax + 1)
        return Coeffs(2, kmax, self.cos_part[s, s], self.sin_part[s, s])

    def __sub__(self, other: "Coeffs") -> "Coeffs":
        k = min(self.kmax, other.kmax)
        a, b = self.truncate(k), other.truncate(k)
        return Coeffs(self.d, k, a.cos_part - b.cos_part, a.sin_part - b.sin_part)

    def energy_by_degree(self) -> np.ndarray:
        sq = self.cos_part ** 2 + self.sin_part ** 2
        return sq if self.d == 1 else sq.sum(axis=1)


def legendre_blocks(kmax: int, t, s):
    """Yield ``(m, block)`` with ``block[k - m] = Pbar_km(t)`` for k = m..kmax.

    ``t = cos(theta)`` and ``s = sin(theta)`` are 1-D arrays.  The
    normalization satisfies ``Pbar_00 = 1/sqrt(4 pi)`` and
    ``2 pi * int Pbar_km^2 dt = 1``.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    pmm = np.full_like(t, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(kmax + 1):
        if m > 0:
            pmm = math.sqrt((2 * m + 1) / (2 * m)) * s * pmm
        block = np.empty((kmax - m + 1, t.shape[0]))
        block[0] = pmm
        if m < kmax:
            block[1] = math.sqrt(2 * m + 3) * t * pmm
        for k in range(m + 2, kmax + 1):
            a = math.sqrt((4 * k * k - 1) / (k * k - m * m))
            b = math.sqrt(((k - 1) ** 2 - m * m) / (4 * (k - 1) ** 2 - 1))
            block[k - m] = a * (t * block[k - m - 1] - b * block[k - m - 2])
        yield m, block


def _check_points(points, d):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != d + 1:
        raise InvalidInputError(f"expected an (n, {d + 1}) array of points")
    return pts


def analyze(points, kmax: int, weights=None, d: int | None = None) -> Coeffs:
    """``c_km = sum_i w_i Y_km(x_i)``; the default weights are ``1/n``."""
    d = d if d is not None else np.asarray(points).shape[1] - 1
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")
    pts = _check_points(points, d)
    n = pts.shape[0]
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InvalidInputError("one weight per point is required")
    if d == 1:
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        k = np.arange(kmax + 1)
        ang = np.outer(k, theta)
        cos_part = (np.cos(ang) @ w) / math.sqrt(math.pi)
        sin_part = (np.sin(ang) @ w) / math.sqrt(math.pi)
        cos_part[0] /= math.sqrt(2.0)
        sin_part[0] = 0.0
        return Coeffs(1, kmax, cos_part, sin_part)
    t, s, phi = spherical_angles(pts)
    cos_part = np.zeros((kmax + 1, kmax + 1))
    sin_part = np.zeros((kmax + 1, kmax + 1))
    for m, block in legendre_blocks(kmax, t, s):
        if m == 0:
            cos_part[:, 0] = block @ w
            continue
        root2 = math.sqrt(2.0)
        cos_part[m:, m] = block @ (w * root2 * np.cos(m * phi))
        sin_part[m:, m] = block @ (w * root2 * np.sin(m * phi))
    return Coeffs(2, kmax, cos_part, sin_part)


def analyze_rings(values, t, s, ring_weights, kmax: int) -> Coeffs:
    """Coefficients of ``sum_{r,p} ring_weights[r] * values[r, p] * Y_km(node)``.

    ``values`` has one row per iso-latitude ring with equispaced longitudes
    ``2 pi p / L``; the longitude sums become one FFT per ring.
    """
    values = np.asarray(values, dtype=float)
    n_lon = values.shape[1]
    if n_lon <= kmax:
        raise InvalidInputError("need more longitudes than the maximal order")
    spec = np.fft.fft(values, axis=1)
    wr = np.asarray(ring_weights, dtype=float)
    cos_part = np.zeros((kmax + 1, kmax + 1))
    sin_part = np.zeros((kmax + 1, kmax + 1))
    for m, block in legendre_blocks(kmax, t, s):
        # sum_p v cos(m phi_p) = Re X_m, sum_p v sin(m phi_p) = -Im X_m
        if m == 0:
            cos_part[:, 0] = block @ (wr * spec[:, 0].real)
            continue
        root2 = math.sqrt(2.0)
        cos_part[m:, m] = block @ (wr * root2 * spec[:, m].real)
        sin_part[m:, m] = block @ (wr * root2 * -spec[:, m].imag)
    return Coeffs(2, kmax, cos_part, sin_part)


def _degree_weights(coeffs: Coeffs, kweights):
    g = np.zeros(coeffs.kmax + 1)
    kw = np.asarray(kweights, dtype=float)
    if len(kw) > coeffs.kmax + 1 and np.any(kw[coeffs.kmax + 1:] != 0.0):
        raise InvalidInputError("kernel weights extend beyond the available coefficients")
    g[: min(len(kw), len(g))] = kw[: len(g)]
    return g


def synthesize(coeffs: Coeffs, kweights, target) -> np.ndarray:
    """Evaluate ``sum_k g_k sum_m c_km Y_km`` on an EvalGrid or an array of points."""
    g = _degree_weights(coeffs, kweights)
    if isinstance(target, EvalGrid) and target.kind == "rings" and target.n_phi > 2 * coeffs.kmax:
        return _synth_rings(coeffs, g, target)
    pts = target.points if isinstance(target, EvalGrid) else _check_points(target, coeffs.d)
    if coeffs.d == 1:
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        k = np.arange(coeffs.kmax + 1)
        ang = np.outer(theta, k)
        ca = g * coeffs.cos_part / math.sqrt(math.pi)
        cb = g * coeffs.sin_part / math.sqrt(math.pi)
        ca[0] = g[0] * coeffs.cos_part[0] / math.sqrt(2.0 * math.pi)
        return np.cos(ang) @ ca + np.sin(ang) @ cb
    t, s, phi = spherical_angles(pts)
    out = np.zeros(pts.shape[0])
    root2 = math.sqrt(2.0)
    for m, block in legendre_blocks(coeffs.kmax, t, s):
        gk = g[m:]
        if m == 0:
            out += (gk * coeffs.cos_part[:, 0]) @ block
            continue
        a = (gk * coeffs.cos_part[m:, m]) @ block
        b = (gk * coeffs.sin_part[m:, m]) @ block
        out += root2 * (a * np.cos(m * phi) + b * np.sin(m * phi))
    return out


def _synth_rings(coeffs: Coeffs, g, grid: EvalGrid) -> np.ndarray:
    theta = grid.theta
    n_phi = grid.n_phi
    spec = np.zeros((theta.shape[0], n_phi // 2 + 1), dtype=complex)
    for m, block in legendre_blocks(coeffs.kmax, np.cos(theta), np.sin(theta)):
        gk = g[m:]
        if m == 0:
            spec[:, 0] = n_phi * ((gk * coeffs.cos_part[:, 0]) @ block)
            continue
        a = (gk * coeffs.cos_part[m:, m]) @ block
        b = (gk * coeffs.sin_part[m:, m]) @ block
        spec[:, m] = (n_phi / math.sqrt(2.0)) * (a - 1j * b)
    return np.fft.irfft(spec, n=n_phi, axis=1).reshape(-1)
