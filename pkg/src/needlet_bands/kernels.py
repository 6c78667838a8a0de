"""Window functions, Gegenbauer/Chebyshev kernels and the smoothed projectors A_j, C_j."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from needlet_bands.errors import InvalidInputError
from needlet_bands.sphere import SUPPORTED_DIMS, surface_area

EIG = "eig"
DEG = "deg"
MODES = (EIG, DEG)


def _g(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def window_a(t):
    """Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), strictly decreasing between."""
    t = np.asarray(t, dtype=float)
    out = np.where(t <= 0.5, 1.0, 0.0)
    mid = (t > 0.5) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        up = _g(2.0 * (1.0 - tm))
        out[mid] = up / (up + _g(2.0 * tm - 1.0))
    return out if out.ndim else float(out)


def window_c(t):
    """``sqrt(a(t/2) - a(t))``; supported on (1/2, 2)."""
    t = np.asarray(t, dtype=float)
    out = np.sqrt(np.maximum(window_a(t / 2.0) - window_a(t), 0.0))
    return out if out.ndim else float(out)


def window_c_eig(t):
    """``sqrt(a(t/4) - a(t))``, the band-pass matching eigenvalue scaling."""
    t = np.asarray(t, dtype=float)
    out = np.sqrt(np.maximum(window_a(t / 4.0) - window_a(t), 0.0))
    return out if out.ndim else float(out)


def gegenbauer(k: int, nu: float, t):
    """C_k^nu(t) by the three-term recurrence."""
    if k < 0:
        raise InvalidInputError("degree must be nonnegative")
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = 2.0 * nu * t
    for m in range(2, k + 1):
        prev, cur = cur, (2.0 * (m + nu - 1.0) * t * cur - (m + 2.0 * nu - 2.0) * prev) / m
    return cur if cur.ndim else float(cur)


def dim_Hk(d: int, k: int) -> int:
    """Dimension of the degree-k spherical harmonics on S^d."""
    if d not in SUPPORTED_DIMS or k < 0:
        raise InvalidInputError("need d in {1, 2} and k >= 0")
    if d == 1:
        return 1 if k == 0 else 2
    return math.factorial(d + k - 2) * (d + 2 * k - 1) // (math.factorial(k) * math.factorial(d - 1))


def kernel_Lk(d: int, k: int, t, use_nu: bool = False):
    """Reproducing kernel of H_k as a function of the inner product ``t``.

    d=1 uses the Fourier form; asking for the Gegenbauer form there
    (``use_nu=True``) is an error because nu = 0.
    """
    if d not in SUPPORTED_DIMS or k < 0:
        raise InvalidInputError("need d in {1, 2} and k >= 0")
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    if d == 1:
        if use_nu:
            raise InvalidInputError("the Gegenbauer normalization is singular for d=1")
        out = np.full_like(t, 1.0 / (2.0 * math.pi)) if k == 0 else np.cos(k * np.arccos(t)) / math.pi
    else:
        nu = (d - 1) / 2.0
        out = (1.0 + k / nu) * np.asarray(gegenbauer(k, nu, t)) / surface_area(d)
    return out if out.ndim else float(out)


def zonal_series(d: int, weights, t):
    """``sum_k weights[k] L_k(t)`` evaluated by a single recurrence sweep."""
    w = np.asarray(weights, dtype=float)
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    area = surface_area(d)
    total = np.full_like(t, w[0] / area if d == 2 else w[0] / (2.0 * math.pi))
    if len(w) > 1:
        # Legendre P_k for d=2, Chebyshev T_k for d=1
        prev, cur = np.ones_like(t), t.copy()
        for k in range(1, len(w)):
            if w[k] != 0.0:
                scale = (2 * k + 1) / area if d == 2 else 1.0 / math.pi
                total += w[k] * scale * cur
            if k + 1 < len(w):
                if d == 2:
                    prev, cur = cur, ((2 * k + 1) * t * cur - k * prev) / (k + 1)
                else:
                    prev, cur = cur, 2.0 * t * cur - prev
    return float(total[0]) if scalar else total


@dataclass(frozen=True)
class SphereConstants:
    d: int
    surface_measure: float
    D1: float
    D2: float
    nu: float

    @property
    def bound_D1(self) -> float:
        """D1 valid for the bounds actually used (see ``bound_D2``)."""
        return math.sqrt(self.bound_D2)

    @property
    def bound_D2(self) -> float:
        """On the circle P_{n-1} has dimension 2n-1, so the sphere value doubles."""
        return self.D2 if self.d >= 2 else 2.0 * self.D2


def sphere_constants(d: int) -> SphereConstants:
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")
    area = surface_area(d)
    return SphereConstants(d, area, math.sqrt(1.0 / area), 1.0 / area, (d - 1) / 2.0)


@dataclass(frozen=True)
class KernelSpec:
    """Resolution-level description of A_j and C_j.

    ``mode="eig"`` weights degree k by ``a(k(k+d-1) / 4^j)``;
    ``mode="deg"`` weights it by ``a(k / 2^j)``.
    """

    d: int
    j: int
    mode: str = EIG
    window: Callable = field(default=window_a, repr=False)

    def __post_init__(self):
        if self.d not in SUPPORTED_DIMS:
            raise InvalidInputError(f"dimension must be 1 or 2, got {self.d}")
        if self.j < 0:
            raise InvalidInputError("resolution level must be nonnegative")
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}")

    def at_level(self, j: int) -> "KernelSpec":
        return KernelSpec(self.d, j, self.mode, self.window)

    @property
    def kmax(self) -> int:
        """Largest degree entering the kernel sums (2^j - 1 in both modes)."""
        if self.mode == DEG:
            return 2 ** self.j - 1
        k = 0
        while (k + 1) * (k + self.d) < 4 ** self.j:
            k += 1
        return k

    def scaled(self, k):
        k = np.asarray(k, dtype=float)
        if self.mode == DEG:
            return k / 2.0 ** self.j
        return k * (k + self.d - 1) / 4.0 ** self.j

    def a_weights(self) -> np.ndarray:
        return np.atleast_1d(self.window(self.scaled(np.arange(self.kmax + 1))))

    def c_weights(self) -> np.ndarray:
        return np.sqrt(self.a_weights())

    def psi_weights(self) -> np.ndarray:
        """Band-pass weights squaring to the level increment A_{j+1} - A_j."""
        nxt = self.at_level(self.j + 1)
        k = np.arange(nxt.kmax + 1)
        lo = np.zeros(len(k))
        lo[: self.kmax + 1] = self.a_weights()
        return np.sqrt(np.maximum(nxt.a_weights() - lo, 0.0))


def kernel_Aj(spec: KernelSpec, t):
    return zonal_series(spec.d, spec.a_weights(), t)


def kernel_Cj(spec: KernelSpec, t):
    return zonal_series(spec.d, spec.c_weights(), t)


def kernel_psi(spec: KernelSpec, t):
    return zonal_series(spec.d, spec.psi_weights(), t)
