"""Explicit deviation bounds for the sup-norm fluctuation of the needlet estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from needlet_bands.cubature import compute_c0, measured_constants, needlet_cubature
from needlet_bands.errors import InvalidInputError
from needlet_bands.estimation import Sample, empirical_coeffs, field_from_coeffs
from needlet_bands.kernels import EIG, KernelSpec, sphere_constants
from needlet_bands.sphere import EvalGrid

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ConcentrationParams:
    """Inputs of the deviation bounds at one level ``l``.

    ``c0_l`` and ``Z_l`` are the level-l needlet constant and cubature
    size; ``C_M`` and ``k2`` are their level-uniform upper bounds.
    """

    n: int
    l: int
    x: float
    f_sup: float
    d: int
    c0_l: float
    Z_l: int
    D1: float
    D2: float
    k2: float
    C_M: float

    def __post_init__(self):
        for name in ("n", "x", "f_sup", "c0_l", "Z_l", "D1", "D2", "k2", "C_M"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.l < 0:
            raise InvalidInputError("level must be nonnegative")
        if self.c0_l > self.C_M * (1 + 1e-12):
            raise InvalidInputError("c0_l exceeds its uniform bound C_M")
        if self.Z_l > self.k2 * 2.0 ** (self.l * self.d) * (1 + 1e-12):
            raise InvalidInputError("|Z_l| exceeds k2 2^{ld}")

    @property
    def scale(self) -> float:
        return 2.0 ** (self.l * self.d)


def sigma_bar(p: ConcentrationParams) -> float:
    """Level-specific Bernstein bound with the actual c0(l) and |Z_l|."""
    log_term = math.log(2.0 * p.Z_l) + p.x
    a = p.c0_l * math.sqrt(2.0 * log_term * p.f_sup)
    a_prime = p.c0_l * (2.0 / 3.0) * p.D1 * log_term
    return a * math.sqrt(p.scale / p.n) + a_prime * p.scale / p.n


def alphas(p: ConcentrationParams) -> tuple[float, float]:
    log_term = math.log(2.0 * p.k2 * p.scale) + p.x
    return p.C_M * math.sqrt(2.0 * log_term * p.f_sup), p.C_M * (2.0 / 3.0) * p.D1 * log_term


def sigma_mono(p: ConcentrationParams) -> tuple[float, float]:
    """Return ``(sigma, A)`` with ``sigma = A sqrt(2^{ld}/n)``."""
    a, a_prime = alphas(p)
    root = math.sqrt(p.scale / p.n)
    big_a = a + a_prime * root
    return big_a * root, big_a


def sigma_R(p: ConcentrationParams, R_n: float) -> float:
    if R_n < 0:
        raise InvalidInputError("R_n must be nonnegative")
    s = p.scale * p.D2
    return 6.0 * R_n + 10.0 * math.sqrt(s * p.f_sup * (p.x + LOG2) / p.n) + 22.0 * s * (2.0 * p.x + 2.0 * LOG2) / p.n


def rademacher_sup(sample: Sample, signs, spec: KernelSpec, grid: EvalGrid, mask=None) -> float:
    """``sup_y |(1/n) sum_i eps_i A_j(X_i, y)|`` over the grid."""
    coeffs = empirical_coeffs(sample, spec.kmax, signs=signs)
    return field_from_coeffs(coeffs, spec, grid).sup(mask)


def rademacher_signs(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size=n)


@dataclass(frozen=True)
class SigmaModel:
    """Monotonized bound ``sigma(n, l, x)`` with constants measured up to ``max_level``."""

    d: int
    f_sup: float
    max_level: int
    mode: str = EIG
    C_M: float = 0.0
    k2: float = 0.0
    D1: float = 0.0
    D2: float = 0.0

    @classmethod
    def build(cls, d: int, f_sup: float, max_level: int, mode: str = EIG) -> "SigmaModel":
        consts = measured_constants(d, range(max_level + 1), mode)
        sc = sphere_constants(d)
        return cls(d, f_sup, max_level, mode, consts["C_M"], consts["k2_max"], sc.bound_D1, sc.bound_D2)

    def with_f_sup(self, f_sup: float) -> "SigmaModel":
        return replace(self, f_sup=f_sup)

    def params(self, n: int, l: int, x: float) -> ConcentrationParams:
        if l > self.max_level:
            raise InvalidInputError(f"level {l} beyond the measured range 0..{self.max_level}")
        cub = needlet_cubature(KernelSpec(self.d, l, self.mode))
        return ConcentrationParams(n, l, x, self.f_sup, self.d, compute_c0(self.d, l, self.mode),
                                   len(cub), self.D1, self.D2, self.k2, self.C_M)

    def sigma(self, n: int, l: int, x: float) -> float:
        return sigma_mono(self.params(n, l, x))[0]

    def A(self, n: int, l: int, x: float) -> float:
        return sigma_mono(self.params(n, l, x))[1]

    def alphas_real(self, n: int, level: float, x: float) -> tuple[float, float]:
        """alpha, alpha' at a real-valued level (used for the balance point)."""
        log_term = math.log(2.0 * self.k2 * 2.0 ** (level * self.d)) + x
        return self.C_M * math.sqrt(2.0 * log_term * self.f_sup), self.C_M * (2.0 / 3.0) * self.D1 * log_term


def params_for(n: int, l: int, x: float, f_sup: float, d: int, mode: str = EIG, max_level: int | None = None):
    """ConcentrationParams with constants measured over levels 0..max_level."""
    top = l if max_level is None else max(l, max_level)
    return SigmaModel.build(d, f_sup, top, mode).params(n, l, x)
