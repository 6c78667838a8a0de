"""Sample splitting, Lepski resolution selection and adaptive confidence bands."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from needlet_bands.concentration import SigmaModel, rademacher_signs, rademacher_sup, sigma_R
from needlet_bands.errors import InvalidInputError
from needlet_bands.estimation import FieldOnGrid, Sample, empirical_coeffs, field_from_coeffs
from needlet_bands.kernels import EIG, KernelSpec
from needlet_bands.sphere import EvalGrid, build_eval_grid


def default_u_n(n: int) -> int:
    return max(0, math.ceil(math.log2(math.log2(n))))


def default_split(n: int) -> tuple[int, int]:
    return (n + 1) // 2, n // 2


@dataclass(frozen=True)
class BandConfig:
    """Tuning of the selection and band steps.

    ``f_sup=None`` means the plug-in bound from the selection subsample.
    ``width`` picks the monotone bound ``"sigma"`` or the Rademacher
    bound ``"rademacher"`` (averaged over ``rademacher_draws`` sign draws).
    """

    kappa: float = 1.0
    u_n: int | None = None
    x: float = 2.0
    split: tuple[int, int] | None = None
    omega: object = field(default=None, repr=False)
    mode: str = EIG
    jmax_rule: str = "default"
    f_sup: float | None = None
    width: str = "sigma"
    rademacher_draws: int = 1

    def resolve(self, n: int) -> "BandConfig":
        n1, n2 = self.split if self.split is not None else default_split(n)
        if n1 < 1 or n2 < 1 or n1 + n2 != n:
            raise InvalidInputError("split sizes must be positive and add up to n")
        if not 0.25 <= n1 / n2 <= 4.0:
            raise InvalidInputError("split ratio n1/n2 must lie in [1/4, 4]")
        if self.kappa <= 0 or self.x <= 0:
            raise InvalidInputError("kappa and x must be positive")
        u = default_u_n(n) if self.u_n is None else self.u_n
        if u < 0:
            raise InvalidInputError("u_n must be nonnegative")
        return BandConfig(self.kappa, u, self.x, (n1, n2), self.omega, self.mode,
                          self.jmax_rule, self.f_sup, self.width, self.rademacher_draws)

    def mask(self, grid: EvalGrid):
        return None if self.omega is None else grid.mask(self.omega)


def jmax_default(n2: int, d: int) -> int:
    """Largest j with ``2^{jd} <= n2 / (log n2)^2``."""
    if n2 < 8:
        return 0
    bound = n2 / math.log(n2) ** 2
    j = 0
    while 2.0 ** ((j + 1) * d) <= bound:
        j += 1
    return j


def balance_level(model: SigmaModel, n2: int, x: float) -> float:
    """Real level l* where alpha sqrt(2^{ld}/n2) equals alpha' 2^{ld}/n2."""
    level = math.log2(n2) / model.d
    for _ in range(200):
        a, a_prime = model.alphas_real(n2, level, x)
        new = math.log2(n2 * (a / a_prime) ** 2) / model.d
        if abs(new - level) < 1e-12:
            break
        level = new
    return level


def jmax_practical(n2: int, d: int, model: SigmaModel, kappa: float = 1.0) -> int:
    """``2^{jmax} = 2^{l*} / (log n2)^{1/d}``, rounded down."""
    if n2 < 8:
        return 0
    l_star = balance_level(model, n2, kappa * math.log(n2))
    return max(0, math.floor(l_star - math.log2(math.log(n2)) / d))


def compute_jmax(n2: int, d: int, rule: str = "default", model: SigmaModel | None = None, kappa: float = 1.0) -> int:
    if rule == "default":
        return jmax_default(n2, d)
    if rule == "practical":
        if model is None:
            raise InvalidInputError("the practical rule needs a sigma model")
        return jmax_practical(n2, d, model, kappa)
    raise InvalidInputError(f"unknown j_max rule {rule!r}")


@dataclass(frozen=True, eq=False)
class Selection:
    j_hat: int
    j_max: int
    thresholds: dict
    differences: dict
    passed: dict


def lepski_select(sample2: Sample, cfg: BandConfig, model: SigmaModel, j_max: int, grid: EvalGrid | None = None) -> Selection:
    """Smallest j whose estimate is within 4 sigma(n2, l) of every finer one.

    ``model`` carries the sup bound and the measured constants; the
    threshold uses ``x = kappa log n2``.  Differences are taken on the
    grid of the largest candidate level.
    """
    n2 = len(sample2)
    d = sample2.d
    grid = grid if grid is not None else build_eval_grid(d, j_max)
    mask = cfg.mask(grid)
    xk = cfg.kappa * math.log(n2)
    coeffs = empirical_coeffs(sample2, KernelSpec(d, j_max, cfg.mode).kmax)
    fields = {}
    for j in range(j_max + 1):
        spec = KernelSpec(d, j, cfg.mode)
        fields[j] = field_from_coeffs(coeffs.truncate(spec.kmax), spec, grid).values
    thresholds = {l: 4.0 * model.sigma(n2, l, xk) for l in range(j_max + 1)}
    differences = {}
    for j in range(j_max + 1):
        for l in range(j + 1, j_max + 1):
            diff = np.abs(fields[j] - fields[l])
            differences[(j, l)] = float(diff.max() if mask is None else diff[mask].max())
    passed = {j: all(differences[(j, l)] <= thresholds[l] for l in range(j + 1, j_max + 1))
              for j in range(j_max + 1)}
    j_hat = next((j for j in range(j_max + 1) if passed[j]), j_max)
    return Selection(j_hat, j_max, thresholds, differences, passed)


@dataclass(frozen=True, eq=False)
class Band:
    field: FieldOnGrid
    half_width: float
    selected_j: int
    j_max: int
    level: int
    mask: np.ndarray | None
    diagnostics: dict

    @property
    def center(self) -> np.ndarray:
        return self.field.values

    @property
    def lower(self) -> np.ndarray:
        return self.field.values - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.field.values + self.half_width

    def covers(self, truth) -> bool:
        """True when ``truth`` (values on the band grid) stays inside everywhere on Omega."""
        dev = np.abs(np.asarray(truth) - self.field.values)
        if self.mask is not None:
            dev = dev[self.mask]
        return bool(dev.max() <= self.half_width)

    def to_csv(self, path) -> None:
        pts = self.field.grid.points
        keep = np.ones(len(pts), bool) if self.mask is None else self.mask
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow((["x", "y"] if pts.shape[1] == 2 else ["x", "y", "z"]) + ["center", "lower", "upper"])
            for p, c in zip(pts[keep], self.center[keep]):
                w.writerow([repr(float(v)) for v in p] + [repr(float(c)), repr(float(c - self.half_width)),
                                                          repr(float(c + self.half_width))])

    def metadata(self) -> dict:
        return {"j_hat": self.selected_j, "j_max": self.j_max, "level": self.level,
                "s_n": self.half_width, **self.diagnostics}

    def metadata_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)


def band_width(sample1: Sample, level: int, cfg: BandConfig, model: SigmaModel, grid: EvalGrid,
               rng: np.random.Generator | None = None) -> float:
    n1 = len(sample1)
    if cfg.width == "sigma":
        return 1.01 * model.sigma(n1, level, cfg.x)
    if cfg.width == "rademacher":
        rng = rng if rng is not None else np.random.default_rng(0)
        spec = KernelSpec(sample1.d, level, cfg.mode)
        mask = cfg.mask(grid)
        r = np.mean([rademacher_sup(sample1, rademacher_signs(rng, n1), spec, grid, mask)
                     for _ in range(cfg.rademacher_draws)])
        return 1.01 * sigma_R(model.params(n1, level, cfg.x), float(r))
    raise InvalidInputError(f"unknown band width {cfg.width!r}")


def build_band(sample1: Sample, j_hat: int, cfg: BandConfig, model: SigmaModel, grid: EvalGrid | None = None,
               j_max: int | None = None, rng: np.random.Generator | None = None) -> Band:
    """Band ``f_{n1}(j_hat + u_n) +- 1.01 sigma(n1, j_hat + u_n, x)``."""
    if cfg.u_n is None:
        raise InvalidInputError("resolve the configuration before building a band")
    level = j_hat + cfg.u_n
    grid = grid if grid is not None else build_eval_grid(sample1.d, level)
    spec = KernelSpec(sample1.d, level, cfg.mode)
    fld = field_from_coeffs(empirical_coeffs(sample1, spec.kmax), spec, grid)
    half = band_width(sample1, level, cfg, model, grid, rng)
    sigma_table = {str(l): model.sigma(len(sample1), l, cfg.x) for l in range(model.max_level + 1)}
    diag = {"kappa": cfg.kappa, "u_n": cfg.u_n, "x": cfg.x, "sigma_table": sigma_table}
    return Band(fld, half, j_hat, j_max if j_max is not None else j_hat, level, cfg.mask(grid), diag)


def theoretical_jstar(t: float, b2: float, n2: int, j_max: int, model: SigmaModel, kappa: float = 1.0) -> int:
    """``min{j >= 1 : b2 2^{-jt} <= sigma(n2, j)} - 1``, or ``j_max - 1`` if none qualifies."""
    if t <= 0 or b2 <= 0:
        raise InvalidInputError("t and b2 must be positive")
    xk = kappa * math.log(n2)
    for j in range(1, j_max + 1):
        if b2 * 2.0 ** (-j * t) <= model.sigma(n2, j, xk):
            return j - 1
    return max(j_max - 1, 0)


def m_star(b_n: float, b2: float, t: float) -> int:
    """Smallest integer m >= 0 with ``b_n 2^{tm} >= 7 b2``."""
    if not 0 < b_n <= b2:
        raise InvalidInputError("need 0 < b_n <= b2")
    if t <= 0:
        raise InvalidInputError("t must be positive")
    return max(0, math.ceil(math.log2(7.0 * b2 / b_n) / t - 1e-12))


def indicator_I(n1: int, n2: int, j_star: int, u_n: int, m: int, t: float, x: float,
                model: SigmaModel, kappa: float = 1.0) -> int:
    """The finite-sample undersmoothing indicator in the coverage bound."""
    num = model.A(n2, j_star + 1, kappa * math.log(n2))
    den = model.A(n1, max(j_star + u_n - m, 0), x)
    lhs = 100.0 * math.sqrt(n1 / n2) * num / den
    return int(lhs > 2.0 ** ((u_n - m - 1) * (model.d / 2.0 + t)))


def v_n(n1: int, n2: int, j_max: int, j_star: int, u_n: int, m: int, t: float, x: float,
        model: SigmaModel, kappa: float = 1.0) -> tuple[float, int]:
    ind = indicator_I(n1, n2, j_star, u_n, m, t, x, model, kappa)
    # m can exceed j_max at small n; the tail count is never negative
    return 2.0 * max(j_max - m, 0) * n2 ** (-kappa) + ind, ind
