"""Benchmark densities, exact samplers and the zonal bias series for f_alpha."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from needlet_bands.errors import InvalidInputError
from needlet_bands.estimation import Sample
from needlet_bands.kernels import DEG, KernelSpec
from needlet_bands.sphere import SUPPORTED_DIMS, EvalGrid, make_point, surface_area, uniform_points

MAX_STABLE_K = 1_000_000


def north_pole(d: int) -> np.ndarray:
    return np.eye(d + 1)[-1]


def _zonal_measure(d: int) -> float:
    """|S^{d-1}|, with |S^0| = 2."""
    return 2.0 if d == 1 else surface_area(d - 1)


def is_even_integer(alpha: float) -> bool:
    half = alpha / 2.0
    return abs(half - round(half)) < 1e-12


@dataclass(frozen=True, eq=False)
class TestDensity:
    """A density on S^d that is zonal around ``x0`` (or constant).

    ``kind`` is ``"uniform"``, ``"polynomial"`` (``coeffs`` are the power
    coefficients of a polynomial in ``t = <x, x0>``) or ``"falpha"``
    (proportional to ``(1 - t)^{alpha/2}``).
    """

    __test__ = False

    kind: str
    d: int
    normalizer: float
    sup_bound: float
    x0: np.ndarray
    alpha: float | None = None
    coeffs: tuple = ()
    smoothness_t: float | None = None
    b_lower: float | None = None
    b_upper: float | None = None
    extras: dict = field(default_factory=dict)

    def profile(self, t):
        """Unnormalized zonal profile as a function of ``t = <x, x0>``."""
        t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
        if self.kind == "uniform":
            return np.ones_like(t)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(t, self.coeffs)
        return np.power(np.maximum(1.0 - t, 0.0), self.alpha / 2.0)

    def unnormalized(self, points):
        return self.profile(np.asarray(points, dtype=float) @ self.x0)

    def __call__(self, points):
        return self.unnormalized(points) / self.normalizer

    def with_bias_constants(self, b_lower: float, b_upper: float) -> "TestDensity":
        return TestDensity(self.kind, self.d, self.normalizer, self.sup_bound, self.x0, self.alpha,
                           self.coeffs, self.smoothness_t, b_lower, b_upper, dict(self.extras))


def _zonal_integral(d: int, g, n_nodes: int = 400, a: float = 0.0) -> float:
    """``|S^{d-1}| int g(t) (1-t)^a (1-t^2)^{nu-1/2} dt`` by Gauss-Jacobi."""
    nu = (d - 1) / 2.0
    t, w = roots_jacobi(n_nodes, a + nu - 0.5, nu - 0.5)
    return _zonal_measure(d) * float(np.dot(w, g(t)))


def _pole(x0, d: int) -> np.ndarray:
    if x0 is None:
        return north_pole(d)
    p = make_point(x0).coords
    if p.shape[0] != d + 1:
        raise InvalidInputError("pole dimension does not match d")
    return p


def make_uniform_density(d: int) -> TestDensity:
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")
    area = surface_area(d)
    return TestDensity("uniform", d, area, 1.0 / area, north_pole(d), smoothness_t=math.inf)


def make_polynomial_density(coeffs, d: int = 2, x0=None) -> TestDensity:
    """Density proportional to ``sum_i coeffs[i] <x, x0>^i``; must be nonnegative."""
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")
    c = tuple(float(v) for v in coeffs)
    if not c:
        raise InvalidInputError("need at least one coefficient")
    p = np.polynomial.Polynomial(c)
    dp = p.deriv().trim(1e-14 * max(abs(v) for v in c)) if len(c) > 1 else None
    crit = [r.real for r in dp.roots() if abs(r.imag) < 1e-12 and -1.0 <= r.real <= 1.0] if dp is not None else []
    cand = np.concatenate([np.linspace(-1.0, 1.0, 4001), np.array(crit + [-1.0, 1.0])])
    vals = p(cand)
    if vals.min() < -1e-12:
        raise InvalidInputError("polynomial profile takes negative values")
    z = _zonal_integral(d, lambda t: p(t), n_nodes=len(c) + 8)
    return TestDensity("polynomial", d, z, float(vals.max()) / z, _pole(x0, d), coeffs=c)


def make_falpha_density(alpha: float, x0=None, d: int = 2) -> TestDensity:
    """Density proportional to ``(1 - <x, x0>)^{alpha/2}``, Hoelder of order alpha at x0."""
    if d not in SUPPORTED_DIMS:
        raise InvalidInputError(f"dimension must be 1 or 2, got {d}")
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    if is_even_integer(alpha):
        raise InvalidInputError("alpha/2 is an integer; use the polynomial kind instead")
    z = _zonal_integral(d, np.ones_like, n_nodes=8, a=alpha / 2.0)
    return TestDensity("falpha", d, z, 2.0 ** (alpha / 2.0) / z, _pole(x0, d), alpha=alpha, smoothness_t=alpha)


def sample_density(density: TestDensity, seed, n: int) -> Sample:
    """Rejection sampling from the uniform proposal with envelope ``sup_bound``."""
    rng = np.random.default_rng(seed)
    return Sample(draw(density, rng, n), density.d)


def draw(density: TestDensity, rng: np.random.Generator, n: int) -> np.ndarray:
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if density.kind == "uniform":
        return uniform_points(rng, density.d, n)
    out, have = [], 0
    while have < n:
        batch = max(64, int(1.3 * (n - have) * density.sup_bound * surface_area(density.d)))
        prop = uniform_points(rng, density.d, batch)
        keep = rng.uniform(size=batch) * density.sup_bound <= density(prop)
        out.append(prop[keep])
        have += int(keep.sum())
    return np.concatenate(out)[:n]


def marginal_cdf(density: TestDensity, t, n_nodes: int = 200):
    """CDF of ``<X, x0>`` at ``t`` for the zonal density (d=2)."""
    if density.d != 2:
        raise InvalidInputError("the closed marginal is implemented for d=2")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if density.kind == "falpha":
        e = density.alpha / 2.0 + 1.0
        # 2 pi int_{-1}^{t} (1-s)^{a/2} ds
        return 2.0 * math.pi * (2.0 ** e - (1.0 - t) ** e) / e / density.normalizer
    p = np.polynomial.Polynomial(density.coeffs if density.kind == "polynomial" else (1.0,)).integ()
    return 2.0 * math.pi * (p(t) - p(-1.0)) / density.normalizer


def _check_alpha_nu(alpha: float, nu: float) -> None:
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    if not nu > 0:
        raise InvalidInputError("nu must be positive (d >= 2)")


def u_k_closed(k: int, alpha: float, nu: float) -> float:
    """``int C_k^nu(t) (1-t)^{alpha/2} (1-t^2)^{nu-1/2} dt`` in closed form.

    Magnitudes are accumulated as log-Gamma sums and the sign of the
    Pochhammer symbol ``(-alpha/2)_k`` is tracked separately.
    """
    _check_alpha_nu(alpha, nu)
    if is_even_integer(alpha):
        raise InvalidInputError("closed form excludes integer alpha/2")
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    if k > MAX_STABLE_K:
        raise InvalidInputError(f"k={k} beyond the stable range (max {MAX_STABLE_K})")
    h = alpha / 2.0
    sign = -1.0 if sum(1 for i in range(k) if i < h) % 2 else 1.0
    log_mag = (math.lgamma(k - h) - math.lgamma(-h)
               + math.lgamma(2 * nu + k) - math.lgamma(k + 1) - math.lgamma(2 * nu)
               + math.lgamma(nu + 0.5) + math.lgamma(h + nu + 0.5)
               + (h + 2 * nu) * math.log(2.0)
               - math.lgamma(h + k + 2 * nu + 1))
    return sign * math.exp(log_mag)


def _jacobi_with_prev(n: int, a, b, x):
    """P_n^{(a,b)}(x) and P_{n-1}^{(a,b)}(x) by the three-term recurrence."""
    one = np.ones_like(x)
    if n == 0:
        return one, np.zeros_like(x)
    prev, cur = one, (a + 1) + (a + b + 2) * (x - 1) / 2
    for m in range(2, n + 1):
        c = 2 * m + a + b
        nxt = ((c - 1) * (c * (c - 2) * x + a * a - b * b) * cur - 2 * (m + a - 1) * (m + b - 1) * c * prev) / (
            2 * m * (m + a + b) * (c - 2))
        prev, cur = cur, nxt
    return cur, prev


def gauss_jacobi_extended(n: int, a: float, b: float):
    """Gauss-Jacobi rule with nodes Newton-polished in extended precision."""
    t0, _ = roots_jacobi(n, a, b)
    x = t0.astype(np.longdouble)
    al, be = np.longdouble(a), np.longdouble(b)
    for _ in range(4):
        p, q = _jacobi_with_prev(n, al, be, x)
        c = 2 * n + al + be
        dp = (n * ((al - be) - c * x) * p + 2 * (n + al) * (n + be) * q) / (c * (1 - x * x))
        x = x - p / dp
    p, q = _jacobi_with_prev(n, al, be, x)
    c = 2 * n + al + be
    dp = (n * ((al - be) - c * x) * p + 2 * (n + al) * (n + be) * q) / (c * (1 - x * x))
    w = 1 / ((1 - x * x) * dp * dp)
    mu0 = math.exp((a + b + 1) * math.log(2.0) + math.lgamma(a + 1) + math.lgamma(b + 1) - math.lgamma(a + b + 2))
    return x, w * (np.longdouble(mu0) / w.sum())


def _gegenbauer_extended(k: int, nu: float, t):
    nu = np.longdouble(nu)
    prev = np.ones_like(t)
    if k == 0:
        return prev
    cur = 2 * nu * t
    for m in range(2, k + 1):
        prev, cur = cur, (2 * (m + nu - 1) * t * cur - (m + 2 * nu - 2) * prev) / m
    return cur


def u_k_quadrature(k: int, alpha: float, nu: float, extra_nodes: int = 64) -> float:
    """``int C_k^nu(t) (1-t)^{alpha/2} (1-t^2)^{nu-1/2} dt`` by direct Gauss-Jacobi.

    The weight ``(1-t)^{alpha/2+nu-1/2} (1+t)^{nu-1/2}`` absorbs the
    non-polynomial factor, so ``k + extra_nodes`` nodes integrate exactly;
    the sum is done in extended precision because the oscillating
    integrand cancels down to ``|u_k| ~ k^{-(alpha+1+2 nu)}``.
    """
    _check_alpha_nu(alpha, nu)
    t, w = gauss_jacobi_extended(k + extra_nodes, alpha / 2.0 + nu - 0.5, nu - 0.5)
    return float(np.dot(w, _gegenbauer_extended(k, nu, t)))


def _falpha_series(alpha: float, spec: KernelSpec) -> np.ndarray:
    """Weights w_k with ``A_j f_alpha(x) = sum_k w_k C_k(s) / C_k(1)``, s = <x, x0>."""
    if spec.d != 2:
        raise InvalidInputError("the f_alpha series is implemented for d=2")
    nu = (spec.d - 1) / 2.0
    ratio = _zonal_measure(spec.d) / surface_area(spec.d)
    k = np.arange(spec.kmax + 1)
    u = np.array([u_k_closed(int(i), alpha, nu) for i in k])
    return spec.a_weights() * ratio * (1.0 + k / nu) * u


def falpha_projection_profile(alpha: float, spec: KernelSpec, s):
    """``A_j f_alpha`` (unnormalized) as a function of ``s = <x, x0>``."""
    w = _falpha_series(alpha, spec)
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    # d=2: C_k^{1/2} = P_k with P_k(1) = 1
    return np.polynomial.legendre.legval(s, w)


def bias_at_pole(alpha: float, spec: KernelSpec) -> float:
    """``|A_j f_alpha(x0) - f_alpha(x0)|`` for the unnormalized f_alpha."""
    if is_even_integer(alpha):
        # polynomial case: exact arithmetic on the profile
        p = make_polynomial_density(np.polynomial.polynomial.polypow([1.0, -1.0], round(alpha / 2)), spec.d)
        return abs(_poly_projection(p, spec, np.array([1.0]))[0] - 0.0)
    return abs(float(np.sum(_falpha_series(alpha, spec))))


def _poly_projection(density: TestDensity, spec: KernelSpec, s):
    """Projection of an unnormalized zonal polynomial profile via its Legendre expansion."""
    leg = np.polynomial.legendre.poly2leg(density.coeffs)
    ak = np.zeros(len(leg))
    w = spec.a_weights()
    m = min(len(leg), len(w))
    ak[:m] = w[:m]
    return np.polynomial.legendre.legval(s, leg * ak)


def bias_sup(alpha: float, spec: KernelSpec, grid: EvalGrid | None = None, x0=None) -> float:
    """Sup of ``|A_j f_alpha - f_alpha|`` (unnormalized).

    Without a grid the zonal error is scanned along a meridian through x0
    with ``2^{j+8}`` intervals, which includes the pole itself.
    """
    if grid is None:
        s = np.cos(np.linspace(0.0, math.pi, 2 ** (spec.j + 8) + 1))
    else:
        s = grid.points @ _pole(x0, spec.d)
    truth = np.power(np.maximum(1.0 - np.clip(s, -1.0, 1.0), 0.0), alpha / 2.0)
    if is_even_integer(alpha):
        p = make_polynomial_density(np.polynomial.polynomial.polypow([1.0, -1.0], round(alpha / 2)), spec.d)
        approx = _poly_projection(p, spec, s)
    else:
        approx = falpha_projection_profile(alpha, spec, s)
    return float(np.max(np.abs(approx - truth)))


def pole_bias_cubature(alpha: float, spec: KernelSpec) -> float:
    """``|A_j f_alpha(x0)|`` by 2-D cubature, independent of the series.

    ``f_alpha`` behaves like ``theta^alpha`` at x0, so the latitude rule is
    graded towards the pole instead of plain Gauss-Legendre.
    """
    from needlet_bands.cubature import function_coeffs, graded_cubature
    from needlet_bands.harmonics import synthesize

    if spec.d != 2:
        raise InvalidInputError("the pole check is implemented for d=2")
    dens = make_falpha_density(alpha)
    cub = graded_cubature(spec.kmax + 33, order=spec.kmax // 2 + 32)
    c = function_coeffs(dens.unnormalized, 2, spec.kmax, cub)
    return abs(float(synthesize(c, spec.a_weights(), north_pole(2)[None, :])[0]))


def bias_ratios(alpha: float, levels, mode: str = DEG) -> dict:
    """``2^{j alpha} * bias_sup`` per level."""
    return {j: 2.0 ** (j * alpha) * bias_sup(alpha, KernelSpec(2, j, mode)) for j in levels}


def measure_bias_constants(density: TestDensity, levels, mode: str) -> TestDensity:
    """Attach measured ``b_lower``, ``b_upper`` (normalized density, smoothness t)."""
    if density.kind != "falpha":
        raise InvalidInputError("bias constants are measured for f_alpha densities")
    r = [v / density.normalizer for v in bias_ratios(density.alpha, levels, mode).values()]
    return density.with_bias_constants(min(r), max(r))
