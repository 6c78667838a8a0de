"""Numerical property suites for kernels, cubature and the needlet frame.

Each suite returns a list of :class:`CheckResult`; the harness reports them
and the test-suite asserts on them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from needlet_bands.cubature import build_cubature, build_needlet_system, needlet_cubature, psi_coeffs
from needlet_bands.harmonics import Coeffs, synthesize
from needlet_bands.kernels import EIG, KernelSpec, kernel_Aj, sphere_constants
from needlet_bands.sphere import surface_area, uniform_points


@dataclass(frozen=True)
class CheckResult:
    name: str
    d: int
    level: int
    value: float
    tolerance: float
    passed: bool

    def row(self) -> dict:
        return asdict(self)


def _result(name, d, level, value, tol, passed=None):
    ok = value <= tol if passed is None else passed
    return CheckResult(name, d, level, float(value), float(tol), bool(ok))


def random_polynomial(rng: np.random.Generator, d: int, degree: int) -> Coeffs:
    """Harmonic coefficients of a random real spherical polynomial."""
    if d == 1:
        c = rng.normal(size=degree + 1)
        s = rng.normal(size=degree + 1)
        s[0] = 0.0
        return Coeffs(1, degree, c, s)
    c = np.tril(rng.normal(size=(degree + 1, degree + 1)))
    s = np.tril(rng.normal(size=(degree + 1, degree + 1)))
    s[:, 0] = 0.0
    return Coeffs(2, degree, c, s)


def polynomial_handle(coeffs: Coeffs):
    return lambda pts: synthesize(coeffs, np.ones(coeffs.kmax + 1), pts)


def reproduction_degree(spec: KernelSpec) -> int:
    """Largest degree reproduced exactly: lambda_k <= 2^{2j-1} (or k <= 2^{j-1})."""
    if spec.mode == EIG:
        k = 0
        while (k + 1) * (k + spec.d) <= 2.0 ** (2 * spec.j - 1):
            k += 1
        return k
    return int(math.floor(2.0 ** (spec.j - 1))) if spec.j >= 1 else 0


def cubature_exactness(d: int, j: int, mode: str = EIG) -> CheckResult:
    """Max error integrating every basis harmonic of degree <= design degree."""
    cub = needlet_cubature(KernelSpec(d, j, mode))
    c = cub.analyze(np.ones(len(cub)), cub.degree)
    c.cos_part.flat[0] -= math.sqrt(surface_area(d))
    err = max(np.abs(c.cos_part).max(), np.abs(c.sin_part).max())
    return _result("cubature_exactness", d, j, err, 1e-10)


def kernel_factorization(d: int, j: int, rng: np.random.Generator, pairs: int = 50, mode: str = EIG) -> CheckResult:
    """``sum_eta b_eta C_j(x, eta) C_j(eta, y) = A_j(x, y)`` at random pairs."""
    sys = build_needlet_system(KernelSpec(d, j, mode))
    x = uniform_points(rng, d, pairs)
    y = uniform_points(rng, d, pairs)
    lhs = np.einsum("ep,ep->p", sys.phi_matrix(x), sys.phi_matrix(y))
    rhs = kernel_Aj(sys.spec, np.sum(x * y, axis=1))
    return _result("kernel_factorization", d, j, np.abs(lhs - rhs).max(), 1e-10)


def reproduction(d: int, j: int, rng: np.random.Generator, trials: int = 3, mode: str = EIG) -> CheckResult:
    """A_j h = h for random h of the reproduced degree, A_j applied by exact cubature."""
    spec = KernelSpec(d, j, mode)
    deg = reproduction_degree(spec)
    cub = build_cubature(d, spec.kmax + deg)
    probes = uniform_points(rng, d, 25)
    worst = 0.0
    for _ in range(trials):
        h = polynomial_handle(random_polynomial(rng, d, deg))
        hv = h(cub.nodes)
        ajh = kernel_Aj(spec, probes @ cub.nodes.T) @ (cub.weights * hv)
        worst = max(worst, float(np.abs(ajh - h(probes)).max()))
    return _result("reproduction", d, j, worst, 1e-9)


def parseval(d: int, rng: np.random.Generator, degree: int = 3, mode: str = EIG) -> CheckResult:
    """Relative defect of ``||f||^2 = |<f, 1>|^2/|S^d| + sum_l sum_eta <f, psi>^2``."""
    coeffs = random_polynomial(rng, d, degree)
    f = polynomial_handle(coeffs)
    norm2 = float(np.sum(coeffs.cos_part ** 2 + coeffs.sin_part ** 2))
    cub = build_cubature(d, degree)
    total = cub.integrate(f(cub.nodes)) ** 2 / surface_area(d)
    level = 0
    while True:
        spec = KernelSpec(d, level, mode)
        total += float(np.sum(psi_coeffs(spec, f) ** 2))
        if reproduction_degree(spec.at_level(level + 1)) >= degree:
            break
        level += 1
    return _result("parseval", d, level, abs(total - norm2) / norm2, 1e-8)


def phi_norms(d: int, j: int, mode: str = EIG) -> list[CheckResult]:
    """L2 and sup bounds for the scaling functions, the L2 norm cross-checked by cubature."""
    sys = build_needlet_system(KernelSpec(d, j, mode))
    sc = sphere_constants(d)
    l2 = sys.phi_l2()
    # numeric L2 norm of a few needlets through an exact rule for their square
    cub = build_cubature(d, 2 * sys.spec.kmax)
    idx = np.unique(np.linspace(0, sys.size - 1, min(sys.size, 8)).astype(int))
    num_l2 = np.array([math.sqrt(cub.weights @ sys.phi(i, cub.nodes) ** 2) for i in idx])
    sup_bound = sc.D1 * 2.0 ** (j * d / 2.0)
    return [
        _result("phi_l2_bound", d, j, l2.max(), 1.0 + 1e-9),
        _result("phi_l2_consistency", d, j, np.abs(num_l2 - l2[idx]).max(), 1e-10),
        _result("phi_sup_bound", d, j, sys.phi_sup().max() / sup_bound, 1.0 + 1e-9),
    ]


def kernel_bound(d: int, j: int, mode: str = EIG, n_theta: int = 20001, constant: str = "sphere") -> list[CheckResult]:
    """``|A_j| <= 2^{jd} D2`` on a dense angle grid and the row-norm bound."""
    spec = KernelSpec(d, j, mode)
    sc = sphere_constants(d)
    D2 = sc.D2 if constant == "sphere" else sc.bound_D2
    th = np.linspace(0.0, math.pi, n_theta)
    bound = 2.0 ** (j * d) * D2
    sup = np.abs(kernel_Aj(spec, np.cos(th))).max()
    cub = build_cubature(d, 2 * spec.kmax)
    x = np.eye(d + 1)[-1:]
    row = float(cub.weights @ kernel_Aj(spec, cub.nodes @ x[0]) ** 2)
    return [
        _result(f"kernel_sup_bound[{constant}]", d, j, sup / bound, 1.0 + 1e-12),
        _result(f"kernel_row_norm_bound[{constant}]", d, j, row / bound, 1.0 + 1e-12),
    ]


def localization(d: int, levels=range(7), K: int = 3, mode: str = EIG) -> CheckResult:
    """``sup_theta 2^{-jd} |A_j(cos theta)| (1 + 2^j theta)^K`` should not grow with j."""
    th = np.linspace(0.0, math.pi, 20001)
    vals = [float(np.max(np.abs(kernel_Aj(KernelSpec(d, j, mode), np.cos(th))) * (1 + 2.0 ** j * th) ** K)
                  / 2.0 ** (j * d)) for j in levels]
    half = len(vals) // 2 + 1
    head, tail = max(vals[:half]), max(vals[half:])
    return _result("localization_ratio", d, max(levels), tail / head, 2.0)


def empirical_constants_rows(d: int, levels, mode: str = EIG) -> list[dict]:
    out = []
    for j in levels:
        sys = build_needlet_system(KernelSpec(d, j, mode))
        out.append({"d": d, "level": j, "size": sys.size, "k1": sys.cubature.weight_constant(j),
                    "k2": sys.cubature.count_constant(j), "c0": sys.c0})
    return out


def frame_suite(rng: np.random.Generator, levels=range(7), dims=(1, 2), mode: str = EIG) -> list[CheckResult]:
    res = []
    for d in dims:
        for j in levels:
            res.append(cubature_exactness(d, j, mode))
            res.append(kernel_factorization(d, j, rng, mode=mode))
            res.append(reproduction(d, j, rng, mode=mode))
            res.extend(phi_norms(d, j, mode))
            res.extend(kernel_bound(d, j, mode, constant="sphere" if d >= 2 else "circle"))
        res.append(localization(d, levels, mode=mode))
        res.append(parseval(d, rng, mode=mode))
    return res

