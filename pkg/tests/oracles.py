"""Independent reference implementations used only by the tests.

Nothing here shares code with the package: polynomials are expanded in exact
rational arithmetic, integrals go through mpmath, and bound formulas are
transcribed afresh.
"""
from fractions import Fraction
import functools
import math

import mpmath
import numpy as np
from scipy.special import eval_legendre


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_pow(p, e):
    out = [Fraction(1)]
    for _ in range(e):
        out = _poly_mul(out, p)
    return out


def _poly_deriv(p, times):
    for _ in range(times):
        p = [i * c for i, c in enumerate(p)][1:] or [Fraction(0)]
    return p


def _poly_div_one_minus_t2(p):
    """Exact quotient of ``p`` by ``1 - t^2`` (the remainder must vanish)."""
    p = list(p)
    q = [Fraction(0)] * max(len(p) - 2, 1)
    for i in range(len(p) - 1, 1, -1):
        c = -p[i]
        q[i - 2] = c
        p[i] += c
        p[i - 2] -= c
    assert p[0] == 0 and p[1] == 0
    return q


def _poly_eval(p, t):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * t + c
    return acc


@functools.lru_cache(maxsize=None)
def rodrigues_poly(k: int, nu: Fraction) -> tuple:
    """Exact power coefficients of ``C_k^nu`` from the Rodrigues formula.

    Only half-integer ``nu`` in {1/2, 3/2} are supported so that the
    differentiated factor ``(1 - t^2)^(k + nu - 1/2)`` is a polynomial.
    """
    nu = Fraction(nu)
    e = k + nu - Fraction(1, 2)
    if e.denominator != 1 or nu not in (Fraction(1, 2), Fraction(3, 2)):
        raise ValueError("oracle supports nu in {1/2, 3/2}")
    base = [Fraction(1), Fraction(0), Fraction(-1)]
    deriv = _poly_deriv(_poly_pow(base, int(e)), k)
    if nu == Fraction(3, 2):
        deriv = _poly_div_one_minus_t2(deriv)
        # Gamma(nu+1/2) Gamma(k+2nu) / (Gamma(2nu) Gamma(nu+k+1/2)) = (k+2)/2
        const = Fraction(k + 2, 2)
    else:
        const = Fraction(1)
    scale = Fraction((-1) ** k, 2 ** k * math.factorial(k)) * const
    return tuple(scale * c for c in deriv)


def rodrigues_gegenbauer(k: int, nu: Fraction, t: float) -> Fraction:
    """``C_k^nu(t)`` exact at the rational ``t``."""
    return _poly_eval(rodrigues_poly(k, Fraction(nu)), Fraction(t))


def window_oracle(t: float) -> float:
    if t <= 0.5:
        return 1.0
    if t >= 1.0:
        return 0.0
    g = lambda u: math.exp(-1.0 / u) if u > 0 else 0.0
    return g(2 * (1 - t)) / (g(2 * (1 - t)) + g(2 * t - 1))


def lambda_k(d, k):
    return k * (k + d - 1)


def a_weights_oracle(d, j, mode="eig"):
    out = []
    k = 0
    while True:
        arg = lambda_k(d, k) / 4.0 ** j if mode == "eig" else k / 2.0 ** j
        if arg >= 1.0:
            return out
        out.append(window_oracle(arg))
        k += 1


def Lk_oracle(d, k, t):
    t = np.asarray(t, dtype=float)
    if d == 2:
        return (2 * k + 1) * eval_legendre(k, t) / (4 * math.pi)
    if k == 0:
        return np.full_like(t, 1.0 / (2 * math.pi))
    return np.cos(k * np.arccos(np.clip(t, -1, 1))) / math.pi


def Aj_oracle(d, j, t, mode="eig", power=1.0):
    w = a_weights_oracle(d, j, mode)
    return sum((wk ** power) * Lk_oracle(d, k, t) for k, wk in enumerate(w))


def sigma_bar_oracle(n, l, x, f_sup, d, c0, Z, D1):
    s = 2.0 ** (l * d)
    L = math.log(2 * Z) + x
    return c0 * math.sqrt(2 * L * f_sup) * math.sqrt(s / n) + c0 * 2.0 / 3.0 * D1 * L * s / n


def sigma_R_oracle(n, j, x, f_sup, d, D2, R):
    s = 2.0 ** (j * d)
    return 6 * R + 10 * math.sqrt(s * D2 * f_sup * (x + math.log(2)) / n) + 22 * s * D2 * (2 * x + 2 * math.log(2)) / n


def uk_mpmath(k, alpha, nu, dps=40):
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha) / 2
        nu_ = mpmath.mpf(nu)
        f = lambda t: mpmath.gegenbauer(k, nu_, t) * (1 - t) ** a * (1 - t * t) ** (nu_ - mpmath.mpf(1) / 2)
        pts = mpmath.linspace(-1, 1, max(2, k // 2 + 2))
        return float(mpmath.quad(f, pts))


def falpha_normalizer_s2(alpha):
    e = alpha / 2 + 1
    return 2 * math.pi * 2 ** e / e
