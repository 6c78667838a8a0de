import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from needlet_bands.cubature import build_cubature
from needlet_bands.errors import InvalidInputError
from needlet_bands.kernels import (DEG, EIG, KernelSpec, dim_Hk, gegenbauer, kernel_Aj, kernel_Cj, kernel_Lk,
                                   sphere_constants, window_a, window_c, zonal_series)
from needlet_bands.sphere import sample_uniform

from oracles import Aj_oracle, a_weights_oracle, rodrigues_gegenbauer, window_oracle

unit = st.floats(-1, 1, allow_nan=False)


def test_window_plateau_and_support():
    assert window_a(np.array([0.0, 0.25, 0.5])).tolist() == [1.0, 1.0, 1.0]
    assert window_a(np.array([1.0, 1.5, 7.0])).tolist() == [0.0, 0.0, 0.0]
    assert window_a(0.75) == pytest.approx(0.5)


@given(st.floats(0, 3, allow_nan=False))
def test_window_matches_oracle_and_range(t):
    v = window_a(t)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(window_oracle(t), abs=1e-15)


@given(st.floats(0, 2, allow_nan=False), st.floats(0, 1, allow_nan=False))
def test_window_monotone(t, dt):
    assert window_a(t + dt) <= window_a(t)


def test_window_smoothness_finite_differences():
    # central differences of order 1..4 stay bounded as the step shrinks
    for order in range(1, 5):
        peaks = []
        for h in (1e-2, 5e-3, 2.5e-3):
            t = np.linspace(0.3, 1.2, 2001)
            coef = [(-1) ** i * math.comb(order, i) for i in range(order + 1)]
            diff = sum(c * window_a(t + (order / 2 - i) * h) for i, c in enumerate(coef)) / h ** order
            peaks.append(np.abs(diff).max())
        assert peaks[-1] <= 1.2 * peaks[0] + 1.0


def test_window_c_examples():
    assert window_c(0.3) == 0.0
    assert window_c(2.5) == 0.0
    assert window_c(1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("k, nu, t, expected", [(0, 0.5, 0.3, 1.0), (1, 0.5, 0.3, 0.3), (7, 0.5, 1.0, 1.0),
                                                (1, 1.5, 0.2, 0.6)])
def test_gegenbauer_examples(k, nu, t, expected):
    assert gegenbauer(k, nu, t) == pytest.approx(expected, rel=1e-14)


def test_gegenbauer_rodrigues_k12():
    exact = float(rodrigues_gegenbauer(12, Fraction(1, 2), 0.41))
    assert gegenbauer(12, 0.5, 0.41) == pytest.approx(exact, rel=1e-12)


def test_gegenbauer_negative_degree():
    with pytest.raises(InvalidInputError):
        gegenbauer(-1, 0.5, 0.1)


def test_dim_Hk():
    assert dim_Hk(2, 3) == 7
    assert dim_Hk(2, 0) == 1
    assert dim_Hk(1, 5) == 2
    assert dim_Hk(1, 0) == 1


def test_kernel_Lk_examples():
    assert kernel_Lk(2, 3, 1.0) == pytest.approx(7 / (4 * math.pi), rel=1e-14)
    assert kernel_Lk(2, 3, 1.0) == pytest.approx(0.557042, abs=1e-6)
    assert kernel_Lk(2, 0, 0.123) == pytest.approx(1 / (4 * math.pi))
    assert kernel_Lk(2, 1, 0.5) == pytest.approx(0.119366, abs=1e-6)
    with pytest.raises(InvalidInputError):
        kernel_Lk(1, 2, 0.3, use_nu=True)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("k", [0, 1, 4, 9])
def test_kernel_Lk_trace(d, k):
    assert kernel_Lk(d, k, 1.0) == pytest.approx(dim_Hk(d, k) / sphere_constants(d).surface_measure)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("mode", [EIG, DEG])
@pytest.mark.parametrize("j", [0, 1, 2, 3, 5])
def test_kernel_Aj_direct_sum(d, mode, j):
    t = np.linspace(-1, 1, 37)
    assert np.allclose(kernel_Aj(KernelSpec(d, j, mode), t), Aj_oracle(d, j, t, mode), atol=1e-12, rtol=1e-12)
    assert np.allclose(kernel_Cj(KernelSpec(d, j, mode), t), Aj_oracle(d, j, t, mode, power=0.5),
                       atol=1e-12, rtol=1e-12)


def test_kernel_Aj_examples():
    assert kernel_Aj(KernelSpec(2, 0), 0.3) == pytest.approx(1 / (4 * math.pi))
    assert kernel_Cj(KernelSpec(2, 0), -0.9) == pytest.approx(1 / (4 * math.pi))
    k = np.arange(4)
    expected = sum(window_oracle(kk * (kk + 1) / 16) * (2 * kk + 1) / (4 * math.pi) for kk in k)
    assert kernel_Aj(KernelSpec(2, 2), 1.0) == pytest.approx(expected, rel=1e-14)
    spec = KernelSpec(1, 2)
    w = np.sqrt(a_weights_oracle(1, 2))
    expected = w[0] / (2 * math.pi) + sum(w[1:]) / math.pi
    assert kernel_Cj(spec, 1.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("j", [0, 2, 4])
def test_kernel_integrates_to_one(d, j):
    spec = KernelSpec(d, j)
    cub = build_cubature(d, spec.kmax)
    x = sample_uniform(0, d, 1)[0]
    assert cub.integrate(kernel_Aj(spec, cub.nodes @ x)) == pytest.approx(1.0, abs=1e-12)


def test_kmax_and_support():
    for d in (1, 2):
        for j in range(6):
            for mode in (EIG, DEG):
                spec = KernelSpec(d, j, mode)
                assert spec.kmax == 2 ** j - 1
                assert len(a_weights_oracle(d, j, mode)) == spec.kmax + 1


def test_kernelspec_validation():
    for bad in [dict(d=3, j=1), dict(d=2, j=-1), dict(d=2, j=1, mode="other")]:
        with pytest.raises(InvalidInputError):
            KernelSpec(**bad)


@settings(max_examples=40, deadline=None)
@given(unit, st.integers(0, 5), st.sampled_from([1, 2]), st.sampled_from([EIG, DEG]))
def test_telescoping(t, j, d, mode):
    lo, hi = KernelSpec(d, j, mode), KernelSpec(d, j + 1, mode)
    a_lo = np.zeros(hi.kmax + 1)
    a_lo[: lo.kmax + 1] = lo.a_weights()
    lhs = kernel_Aj(hi, t) - kernel_Aj(lo, t)
    rhs = zonal_series(d, hi.a_weights() - a_lo, t)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, 2.0 ** (j * d))


@settings(max_examples=40, deadline=None)
@given(unit, st.integers(0, 6), st.sampled_from([EIG, DEG]))
def test_sphere_kernel_bound(t, j, mode):
    sc = sphere_constants(2)
    assert abs(kernel_Aj(KernelSpec(2, j, mode), t)) <= 2.0 ** (2 * j) * sc.D2 * (1 + 1e-12)


def test_circle_kernel_bound_uses_doubled_constant():
    sc = sphere_constants(1)
    peak = [kernel_Aj(KernelSpec(1, j), 1.0) / 2.0 ** j for j in range(1, 7)]
    # the sphere-style constant 1/(2 pi) is too small on the circle
    assert max(peak) > sc.D2
    assert max(peak) <= sc.bound_D2


def test_sphere_constants():
    sc = sphere_constants(2)
    assert sc.D1 == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert sc.D2 == pytest.approx(1 / (4 * math.pi))
    assert sc.nu == 0.5
    assert sphere_constants(1).nu == 0.0


def test_needlet_antipodal_decay():
    # phi is C_j up to a weight factor; with this window the 1e-3 level is
    # reached from j=5 on (j=4 sits at 1.7e-2 in eig mode, 4.9e-3 in deg mode)
    ratio = {(m, j): abs(kernel_Cj(KernelSpec(2, j, m), -1.0)) / kernel_Cj(KernelSpec(2, j, m), 1.0)
             for m in (EIG, DEG) for j in range(2, 8)}
    assert ratio[(EIG, 4)] == pytest.approx(0.017196, rel=1e-4)
    assert ratio[(DEG, 4)] == pytest.approx(0.004896, rel=1e-3)
    assert all(ratio[(m, j)] <= 1e-3 for m in (EIG, DEG) for j in (5, 6, 7))
