import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from needlet_bands.bands import jmax_default
from needlet_bands.cubature import build_cubature, function_coeffs, graded_cubature
from needlet_bands.densities import bias_at_pole, draw, make_falpha_density, make_polynomial_density, north_pole
from needlet_bands.errors import InvalidInputError
from needlet_bands.estimation import (FieldOnGrid, Sample, estimate_density, plugin_sup_bound, population_projection,
                                      sup_norm_diff)
from needlet_bands.harmonics import synthesize
from needlet_bands.kernels import KernelSpec, kernel_Aj, sphere_constants
from needlet_bands.sphere import build_eval_grid, sample_uniform

from oracles import Aj_oracle


def test_sample_validation():
    with pytest.raises(InvalidInputError):
        Sample(np.zeros((0, 3)), 2)
    with pytest.raises(InvalidInputError):
        Sample(np.ones((4, 2)), 2)
    s = Sample(sample_uniform(0, 2, 10), 2)
    a, b = s.split(6)
    assert len(a) == 6 and len(b) == 4


@pytest.mark.parametrize("d", [1, 2])
def test_level_zero_is_constant(d):
    grid = build_eval_grid(d, 1)
    for n in (1, 7):
        est = estimate_density(Sample(sample_uniform(n, d, n), d), KernelSpec(d, 0), grid)
        assert np.allclose(est.values, 1 / sphere_constants(d).surface_measure, atol=1e-14)


def test_matches_direct_kernel_sum_at_probes():
    pts = sample_uniform(3, 2, 3)
    probes = sample_uniform(4, 2, 10)
    spec = KernelSpec(2, 2)
    from needlet_bands.estimation import empirical_coeffs
    got = synthesize(empirical_coeffs(Sample(pts, 2), spec.kmax), spec.a_weights(), probes)
    ref = Aj_oracle(2, 2, probes @ pts.T).mean(axis=1)
    assert np.allclose(got, ref, atol=1e-12)


def test_ring_grid_fft_path_matches_direct():
    pts = sample_uniform(12, 2, 50)
    spec = KernelSpec(2, 3)
    grid = build_eval_grid(2, 3)
    est = estimate_density(Sample(pts, 2), spec, grid)
    direct = kernel_Aj(spec, grid.points @ pts.T).mean(axis=1)
    assert np.allclose(est.values, direct, atol=1e-12)


def test_estimate_integrates_to_one():
    spec = KernelSpec(2, 3)
    cub = build_cubature(2, spec.kmax)
    pts = sample_uniform(5, 2, 40)
    vals = kernel_Aj(spec, cub.nodes @ pts.T).mean(axis=1)
    assert cub.integrate(vals) == pytest.approx(1.0, abs=1e-9)


def test_estimate_errors():
    s = Sample(sample_uniform(0, 2, 5), 2)
    with pytest.raises(InvalidInputError):
        estimate_density(s, KernelSpec(2, 3), build_eval_grid(2, 2))
    with pytest.raises(InvalidInputError):
        estimate_density(s, KernelSpec(1, 1), build_eval_grid(1, 1))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 30), st.integers(1, 30), st.sampled_from([1, 2]))
def test_linearity_over_concatenation(seed, n, m, d):
    rng = np.random.default_rng(seed)
    from needlet_bands.sphere import uniform_points
    x, y = uniform_points(rng, d, n), uniform_points(rng, d, m)
    spec, grid = KernelSpec(d, 2), build_eval_grid(d, 2)
    both = estimate_density(Sample(np.vstack([x, y]), d), spec, grid).values
    e1 = estimate_density(Sample(x, d), spec, grid).values
    e2 = estimate_density(Sample(y, d), spec, grid).values
    assert np.allclose(both, (n * e1 + m * e2) / (n + m), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 4))
def test_sup_bounded_by_kernel_peak(seed, j):
    s = Sample(sample_uniform(seed, 2, 20), 2)
    est = estimate_density(s, KernelSpec(2, j), build_eval_grid(2, j))
    assert est.sup() <= 2.0 ** (2 * j) * sphere_constants(2).D2 * (1 + 1e-12)


def test_population_projection_examples():
    grid = build_eval_grid(2, 3)
    uni = lambda p: np.full(len(p), 1 / (4 * math.pi))
    for j in (0, 2, 3):
        assert np.allclose(population_projection(uni, KernelSpec(2, j), grid).values, 1 / (4 * math.pi), atol=1e-14)
    poly = make_polynomial_density([1.0, -1.0])
    for j in (2, 3):
        assert np.allclose(population_projection(poly, KernelSpec(2, j), grid).values, poly(grid.points), atol=1e-9)


def test_population_projection_falpha_pole_vs_series():
    dens = make_falpha_density(1.5)
    spec = KernelSpec(2, 4)
    series = bias_at_pole(1.5, spec) / dens.normalizer
    pole = north_pole(2)[None, :]
    graded = graded_cubature(spec.kmax + 33, order=40)
    at_pole = synthesize(function_coeffs(dens, 2, spec.kmax, graded), spec.a_weights(), pole)[0]
    assert abs(at_pole - series) <= 1e-7
    # the default product reference resolves the theta^alpha cusp to about 2e-7
    default = synthesize(function_coeffs(dens, 2, spec.kmax), spec.a_weights(), pole)[0]
    assert abs(default - series) <= 5e-7
    grid = build_eval_grid(2, 4)
    a = population_projection(dens, spec, grid).values
    b = population_projection(dens, spec, grid, graded).values
    assert np.abs(a - b).max() <= 1e-6


def test_unbiasedness_monte_carlo():
    dens = make_polynomial_density([1.0, -1.0])
    spec = KernelSpec(2, 2)
    grid = build_eval_grid(2, 2)
    rng = np.random.default_rng(77)
    reps = 2000
    vals = np.array([estimate_density(Sample(draw(dens, rng, 50), 2), spec, grid).values for _ in range(reps)])
    truth = population_projection(dens, spec, grid).values
    se = vals.std(axis=0, ddof=1) / math.sqrt(reps)
    assert np.all(np.abs(vals.mean(axis=0) - truth) <= 4.0 * se + 1e-12)


def test_sup_norm_diff():
    grid = build_eval_grid(2, 1)
    a = FieldOnGrid(grid, np.full(len(grid), 0.7))
    assert sup_norm_diff(a, a) == 0.0
    assert sup_norm_diff(a) == pytest.approx(0.7)
    s = Sample(sample_uniform(1, 2, 30), 2)
    e = estimate_density(s, KernelSpec(2, 1), grid)
    north = grid.mask(lambda p: p[:, 2] >= 0)
    assert sup_norm_diff(e, a, north) <= sup_norm_diff(e, a)
    other = FieldOnGrid(build_eval_grid(2, 0), np.zeros(len(build_eval_grid(2, 0))))
    with pytest.raises(InvalidInputError):
        sup_norm_diff(a, other)
    with pytest.raises(InvalidInputError):
        FieldOnGrid(grid, np.zeros(3))


def test_plugin_sup_bound():
    n = 5000
    # the plug-in runs on the second half of a split sample, so j_max comes from n/2
    j = jmax_default(n // 2, 2)
    grid = build_eval_grid(2, j)
    s = Sample(sample_uniform(8, 2, n), 2)
    assert plugin_sup_bound(s, 2, j, grid) == pytest.approx(1 / (4 * math.pi), rel=0.2)
    # at j_max(n) = 3 the grid sup of the noise pushes the plug-in about a third higher
    j3 = jmax_default(n, 2)
    over = plugin_sup_bound(s, 2, j3, build_eval_grid(2, j3)) * 4 * math.pi
    assert j3 == 3 and 1.2 < over < 1.5
    one = Sample(north_pole(2)[None, :], 2)
    assert plugin_sup_bound(one, 2, j, grid) == pytest.approx(kernel_Aj(KernelSpec(2, j), 1.0), rel=0.01)
    flat = Sample(sample_uniform(8, 2, 3), 2)
    assert plugin_sup_bound(flat, 2, 0, build_eval_grid(2, 0)) == pytest.approx(1 / (4 * math.pi))


def test_field_csv(tmp_path):
    grid = build_eval_grid(1, 0)
    f = FieldOnGrid(grid, np.arange(len(grid), dtype=float))
    f.to_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "x,y,value" and len(lines) == len(grid) + 1
