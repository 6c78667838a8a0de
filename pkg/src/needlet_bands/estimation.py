"""Linear needlet density estimator and population projections on evaluation grids."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from needlet_bands.cubature import CubatureSet, function_coeffs
from needlet_bands.errors import InvalidInputError
from needlet_bands.harmonics import Coeffs, analyze, synthesize
from needlet_bands.kernels import KernelSpec
from needlet_bands.sphere import EvalGrid, as_array, surface_area


@dataclass(frozen=True, eq=False)
class Sample:
    points: np.ndarray
    d: int

    def __post_init__(self):
        pts = as_array(self.points)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidInputError("a sample needs at least one point")
        if pts.shape[1] != self.d + 1:
            raise InvalidInputError("sample points do not match the stated dimension")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def split(self, n1: int) -> tuple["Sample", "Sample"]:
        return Sample(self.points[:n1], self.d), Sample(self.points[n1:], self.d)


@dataclass(frozen=True, eq=False)
class FieldOnGrid:
    grid: EvalGrid
    values: np.ndarray

    def __post_init__(self):
        if np.shape(self.values) != (len(self.grid),):
            raise InvalidInputError("field length does not match its grid")

    def __sub__(self, other: "FieldOnGrid") -> "FieldOnGrid":
        _same_grid(self, other)
        return FieldOnGrid(self.grid, self.values - other.values)

    def sup(self, mask=None) -> float:
        v = np.abs(self.values)
        return float(v.max() if mask is None else v[mask].max())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ["x", "y"] if self.grid.d == 1 else ["x", "y", "z"]
            w.writerow(cols + ["value"])
            for p, v in zip(self.grid.points, self.values):
                w.writerow([repr(float(c)) for c in p] + [repr(float(v))])


def _same_grid(a: FieldOnGrid, b: FieldOnGrid) -> None:
    if a.grid is not b.grid and (
        a.grid.points.shape != b.grid.points.shape or not np.array_equal(a.grid.points, b.grid.points)
    ):
        raise InvalidInputError("fields live on different grids")


def empirical_coeffs(sample: Sample, kmax: int, signs=None) -> Coeffs:
    """Coefficients of ``(1/n) sum_i eps_i delta_{X_i}``; ``signs`` default to +1."""
    n = len(sample)
    if signs is None:
        w = None
    else:
        w = np.asarray(signs, dtype=float)
        if w.shape != (n,):
            raise InvalidInputError("need exactly one sign per sample point")
        w = w / n
    return analyze(sample.points, kmax, weights=w, d=sample.d)


def field_from_coeffs(coeffs: Coeffs, spec: KernelSpec, grid: EvalGrid) -> FieldOnGrid:
    return FieldOnGrid(grid, synthesize(coeffs, spec.a_weights(), grid))


def _check(sample_d: int, spec: KernelSpec, grid: EvalGrid) -> None:
    if sample_d != spec.d or grid.d != spec.d:
        raise InvalidInputError("sample, kernel and grid dimensions differ")


def estimate_density(sample: Sample, spec: KernelSpec, grid: EvalGrid) -> FieldOnGrid:
    """``y -> (1/n) sum_i A_j(<X_i, y>)`` on ``grid``."""
    _check(sample.d, spec, grid)
    if grid.design_level < spec.j:
        raise InvalidInputError("grid is too coarse for this resolution level")
    return field_from_coeffs(empirical_coeffs(sample, spec.kmax), spec, grid)


def population_projection(f, spec: KernelSpec, grid: EvalGrid, reference: CubatureSet | None = None) -> FieldOnGrid:
    """``A_j f`` on ``grid`` from a reference cubature of degree kmax + 32."""
    _check(spec.d, spec, grid)
    coeffs = function_coeffs(f, spec.d, spec.kmax, reference)
    return field_from_coeffs(coeffs, spec, grid)


def sup_norm_diff(a: FieldOnGrid, b: FieldOnGrid | None = None, mask=None) -> float:
    """Grid sup of ``|a - b|`` over the points selected by ``mask``."""
    if b is None:
        return a.sup(mask)
    _same_grid(a, b)
    return (a - b).sup(mask)


def plugin_sup_bound(sample: Sample, d: int, j_max: int, grid: EvalGrid, mode: str = "eig") -> float:
    """``max(sup f_n(j_max), 1/|S^d|)``; no density on S^d has a smaller sup."""
    est = estimate_density(sample, KernelSpec(d, j_max, mode), grid)
    return max(float(est.values.max()), 1.0 / surface_area(d))
