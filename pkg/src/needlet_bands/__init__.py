"""Adaptive sup-norm confidence bands for densities on S^1 and S^2 via needlet kernels."""
from needlet_bands.bands import Band, BandConfig, build_band, compute_jmax, lepski_select, m_star, theoretical_jstar, v_n
from needlet_bands.concentration import ConcentrationParams, SigmaModel, rademacher_sup, sigma_bar, sigma_mono, sigma_R
from needlet_bands.config import ExperimentConfig, load_config
from needlet_bands.cubature import CubatureSet, NeedletSystem, build_cubature, build_needlet_system, compute_c0
from needlet_bands.densities import (TestDensity, bias_at_pole, bias_sup, make_falpha_density,
                                     make_polynomial_density, make_uniform_density, sample_density, u_k_closed,
                                     u_k_quadrature)
from needlet_bands.errors import ConfigError, InvalidInputError
from needlet_bands.estimation import FieldOnGrid, Sample, estimate_density, population_projection, sup_norm_diff
from needlet_bands.experiments import (ExperimentReport, run_bias, run_concentration, run_coverage,
                                       run_experiment, run_frame_checks, run_selection)
from needlet_bands.kernels import KernelSpec, gegenbauer, kernel_Aj, kernel_Cj, kernel_Lk, window_a
from needlet_bands.sphere import EvalGrid, SpherePoint, build_eval_grid, geodesic_distance, make_point, sample_uniform

__version__ = "0.1.0"
