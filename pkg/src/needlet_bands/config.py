"""Experiment configuration: one JSON file, overridable from the command line."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace

from needlet_bands.errors import ConfigError
from needlet_bands.kernels import DEG, EIG, MODES

EXPERIMENTS = ("coverage", "selection", "concentration", "bias", "frame-checks")
DENSITIES = ("uniform", "poly", "falpha")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs.  ``mode=None`` picks deg for bias runs, eig otherwise.

    ``omega_radius`` restricts sups and coverage to the geodesic cap of that
    radius around the north pole; ``None`` means the whole sphere.
    """

    experiment: str = "coverage"
    d: int = 2
    density: str = "uniform"
    alpha: float = 1.5
    poly_coeffs: tuple = (1.0, -1.0)
    n: int = 4000
    reps: int = 100
    seed: int = 0
    kappa: float = 1.0
    x: float = 2.0
    u_n: int | None = None
    jmax_rule: str = "default"
    omega_radius: float | None = None
    mode: str | None = None
    level: int = 3
    width: str = "sigma"
    rademacher_draws: int = 1
    alphas: tuple = (0.5, 1.5)
    bias_levels: tuple = (3, 4, 5, 6, 7, 8)
    frame_levels: tuple = (0, 1, 2, 3, 4, 5, 6)
    dims: tuple = (1, 2)
    out: str = "results"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    @property
    def scaling(self) -> str:
        if self.mode is not None:
            return self.mode
        return DEG if self.experiment == "bias" else EIG

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.d not in (1, 2):
            raise ConfigError("d must be 1 or 2")
        if self.density not in DENSITIES:
            raise ConfigError(f"unknown density {self.density!r}")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if self.kappa <= 0 or self.x <= 0:
            raise ConfigError("kappa and x must be positive")
        if self.mode is not None and self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.jmax_rule not in ("default", "practical"):
            raise ConfigError("jmax_rule must be 'default' or 'practical'")
        if self.width not in ("sigma", "rademacher"):
            raise ConfigError("width must be 'sigma' or 'rademacher'")
        if self.u_n is not None and self.u_n < 0:
            raise ConfigError("u_n must be nonnegative")
        if self.omega_radius is not None and not 0 < self.omega_radius <= math.pi:
            raise ConfigError("omega_radius must lie in (0, pi]")
        if self.level < 0 or self.rademacher_draws < 1 or self.workers < 1:
            raise ConfigError("level, rademacher_draws and workers are out of range")
        if self.density == "falpha":
            if self.alpha <= 0 or (self.alpha / 2).is_integer():
                raise ConfigError("falpha needs alpha > 0 with alpha/2 not an integer")
            if self.d != 2 and self.experiment in ("coverage", "selection", "bias"):
                raise ConfigError("f_alpha experiments are implemented on S^2")
        if self.experiment == "bias" and self.d != 2:
            raise ConfigError("bias experiments run on S^2")

    def to_dict(self) -> dict:
        return asdict(self)


def _coerce(name: str, value):
    kind = {f.name: f for f in fields(ExperimentConfig)}[name].default
    if isinstance(kind, tuple) and isinstance(value, list):
        return tuple(value)
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    try:
        return ExperimentConfig(**{k: _coerce(k, v) for k, v in data.items()})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config (optional) and apply non-None overrides on top."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_dict(data)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)
