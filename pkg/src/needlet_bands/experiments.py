"""Seeded replication engine and report emission for the experiment families."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import metadata

import numpy as np

from needlet_bands.bands import (BandConfig, build_band, compute_jmax, lepski_select, m_star, theoretical_jstar,
                                 v_n)
from needlet_bands.checks import empirical_constants_rows, frame_suite, reproduction_degree
from needlet_bands.concentration import SigmaModel, rademacher_signs, rademacher_sup, sigma_bar, sigma_R
from needlet_bands.config import ExperimentConfig
from needlet_bands.densities import (TestDensity, bias_at_pole, bias_sup, draw, is_even_integer,
                                     make_falpha_density, make_polynomial_density, make_uniform_density,
                                     measure_bias_constants, north_pole, pole_bias_cubature, u_k_closed,
                                     u_k_quadrature)
from needlet_bands.errors import ConfigError
from needlet_bands.estimation import Sample, empirical_coeffs, field_from_coeffs, plugin_sup_bound, population_projection
from needlet_bands.kernels import KernelSpec
from needlet_bands.sphere import build_eval_grid

SLACK = 0.05


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def rep_rng(seed: int, r: int) -> np.random.Generator:
    """Counter-based stream: replication ``r`` never depends on execution order."""
    return np.random.default_rng(np.random.SeedSequence([seed, r]))


def make_density(cfg: ExperimentConfig) -> TestDensity:
    if cfg.density == "uniform":
        return make_uniform_density(cfg.d)
    if cfg.density == "poly":
        return make_polynomial_density(cfg.poly_coeffs, cfg.d)
    return make_falpha_density(cfg.alpha, d=cfg.d)


@dataclass(frozen=True)
class PolarCap:
    """Geodesic cap around the north pole; picklable so workers can share it."""

    d: int
    radius: float

    def __call__(self, pts):
        return pts @ north_pole(self.d) >= math.cos(self.radius) - 1e-12


def omega_predicate(cfg: ExperimentConfig):
    return None if cfg.omega_radius is None else PolarCap(cfg.d, cfg.omega_radius)


def _masked_sup(values, mask) -> float:
    v = np.abs(values)
    return float(v.max() if mask is None else v[mask].max())


@dataclass
class ExperimentReport:
    """Per-replication records, a summary and provenance.

    ``summary`` is ``context`` plus statistics recomputed from the records by
    :func:`summarize`; the records alone determine the CSV bytes.
    """

    experiment: str
    records: list
    context: dict
    summary: dict
    provenance: dict = field(default_factory=dict)

    def records_csv(self) -> str:
        buf = io.StringIO()
        if not self.records:
            return ""
        keys = list(self.records[0])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for rec in self.records:
            w.writerow([_fmt(rec[k]) for k in keys])
        return buf.getvalue()

    def summary_json(self) -> str:
        payload = {"experiment": self.experiment, "summary": self.summary, "provenance": self.provenance}
        return json.dumps(_jsonable(payload), indent=2, sort_keys=True)

    def write(self, out_dir, stamp: str | None = None) -> tuple[str, str]:
        stamp = stamp or time.strftime("%Y%m%dT%H%M%S")
        os.makedirs(out_dir, exist_ok=True)
        base = f"{self.experiment}_seed{self.provenance.get('config', {}).get('seed', 0)}_{stamp}"
        rec_path = os.path.join(out_dir, base + "_records.csv")
        sum_path = os.path.join(out_dir, base + "_summary.json")
        with open(rec_path, "w", newline="") as fh:
            fh.write(self.records_csv())
        with open(sum_path, "w") as fh:
            fh.write(self.summary_json() + "\n")
        return rec_path, sum_path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


# ---------------------------------------------------------------- bands

def _band_context(cfg: ExperimentConfig, dens: TestDensity) -> dict:
    mode = cfg.scaling
    bcfg = BandConfig(kappa=cfg.kappa, u_n=cfg.u_n, x=cfg.x, omega=omega_predicate(cfg), mode=mode,
                      jmax_rule=cfg.jmax_rule, width=cfg.width, rademacher_draws=cfg.rademacher_draws).resolve(cfg.n)
    n1, n2 = bcfg.split
    top_guess = compute_jmax(n2, cfg.d) + bcfg.u_n
    truth_model = SigmaModel.build(cfg.d, dens.sup_bound, top_guess, mode)
    j_max = compute_jmax(n2, cfg.d, cfg.jmax_rule, truth_model, cfg.kappa)
    top = j_max + bcfg.u_n
    if top != top_guess:
        truth_model = SigmaModel.build(cfg.d, dens.sup_bound, top, mode)
    consts = empirical_constants_rows(cfg.d, range(top + 1), mode)
    ctx = {"n": cfg.n, "n1": n1, "n2": n2, "j_max": j_max, "u_n": bcfg.u_n, "kappa": cfg.kappa, "x": cfg.x,
           "mode": mode, "density": cfg.density, "d": cfg.d, "C_M": truth_model.C_M, "k2": truth_model.k2,
           "k1": [r["k1"] for r in consts], "c0": [r["c0"] for r in consts],
           "floor": 1.0 - math.exp(-cfg.x)}
    if dens.kind == "polynomial":
        degree = len(dens.coeffs) - 1
        big_j = next(j for j in range(64) if reproduction_degree(KernelSpec(cfg.d, j, mode)) >= degree)
        ctx["J"] = big_j
    if dens.kind == "falpha":
        t = dens.smoothness_t
        measured = measure_bias_constants(dens, cfg.bias_levels, mode)
        xk = cfg.kappa * math.log(n2)
        b2 = max(measured.b_upper, truth_model.sigma(n2, 0, xk))
        j_star = theoretical_jstar(t, b2, n2, j_max, truth_model, cfg.kappa)
        m = m_star(measured.b_lower, b2, t)
        vn, ind = v_n(n1, n2, j_max, j_star, bcfg.u_n, m, t, cfg.x, truth_model, cfg.kappa)
        size_level = j_star + bcfg.u_n + 1
        ctx.update({"t": t, "b_lower": measured.b_lower, "b_upper": measured.b_upper, "b2": b2,
                    "j_star": j_star, "m": m, "v_n": vn, "I_n": ind,
                    "floor": 1.0 - math.exp(-cfg.x) - vn,
                    "size_bound": 1.01 * truth_model.sigma(n1, size_level, cfg.x),
                    "size_floor": 1.0 - 2.0 * (j_max - j_star) * n2 ** (-cfg.kappa),
                    "envelope": [j_star - m, j_star + 1],
                    "selection_floor": 1.0 - 2.0 * max(j_max - m, 0) * n2 ** (-cfg.kappa)})
    return {"public": ctx, "bcfg": bcfg, "model": truth_model}


def _band_rep(task):
    cfg, ctx, r = task
    dens = make_density(cfg)
    bcfg, model, pub = ctx["bcfg"], ctx["model"], ctx["public"]
    n1, j_max, d = pub["n1"], pub["j_max"], cfg.d
    rng = rep_rng(cfg.seed, r)
    s1, s2 = Sample(draw(dens, rng, cfg.n), d).split(n1)
    lep_grid = build_eval_grid(d, j_max)
    f_hat = plugin_sup_bound(s2, d, j_max, lep_grid, bcfg.mode)
    m = model.with_f_sup(f_hat)
    sel = lepski_select(s2, bcfg, m, j_max, lep_grid)
    rec = {"rep": r, "seed": cfg.seed, "j_hat": sel.j_hat, "j_max": j_max, "f_sup_hat": f_hat}
    if cfg.experiment == "coverage":
        level = sel.j_hat + bcfg.u_n
        band = build_band(s1, sel.j_hat, bcfg, m, grid=build_eval_grid(d, level), j_max=j_max, rng=rng)
        dev = _masked_sup(dens(band.field.grid.points) - band.center, band.mask)
        rec.update({"level": level, "s_n": band.half_width, "sup_dev": dev, "covered": dev <= band.half_width})
        if "size_bound" in pub:
            rec["size_ok"] = band.half_width <= pub["size_bound"]
    return rec


def _summarize_bands(records, ctx) -> dict:
    reps = len(records)
    hist = Counter(r["j_hat"] for r in records)
    out = {"reps": reps, "j_hat_hist": {str(k): hist[k] for k in sorted(hist)},
           "j_hat_mode": max(sorted(hist), key=lambda k: hist[k]),
           "j_hat_zero_rate": hist.get(0, 0) / reps}
    verdicts = {}
    if "J" in ctx:
        rate = sum(hist.get(j, 0) for j in (ctx["J"] - 1, ctx["J"])) / reps
        out["j_hat_in_J_rate"] = rate
        verdicts["selection_J"] = rate >= 0.9
    if "envelope" in ctx:
        lo, hi = ctx["envelope"]
        rate = sum(1 for r in records if lo <= r["j_hat"] <= hi) / reps
        out["envelope_rate"] = rate
        verdicts["selection_envelope"] = rate >= ctx["selection_floor"] - SLACK
    if records and "covered" in records[0]:
        cov = sum(1 for r in records if r["covered"]) / reps
        out.update({"coverage": cov, "s_n_mean": sum(r["s_n"] for r in records) / reps,
                    "sup_dev_mean": sum(r["sup_dev"] for r in records) / reps})
        verdicts["coverage"] = cov >= ctx["floor"] - SLACK
        if "size_bound" in ctx:
            rate = sum(1 for r in records if r["size_ok"]) / reps
            out["size_rate"] = rate
            verdicts["size"] = rate >= ctx["size_floor"] - SLACK
    if ctx.get("density") == "uniform":
        verdicts["selection_zero"] = out["j_hat_zero_rate"] >= 0.95
    out["verdicts"] = verdicts
    return out


def _run_bands(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.density == "falpha" and cfg.d != 2:
        raise ConfigError("f_alpha experiments are implemented on S^2")
    dens = make_density(cfg)
    ctx = _band_context(cfg, dens)
    records = _map(_band_rep, [(cfg, ctx, r) for r in range(cfg.reps)], cfg.workers)
    return _report(cfg, records, ctx["public"])


def run_coverage(cfg: ExperimentConfig) -> ExperimentReport:
    return _run_bands(replace(cfg, experiment="coverage"))


def run_selection(cfg: ExperimentConfig) -> ExperimentReport:
    return _run_bands(replace(cfg, experiment="selection"))


# -------------------------------------------------------- concentration

def _conc_context(cfg: ExperimentConfig, dens: TestDensity) -> dict:
    mode = cfg.scaling
    spec = KernelSpec(cfg.d, cfg.level, mode)
    grid = build_eval_grid(cfg.d, cfg.level)
    pred = omega_predicate(cfg)
    mask = None if pred is None else grid.mask(pred)
    model = SigmaModel.build(cfg.d, dens.sup_bound, cfg.level, mode)
    p = model.params(cfg.n, cfg.level, cfg.x)
    pub = {"n": cfg.n, "level": cfg.level, "x": cfg.x, "mode": mode, "density": cfg.density, "d": cfg.d,
           "f_sup": dens.sup_bound, "c0": p.c0_l, "Z": p.Z_l, "C_M": p.C_M, "k2": p.k2, "D1": p.D1, "D2": p.D2,
           "sigma_bar": sigma_bar(p), "sigma": model.sigma(cfg.n, cfg.level, cfg.x),
           "e_minus_x": math.exp(-cfg.x)}
    truth = population_projection(dens, spec, grid).values
    return {"public": pub, "params": p, "truth": truth, "mask": mask, "spec": spec, "grid": grid}


def _conc_rep(task):
    cfg, ctx, r = task
    dens = make_density(cfg)
    rng = rep_rng(cfg.seed, r)
    sample = Sample(draw(dens, rng, cfg.n), cfg.d)
    spec, grid, mask = ctx["spec"], ctx["grid"], ctx["mask"]
    est = field_from_coeffs(empirical_coeffs(sample, spec.kmax), spec, grid).values
    dev = _masked_sup(est - ctx["truth"], mask)
    rn = float(np.mean([rademacher_sup(sample, rademacher_signs(rng, cfg.n), spec, grid, mask)
                        for _ in range(cfg.rademacher_draws)]))
    s_r = sigma_R(ctx["params"], rn)
    pub = ctx["public"]
    return {"rep": r, "seed": cfg.seed, "sup_dev": dev, "R_n": rn, "sigma_bar": pub["sigma_bar"], "sigma_R": s_r,
            "exceed_bar": dev >= pub["sigma_bar"], "exceed_R": dev >= s_r, "exceed_mono": dev >= pub["sigma"]}


def _summarize_conc(records, ctx) -> dict:
    reps = len(records)
    rate = {k: sum(1 for r in records if r[k]) / reps for k in ("exceed_bar", "exceed_R", "exceed_mono")}
    bound = ctx["e_minus_x"] + 0.04
    return {"reps": reps, "exceedance_bar": rate["exceed_bar"], "exceedance_R": rate["exceed_R"],
            "exceedance_mono": rate["exceed_mono"], "R_n_mean": sum(r["R_n"] for r in records) / reps,
            "sup_dev_mean": sum(r["sup_dev"] for r in records) / reps,
            "verdicts": {"sigma_bar": rate["exceed_bar"] <= bound, "sigma_R": rate["exceed_R"] <= bound}}


def run_concentration(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = replace(cfg, experiment="concentration")
    dens = make_density(cfg)
    ctx = _conc_context(cfg, dens)
    records = _map(_conc_rep, [(cfg, ctx, r) for r in range(cfg.reps)], cfg.workers)
    return _report(cfg, records, ctx["public"])


# ----------------------------------------------------------------- bias

def run_bias(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = replace(cfg, experiment="bias")
    mode = cfg.scaling
    records = []
    for alpha in cfg.alphas:
        for j in cfg.bias_levels:
            spec = KernelSpec(2, j, mode)
            bs = bias_sup(alpha, spec)
            bp = bias_at_pole(alpha, spec)
            pc = math.nan if is_even_integer(alpha) else pole_bias_cubature(alpha, spec)
            records.append({"alpha": alpha, "j": j, "bias_sup": bs, "bias_at_pole": bp,
                            "ratio": 2.0 ** (j * alpha) * bs, "pole_cubature": pc, "pole_err": abs(pc - bp)})
    uk = {}
    for alpha in cfg.alphas:
        if is_even_integer(alpha):
            continue
        errs = [abs(u_k_closed(k, alpha, 0.5) - u_k_quadrature(k, alpha, 0.5)) / abs(u_k_quadrature(k, alpha, 0.5))
                for k in range(65)]
        uk[str(alpha)] = max(errs)
    return _report(cfg, records, {"mode": mode, "levels": list(cfg.bias_levels), "u_k_max_rel_err": uk})


def _summarize_bias(records, ctx) -> dict:
    spreads, verdicts = {}, {}
    for alpha in sorted({r["alpha"] for r in records}):
        rows = [r for r in records if r["alpha"] == alpha]
        ratios = [r["ratio"] for r in rows]
        key = str(alpha)
        if max(ratios) <= 1e-9:
            spreads[key] = 0.0
            verdicts[f"zero_bias[{key}]"] = True
            continue
        spreads[key] = max(ratios) / min(ratios)
        verdicts[f"spread[{key}]"] = spreads[key] <= 4.0
        verdicts[f"sup_ge_pole[{key}]"] = all(r["bias_sup"] >= r["bias_at_pole"] * (1 - 1e-12) for r in rows)
        verdicts[f"pole_check[{key}]"] = max(r["pole_err"] for r in rows) <= 1e-7
    for key, err in ctx["u_k_max_rel_err"].items():
        verdicts[f"u_k[{key}]"] = err <= 1e-8
    return {"spread": spreads, "verdicts": verdicts}


# --------------------------------------------------------- frame checks

def run_frame_checks(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = replace(cfg, experiment="frame-checks")
    mode = cfg.scaling
    results = frame_suite(rep_rng(cfg.seed, 0), cfg.frame_levels, cfg.dims, mode)
    consts = {str(d): empirical_constants_rows(d, cfg.frame_levels, mode) for d in cfg.dims}
    return _report(cfg, [r.row() for r in results], {"mode": mode, "constants": consts})


def _summarize_frame(records, ctx) -> dict:
    failed = [f"{r['name']}[d={r['d']},j={r['level']}]" for r in records if not r["passed"]]
    return {"checks": len(records), "failures": failed, "verdicts": {"all_passed": not failed}}


# --------------------------------------------------------------- common

SUMMARIZERS = {"coverage": _summarize_bands, "selection": _summarize_bands, "concentration": _summarize_conc,
               "bias": _summarize_bias, "frame-checks": _summarize_frame}
RUNNERS = {"coverage": run_coverage, "selection": run_selection, "concentration": run_concentration,
           "bias": run_bias, "frame-checks": run_frame_checks}


def summarize(experiment: str, records, context: dict) -> dict:
    return {**context, **SUMMARIZERS[experiment](records, context)}


def _report(cfg: ExperimentConfig, records, context) -> ExperimentReport:
    prov = {"config": cfg.to_dict(), "code_version": code_version()}
    return ExperimentReport(cfg.experiment, records, context, summarize(cfg.experiment, records, context), prov)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[cfg.experiment](cfg)
