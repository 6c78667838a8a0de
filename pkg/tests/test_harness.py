import json
import math
import os

import pytest

from needlet_bands import cli
from needlet_bands.config import ExperimentConfig, config_from_dict, load_config, with_overrides
from needlet_bands.errors import ConfigError
from needlet_bands.experiments import ExperimentReport, PolarCap, rep_rng, run_experiment, summarize

SMALL = {
    "coverage": dict(n=600, reps=4),
    "selection": dict(n=600, reps=4, density="poly"),
    "concentration": dict(n=400, reps=4, level=2),
    "bias": dict(bias_levels=(3, 4), alphas=(0.5, 1.5, 2.0)),
}


@pytest.mark.parametrize("bad", [dict(reps=0), dict(n=3), dict(d=3), dict(density="gauss"), dict(experiment="x"),
                                 dict(density="falpha", alpha=2.0), dict(mode="other"), dict(kappa=0.0),
                                 dict(omega_radius=4.0), dict(experiment="bias", d=1), dict(u_n=-1)])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad)


def test_config_json_and_overrides(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n": 900, "alphas": [0.5], "seed": 4}))
    cfg = load_config(path, {"seed": 7, "reps": None})
    assert cfg.n == 900 and cfg.seed == 7 and cfg.reps == ExperimentConfig().reps
    assert cfg.alphas == (0.5,)
    with pytest.raises(ConfigError):
        config_from_dict({"nope": 1})
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    assert with_overrides(cfg, n=1000).n == 1000


def test_scaling_defaults():
    assert ExperimentConfig(experiment="bias").scaling == "deg"
    assert ExperimentConfig(experiment="coverage").scaling == "eig"
    assert ExperimentConfig(experiment="bias", mode="eig").scaling == "eig"


def test_rep_rng_is_counter_based():
    a = rep_rng(3, 5).integers(1 << 30, size=4)
    assert (a == rep_rng(3, 5).integers(1 << 30, size=4)).all()
    assert not (a == rep_rng(3, 6).integers(1 << 30, size=4)).all()


def test_polar_cap():
    import numpy as np
    cap = PolarCap(2, math.pi / 2)
    pts = np.array([[0, 0, 1.0], [1.0, 0, 0], [0, 0, -1.0]])
    assert cap(pts).tolist() == [True, True, False]


@pytest.mark.parametrize("experiment", sorted(SMALL))
def test_determinism_and_summary_recompute(experiment):
    cfg = ExperimentConfig(experiment=experiment, seed=3, **SMALL[experiment])
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.records_csv() == b.records_csv()
    assert a.summary_json() == b.summary_json()
    assert summarize(experiment, a.records, a.context) == a.summary
    assert a.provenance["config"]["seed"] == 3 and a.provenance["code_version"]
    assert "verdicts" in a.summary


def test_workers_do_not_change_records():
    cfg = ExperimentConfig(experiment="coverage", seed=1, **SMALL["coverage"])
    one = run_experiment(cfg)
    two = run_experiment(with_overrides(cfg, workers=2))
    assert one.records_csv() == two.records_csv()


def test_record_contents():
    rep = run_experiment(ExperimentConfig(experiment="coverage", seed=2, **SMALL["coverage"]))
    rec = rep.records[0]
    assert {"seed", "j_hat", "s_n", "sup_dev", "covered"} <= set(rec)
    assert rep.summary["coverage"] == sum(r["covered"] for r in rep.records) / len(rep.records)
    conc = run_experiment(ExperimentConfig(experiment="concentration", seed=2, **SMALL["concentration"]))
    assert {"sup_dev", "R_n", "sigma_bar", "sigma_R"} <= set(conc.records[0])


def test_output_files(tmp_path):
    rep = run_experiment(ExperimentConfig(experiment="bias", seed=5, **SMALL["bias"]))
    rec_path, sum_path = rep.write(tmp_path, "20260101T000000")
    assert os.path.basename(rec_path) == "bias_seed5_20260101T000000_records.csv"
    assert os.path.basename(sum_path) == "bias_seed5_20260101T000000_summary.json"
    payload = json.loads(open(sum_path).read())
    assert payload["experiment"] == "bias" and "summary" in payload
    assert open(rec_path).read() == rep.records_csv()


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert cli.main(["frame-checks", "--out", out, "--stamp", "s"]) == 0
    assert "PASS all_passed" in capsys.readouterr().out
    assert cli.main(["coverage", "--n", "3", "--out", out]) == 2
    assert cli.main(["nonsense"]) == 2
    assert cli.main(["coverage", "--density", "falpha", "--alpha", "2", "--out", out]) == 2
    assert cli.main(["bias", "--config", str(tmp_path / "missing.json"), "--out", out]) == 2


def test_cli_property_failure(tmp_path, monkeypatch):
    def failing(cfg):
        return ExperimentReport("frame-checks", [{"name": "x", "passed": False}], {},
                                {"verdicts": {"all_passed": False}}, {"config": cfg.to_dict()})
    monkeypatch.setattr(cli, "run_experiment", failing)
    assert cli.main(["frame-checks", "--out", str(tmp_path), "--stamp", "s"]) == 3


def test_cli_runs_bias_with_flags(tmp_path, capsys):
    cfg = tmp_path / "b.json"
    cfg.write_text(json.dumps({"bias_levels": [3, 4], "alphas": [1.5]}))
    assert cli.main(["bias", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path), "--stamp", "t"]) == 0
    assert (tmp_path / "bias_seed2_t_summary.json").exists()
