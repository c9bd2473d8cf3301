"""Command-line runner: config handling, artifacts, determinism, exits."""

import json
import os

import pytest

from fvspine import cli


def _report(root, experiment, seed=0):
    path = os.path.join(root, experiment, f"seed-{seed}", "report.json")
    with open(path) as f:
        return json.load(f)


def _csv_bytes(root, experiment, seed=0):
    path = os.path.join(root, experiment, f"seed-{seed}", "results.csv")
    with open(path, "rb") as f:
        return f.read()


def test_registry_consistent():
    assert set(cli.RUNNERS) == set(cli.PARAMS)
    assert set(cli.RUNNERS) == set(cli.COLUMNS)
    assert set(cli.RUNNERS) == set(cli.HELP)
    # replicas is a parameter of every experiment
    for name, params in cli.PARAMS.items():
        assert "replicas" in {p.name for p in params}, name


def test_missing_config_no_artifacts(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["run", "--config", str(tmp_path / "nope.toml")])
    assert code == 1
    assert not out.exists()


def test_config_rejects_unknown_section(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[frobnicate]\nx = 1\n")
    assert cli.main(["run", "--config", str(p)]) == 1


def test_config_rejects_unknown_key(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[kappa]\nnope = 3\n")
    assert cli.main(["kappa", "--config", str(p)]) == 1


def test_config_rejects_bad_syntax(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("not toml ][\n")
    assert cli.main(["run", "--config", str(p)]) == 1


def test_config_rejects_top_level_scalar(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("seed = 1\n")
    assert cli.main(["run", "--config", str(p)]) == 1


def test_run_needs_experiment_name(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[common]\nseed = 1\n")
    assert cli.main(["run", "--config", str(p)]) == 1


@pytest.mark.parametrize("argv", [
    ["kappa", "--u-max", "0"],
    ["kappa", "--replicas", "0"],
    ["gamma-root", "--replicas", "2"],
    ["bessel-drift", "--u-max", "700"],
    ["discriminate", "--window", "10,5"],
    ["discriminate", "--replicas", "4", "--folds", "9"],
    ["skeleton-tail", "--t-grid", "2,1"],
    ["skeleton-tail", "--barrier", "5"],
    ["bessel-min", "--ks-n", "5"],
    ["fv-path", "--dt", "0.5"],
    ["kappa", "--bogus", "1"],
    ["xi-law", "--n", "notanumber"],
])
def test_invalid_config_exits_1(argv, tmp_path):
    assert cli.main(argv + ["--output-dir", str(tmp_path)]) == 1
    assert not any(tmp_path.iterdir())


def test_gamma_root_end_to_end(tmp_path):
    out = str(tmp_path)
    assert cli.main(["gamma-root", "--output-dir", out]) == 0
    rep = _report(out, "gamma-root")
    assert rep["schema_version"] == 1
    assert abs(rep["results"]["root"] - 1.0) < 1e-6
    assert rep["experiment"] == "gamma-root"
    assert rep["determinism_hash"]
    assert any(r["name"] == "root" and r["value"] == 1.0
               for r in rep["references"])
    lines = _csv_bytes(out, "gamma-root").decode().strip().split("\n")
    header = lines[0].split(",")
    assert header == list(cli.COLUMNS["gamma-root"])
    assert len(lines) == 2


def test_xi_law_small(tmp_path):
    out = str(tmp_path)
    assert cli.main(["xi-law", "--n", "2000", "--output-dir", out]) == 0
    rep = _report(out, "xi-law")
    assert rep["results"]["min_ks_p"] > 1e-3
    assert abs(rep["results"]["median_mean"] - 2 ** 0.5) < 0.1
    assert rep["config"]["n"] == 2000
    assert rep["seed_manifest"]["streams"] == 1


def test_worker_count_does_not_change_artifacts(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    base = ["kappa", "--u-max", "60", "--replicas", "3", "--seed", "5"]
    assert cli.main(base + ["--workers", "1", "--output-dir", a]) == 0
    assert cli.main(base + ["--workers", "2", "--output-dir", b]) == 0
    assert _csv_bytes(a, "kappa", 5) == _csv_bytes(b, "kappa", 5)
    ra, rb = _report(a, "kappa", 5), _report(b, "kappa", 5)
    assert ra["determinism_hash"] == rb["determinism_hash"]
    assert ra["csv_sha256"] == rb["csv_sha256"]


def test_rerun_idempotent(tmp_path):
    out = str(tmp_path)
    argv = ["bessel-tail", "--n", "5000", "--u-grid", "1,2",
            "--output-dir", out]
    assert cli.main(argv) == 0
    first = _csv_bytes(out, "bessel-tail")
    h1 = _report(out, "bessel-tail")["determinism_hash"]
    assert cli.main(argv) == 0
    assert _csv_bytes(out, "bessel-tail") == first
    assert _report(out, "bessel-tail")["determinism_hash"] == h1


def test_flags_override_config_file(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[common]\nexperiment = "kappa"\nseed = 3\n'
                 "[kappa]\nu_max = 80.0\nreplicas = 2\n")
    out = str(tmp_path / "out")
    assert cli.main(["kappa", "--config", str(p), "--u-max", "50",
                     "--output-dir", out]) == 0
    rep = _report(out, "kappa", 3)
    assert rep["config"]["u_max"] == 50.0
    assert rep["config"]["replicas"] == 2  # file value survives
    assert rep["config"]["seed"] == 3  # common section applies


def test_run_subcommand_uses_named_experiment(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[common]\nexperiment = "gamma-root"\n'
                 f'output_dir = "{tmp_path}/out"\n')
    assert cli.main(["run", "--config", str(p)]) == 0
    assert (tmp_path / "out" / "gamma-root" / "seed-0"
            / "results.csv").exists()


def test_output_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("FVSPINE_OUTPUT_DIR", str(tmp_path / "envout"))
    assert cli.main(["gamma-root"]) == 0
    assert (tmp_path / "envout" / "gamma-root" / "seed-0"
            / "report.json").exists()


def test_runtime_error_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    # output root is a regular file, so the artifact mkdir blows up after
    # config validation passed
    assert cli.main(["gamma-root", "--output-dir",
                     str(blocker / "sub")]) == 3


def test_hn_sn_end_to_end(tmp_path):
    out = str(tmp_path)
    assert cli.main(["hn-sn", "--replicas", "4", "--dt", "1e-3",
                     "--max-branches", "5", "--output-dir", out]) == 0
    rep = _report(out, "hn-sn")
    assert rep["results"]["violations"] == 0
    lines = _csv_bytes(out, "hn-sn").decode().strip().split("\n")
    assert lines[0] == "replica,n,t_n,h_n,s_n"
    # every replica reports at least the trivial level 0
    assert rep["results"]["reported_levels"] >= 4


def test_spine_drift_columns(tmp_path):
    out = str(tmp_path)
    assert cli.main(["spine-drift", "--u-max", "100",
                     "--checkpoint-stride", "10",
                     "--output-dir", out]) == 0
    lines = _csv_bytes(out, "spine-drift").decode().strip().split("\n")
    assert lines[0] == "replica,n,r_n,h_n,logJ_n,ratio_r,ratio_h"
    rep = _report(out, "spine-drift")
    names = {r["name"] for r in rep["references"]}
    assert {"ratio_r", "ratio_h_anchor"} <= names


def test_discriminate_small(tmp_path):
    out = str(tmp_path)
    assert cli.main(["discriminate", "--replicas", "6", "--window", "20,40",
                     "--ou-shard", "3", "--folds", "3",
                     "--output-dir", out]) == 0
    rep = _report(out, "discriminate")
    res = rep["results"]
    assert res["orientation"] in ("spine-above", "spine-below")
    assert 0.0 <= res["accuracy"] <= 1.0
    assert res["threshold"] == pytest.approx(
        (res["spine_mean"] + res["bessel_mean"]) / 2)
    lines = _csv_bytes(out, "discriminate").decode().strip().split("\n")
    assert len(lines) == 1 + 12  # header + 6 per class


def test_lil_small(tmp_path):
    out = str(tmp_path)
    assert cli.main(["lil", "--replicas", "2", "--dt", "1e-3",
                     "--t-max", "500", "--max-branches", "30",
                     "--output-dir", out]) == 0
    rep = _report(out, "lil")
    assert rep["results"]["band"] == [0.3, 1.5]
    assert "in_band" in rep["results"]


def test_bench_runs():
    assert cli.main(["bench", "--scale", "0.01"]) == 0


@pytest.mark.slow
def test_verify_all_quick_passes(capsys):
    code = cli.main(["verify-all", "--quick"])
    out = capsys.readouterr().out
    assert "criteria passed" in out
    assert code == 0
