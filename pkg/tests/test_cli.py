"""CLI pipelines: config validation, determinism, strict exit codes."""

import json

import pytest

from pathgibbs.cli import main, validate_config, ConfigError, DEFAULTS


def write_config(path, **overrides):
    cfg = {"run": {"seed": 7}}
    for dotted, value in overrides.items():
        section, key = dotted.split(".")
        cfg.setdefault(section, {})[key] = value
    path.write_text(json.dumps(cfg))
    return path


def run_cli(tmp_path, command, config, *flags):
    out = tmp_path / "out"
    code = main([command, "--config", str(config), "--out", str(out), *flags])
    return code, out


def load_summary(out, command):
    return json.loads((out / f"{command.replace('-', '_')}.json").read_text())


# ---------------------------------------------------------------------------
# config validation


def test_defaults_resolve_and_embed():
    cfg = validate_config({"run": {"seed": 3}})
    assert cfg["model"]["v"] == "harmonic"
    assert cfg["run"]["seed"] == 3
    assert cfg["grid"]["points"] == DEFAULTS["grid"]["points"]


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="run.seed"):
        validate_config({})


def test_unknown_field_path_reported():
    with pytest.raises(ConfigError, match="grid.cells"):
        validate_config({"run": {"seed": 1}, "grid": {"cells": 100}})
    with pytest.raises(ConfigError, match="extras"):
        validate_config({"run": {"seed": 1}, "extras": {}})


def test_catalog_names_checked():
    with pytest.raises(ConfigError, match="model.v"):
        validate_config({"run": {"seed": 1}, "model": {"v": "quartic"}})
    with pytest.raises(ConfigError, match="model.w"):
        validate_config({"run": {"seed": 1}, "model": {"w": "yukawa"}})


def test_type_errors_name_the_field():
    with pytest.raises(ConfigError, match="grid.dt"):
        validate_config({"run": {"seed": 1}, "grid": {"dt": "fast"}})
    with pytest.raises(ConfigError, match="diagnostics.t_ladder"):
        validate_config({"run": {"seed": 1}, "diagnostics": {"t_ladder": []}})


def test_bad_config_file_exits_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["conditions", "--config", str(missing)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["conditions", "--config", str(bad)]) == 2
    unseeded = tmp_path / "unseeded.json"
    unseeded.write_text("{}")
    assert main(["conditions", "--config", str(unseeded)]) == 2
    assert "run.seed" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# subcommand pipelines


def test_solve_ground_state_harmonic(tmp_path):
    config = write_config(tmp_path / "cfg.json", **{"output.formats": ["json", "csv"]})
    code, out = run_cli(tmp_path, "solve-ground-state", config, "--strict")
    assert code == 0
    summary = load_summary(out, "solve-ground-state")
    assert abs(summary["energy"] - 0.5) < 1e-3
    assert summary["config"]["run"]["seed"] == 7
    table = (out / "ground_state.csv").read_text().splitlines()
    assert table[0].startswith("# config=")
    assert table[1] == "x,psi"


def test_solve_ground_state_radial(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **{"model.v": "coulomb3d", "model.dim": 3})
    code, out = run_cli(tmp_path, "solve-ground-state", config, "--strict")
    assert code == 0
    summary = load_summary(out, "solve-ground-state")
    assert abs(summary["energy"] + 0.5) < 1e-3
    assert summary["radial"] is True


def test_sample_zero_interaction_strict_passes(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **{"run.sweeps": 1500, "run.burnin": 100,
                             "run.chains": 32, "run.seed": 11,
                             "grid.t_half": 1.0,
                             "output.formats": ["json", "csv", "jsonl"]})
    code, out = run_cli(tmp_path, "sample", config, "--strict")
    assert code == 0
    summary = load_summary(out, "sample")
    assert summary["stationary_ks"] < 0.01
    names = {c["name"]: c["passed"] for c in summary["checks"]}
    assert names["stationary-ks"] and names["acceptance-positive"]
    lines = (out / "sample_paths.jsonl").read_text().splitlines()
    assert "config" in json.loads(lines[0])
    rec = json.loads(lines[1])
    assert len(rec["positions"]) == len(rec["time_indices"])


def small_instance(extra=None):
    cfg = {"model.w": "nelson", "model.coupling": 0.5,
           "grid.lower": -2.0, "grid.upper": 2.0, "grid.points": 5,
           "grid.dt": 0.5, "grid.t_half": 1.0, "grid.s_half": 0.5}
    if extra:
        cfg.update(extra)
    return cfg


def test_oracle_compare_strict_passes(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **small_instance({"run.sweeps": 2000, "run.burnin": 200,
                                            "run.chains": 32, "run.seed": 5}))
    code, out = run_cli(tmp_path, "oracle-compare", config, "--strict")
    assert code == 0
    summary = load_summary(out, "oracle-compare")
    assert summary["tv_max"] < 0.02
    assert len(summary["tv_per_slice"]) == 5


def test_dlr_test_strict_passes(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **small_instance({"grid.t_half": 1.5, "grid.s_half": 1.0}))
    code, out = run_cli(tmp_path, "dlr-test", config, "--strict")
    assert code == 0
    summary = load_summary(out, "dlr-test")
    assert summary["tv_vs_brute_force"] < 1e-10
    assert summary["max_log_ratio_to_bridge"] <= 2 * summary["frame_bound"] + 1e-9


def test_energy_check_strict_passes(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **{"model.w": "nelson", "model.coupling": 1.0,
                             "grid.t_half": 2.0, "run.seed": 9})
    code, out = run_cli(tmp_path, "energy-check", config, "--strict")
    assert code == 0
    summary = load_summary(out, "energy-check")
    assert summary["fold_identity_max_gap"] <= 1e-9
    assert summary["constant_identity_max_gap"] <= 1e-10
    assert summary["strip_violations"] == 0


def test_diagnose_ratio_and_window(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **small_instance({
                              "diagnostics.reports": ["ratio", "window"],
                              "diagnostics.t_ladder": [0.5, 1.0, 1.5],
                              "diagnostics.ratio_radius": 1.5}))
    code, out = run_cli(tmp_path, "diagnose", config, "--strict")
    assert code == 0
    summary = load_summary(out, "diagnose")
    assert summary["window"]["route"] == "exact"
    tvs = [d["tv"] for d in summary["window"]["distances"]]
    assert tvs[0] > tvs[1]
    assert summary["ratio"]["bounded"]
    assert len(summary["ratio"]["m_hats"]) == 3


def test_conditions_nelson_monotone_holds(tmp_path):
    import math
    config = write_config(tmp_path / "cfg.json",
                          **{"model.w": "nelson", "model.coupling": 1.0})
    code, out = run_cli(tmp_path, "conditions", config, "--strict")
    assert code == 0
    summary = load_summary(out, "conditions")
    assert abs(summary["interaction_budget"] - math.pi) < 1e-8
    assert summary["monotone"] is True
    assert summary["sufficient_condition_holds"] is True
    assert summary["alpha"] == "inf"


def test_strict_failure_exits_1(tmp_path, capsys):
    config = write_config(tmp_path / "cfg.json",
                          **{"model.w": "step", "model.coupling": 1.0})
    code, out = run_cli(tmp_path, "conditions", config, "--strict")
    assert code == 1
    assert "failed check" in capsys.readouterr().err
    # without --strict the failure is reported but the exit code stays 0
    code, out = run_cli(tmp_path, "conditions", config)
    assert code == 0
    summary = load_summary(out, "conditions")
    assert summary["monotone"] is False


def test_domain_errors_exit_2(tmp_path, capsys):
    # an s_half off the time grid surfaces as a config-style error
    config = write_config(tmp_path / "cfg.json",
                          **small_instance({"grid.s_half": 0.3}))
    code, _ = run_cli(tmp_path, "dlr-test", config)
    assert code == 2
    assert "window" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# determinism and output routing


def test_sample_byte_identical_reruns(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **small_instance({"run.sweeps": 300, "run.chains": 4,
                                            "run.seed": 13,
                                            "output.formats": ["json", "jsonl"]}))
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["sample", "--config", str(config), "--out", str(out_a)]) == 0
    assert main(["sample", "--config", str(config), "--out", str(out_b)]) == 0
    assert (out_a / "sample.json").read_bytes() == (out_b / "sample.json").read_bytes()
    assert (out_a / "sample_paths.jsonl").read_bytes() == \
        (out_b / "sample_paths.jsonl").read_bytes()


def test_outdir_env_and_flag_precedence(tmp_path, monkeypatch):
    config = write_config(tmp_path / "cfg.json")
    env_dir = tmp_path / "from-env"
    monkeypatch.setenv("PATHGIBBS_OUTDIR", str(env_dir))
    assert main(["conditions", "--config", str(config)]) == 0
    assert (env_dir / "conditions.json").exists()
    flag_dir = tmp_path / "from-flag"
    assert main(["conditions", "--config", str(config),
                 "--out", str(flag_dir)]) == 0
    assert (flag_dir / "conditions.json").exists()


def test_config_embedded_in_every_output(tmp_path):
    config = write_config(tmp_path / "cfg.json",
                          **{"output.formats": ["json", "csv"]})
    code, out = run_cli(tmp_path, "solve-ground-state", config)
    assert code == 0
    summary = load_summary(out, "solve-ground-state")
    assert summary["config"]["grid"]["points"] == 801
    first = (out / "ground_state.csv").read_text().splitlines()[0]
    embedded = json.loads(first[len("# config="):])
    assert embedded["grid"]["points"] == 801
