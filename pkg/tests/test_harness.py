import hashlib
import json
import os

import numpy as np
import pytest

from anosovlab.cli import main
from anosovlab.harness import ConfigError, ExperimentConfig, run_experiment
from anosovlab.presets import list_presets, preset_config


MIX_SMALL = """\
[mix]
seed = 11
n = 2000
nu = 0.01
times = 0 0.4
w_radius = 0.15
theta_halfwidth = 0.2
"""


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="mix.seed"):
        ExperimentConfig.from_text("[mix]\nn = 10\n")


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match="mix.n_particles"):
        ExperimentConfig.from_text("[mix]\nseed = 1\nn_particles = 5\n")


def test_negative_nu_names_field():
    with pytest.raises(ConfigError, match="decay.nu_list"):
        ExperimentConfig.from_text(
            "[decay]\nseed = 1\nnu_list = 0.01 -0.001\nubar = 0.02\n")


def test_out_of_bounds_value_names_field():
    with pytest.raises(ConfigError, match="spectrum.eps"):
        ExperimentConfig.from_text("[spectrum]\nseed = 1\neps = 0.2\n")


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown experiment kind"):
        ExperimentConfig.from_text("[warp]\nseed = 1\n")


def test_exactly_one_section():
    with pytest.raises(ConfigError, match="exactly one section"):
        ExperimentConfig.from_text("[mix]\nseed = 1\n[decay]\nseed = 2\n")


def test_unparseable_number_reports_key():
    with pytest.raises(ConfigError, match="mix.nu"):
        ExperimentConfig.from_text("[mix]\nseed = 1\nnu = fast\n")


def test_overrides_apply():
    cfg = ExperimentConfig.from_text(
        MIX_SMALL, overrides={"seed": 99, "out": "elsewhere", "workers": 3})
    assert cfg.seed == 99
    assert cfg.out_dir == "elsewhere"
    assert cfg.workers == 3


def test_every_preset_parses():
    names = [n for n, _ in list_presets()]
    assert "fig1" in names
    assert "theorem-sweep" in names
    for name in names:
        cfg = ExperimentConfig.from_text(preset_config(name))
        assert cfg.seed is not None


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def test_rerun_is_byte_identical(tmp_path):
    outs = []
    for sub in ("a", "b"):
        cfg = ExperimentConfig.from_text(
            MIX_SMALL, overrides={"out": str(tmp_path / sub)})
        run_experiment(cfg)
        outs.append(tmp_path / sub)
    names = sorted(os.listdir(outs[0]))
    assert names == sorted(os.listdir(outs[1]))
    for name in names:
        if name == "manifest.json":
            continue                      # carries wall time
        assert _digest(outs[0] / name) == _digest(outs[1] / name), name


def test_manifest_complete_and_digests_match(tmp_path):
    cfg = ExperimentConfig.from_text(
        MIX_SMALL, overrides={"out": str(tmp_path)})
    manifest = run_experiment(cfg)
    with open(tmp_path / "manifest.json") as fh:
        stored = json.load(fh)
    emitted = set(os.listdir(tmp_path)) - {"manifest.json"}
    assert set(stored["files"]) == emitted == set(manifest.files)
    for name, digest in stored["files"].items():
        assert _digest(tmp_path / name) == digest
    assert stored["config"]["seed"] == 11


def test_worker_count_does_not_change_outputs(tmp_path):
    digests = []
    for w, sub in ((1, "w1"), (3, "w3")):
        cfg = ExperimentConfig.from_text(
            MIX_SMALL, overrides={"out": str(tmp_path / sub), "workers": w})
        manifest = run_experiment(cfg)
        digests.append(manifest.files)
    assert digests[0] == digests[1]


def test_csv_single_header_and_17_digits(tmp_path):
    cfg = ExperimentConfig.from_text(
        "[spectrum]\nseed = 5\nmode = diffusion\nnu_list = 0.1\n"
        "n_modes = 4\ntimes = 0 2\n", overrides={"out": str(tmp_path)})
    run_experiment(cfg)
    lines = (tmp_path / "gaps.csv").read_text().splitlines()
    assert lines[0] == "nu,gap,N,converged"
    assert all("," in l and not l.startswith("nu") for l in lines[1:])
    nu_field = lines[1].split(",")[0]
    assert nu_field == "%.17g" % 0.1      # full precision round trip
    assert float(lines[1].split(",")[1]) == pytest.approx(
        4 * np.pi ** 2 * 0.1, rel=1e-12)


def test_cli_presets_lists_names(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "fig1" in out and "theorem-sweep" in out


def test_cli_missing_config_is_config_error(capsys):
    assert main(["mix", "--config", "/no/such/file.ini"]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_subcommand_must_match_section(tmp_path, capsys):
    p = tmp_path / "c.ini"
    p.write_text(MIX_SMALL)
    assert main(["decay", "--config", str(p)]) == 2
    assert "does not match" in capsys.readouterr().err


def test_cli_engine_error_exit_code(tmp_path, capsys):
    p = tmp_path / "c.ini"
    # parses fine, but the contour segment sits right of the spectrum
    p.write_text("[contour]\nseed = 3\ncases = diag2\nbeta = 3.0\n"
                 "t = 1.0\nnu = 0.05\n")
    assert main(["contour", "--config", str(p),
                 "--out", str(tmp_path / "o")]) == 3
    assert "engine error" in capsys.readouterr().err


def test_cli_runs_preset_by_name(tmp_path, capsys):
    rc = main(["contour", "--config", "contour-check",
               "--out", str(tmp_path), "--seed", "662607"])
    assert rc == 0
    assert (tmp_path / "summary.csv").exists()
    rows = (tmp_path / "summary.csv").read_text().splitlines()
    assert len(rows) == 4                 # header + three cases
    for row in rows[1:]:
        assert float(row.split(",")[4]) < 1e-6


def test_cli_seed_override_changes_output(tmp_path):
    base = {}
    for seed, sub in (("11", "a"), ("12", "b")):
        rc = main(["mix", "--config", "-", "--out", str(tmp_path / sub)])
        # '-' is not a file or preset: expect config error for this probe
        assert rc == 2
        p = tmp_path / ("c%s.ini" % seed)
        p.write_text(MIX_SMALL)
        rc = main(["mix", "--config", str(p), "--out", str(tmp_path / sub),
                   "--seed", seed])
        assert rc == 0
        base[sub] = _digest(tmp_path / sub / "snapshot_t0.csv")
    assert base["a"] != base["b"]
