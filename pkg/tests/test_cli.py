import json
import os

import pytest

from tractdim.cli import (DEFAULTS, main, parse_config_file,
                          resolve_config)
from tractdim.tracts import ConfigError


def test_parse_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("""
# a comment
family = model
q = 2.0
p = 1.2   # inline comment
n_max = 2
""")
    vals = parse_config_file(cfg)
    assert vals == {"family": "model", "q": "2.0", "p": "1.2",
                    "n_max": "2"}


def test_parse_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 3\n")
    with pytest.raises(ConfigError):
        parse_config_file(cfg)


def test_flags_override_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 1.2\nseed = 5\n")

    class Args:
        config = str(cfg)
        p = 0.25
    for key in DEFAULTS:
        if not hasattr(Args, key):
            setattr(Args, key, None)
    resolved = resolve_config(Args)
    assert resolved["p"] == 0.25      # flag wins
    assert resolved["seed"] == 5      # file value survives


def test_missing_config_file_usage_error(tmp_path):
    rc = main(["growth", "--config", str(tmp_path / "nope.cfg"),
               "--out", str(tmp_path)])
    assert rc == 2


def test_unknown_subcommand_usage_error():
    assert main(["frobnicate"]) == 2


def test_verify_density_alpha_over_beta_precondition(tmp_path):
    rc = main(["verify", "density", "--corpus", "alpha-over-beta",
               "--out", str(tmp_path), "--seed", "1"])
    assert rc == 2


def test_boxcount_empty_scales_usage_error(tmp_path):
    rc = main(["boxcount", "--fixture", "plane", "--resolution", "64",
               "--scales", "", "--out", str(tmp_path), "--seed", "1"])
    assert rc == 2


def test_boxcount_fixture_outputs(tmp_path):
    rc = main(["boxcount", "--fixture", "line", "--resolution", "256",
               "--scales", "4,8,16,32", "--out", str(tmp_path),
               "--seed", "9"])
    assert rc == 0
    blob = json.loads((tmp_path / "boxcount-9.json").read_text())
    assert abs(blob["slope"] - 1.0) < 0.05
    assert (tmp_path / "boxcount-9.png").exists()


def test_boxcount_map_outputs(tmp_path):
    rc = main(["boxcount", "--resolution", "128",
               "--scales", "4,8,16,32", "--out", str(tmp_path),
               "--seed", "9"])
    assert rc == 0
    for name in ("boxcount-9.json", "boxcount-9.csv", "boxcount-9.png",
                 "escape-9.pgm", "escape-9.png"):
        assert (tmp_path / name).exists(), name
    blob = json.loads((tmp_path / "boxcount-9.json").read_text())
    assert "trend" in blob["label"]


def test_growth_outputs_and_exit(tmp_path):
    rc = main(["growth", "--grid-lo", "1", "--grid-hi", "30",
               "--grid-n", "200", "--out", str(tmp_path), "--seed", "3"])
    assert rc == 0
    assert (tmp_path / "growth-3.csv").exists()
    assert (tmp_path / "growth-3.png").exists()
    blob = json.loads((tmp_path / "growth-3.json").read_text())
    assert blob["x_epsilon"] == 1.0
    assert blob["mode_label"].startswith("scaled")
    assert blob["config"]["family"] == "exponential"


def test_goodset_outputs(tmp_path):
    rc = main(["goodset", "--family", "model", "--q", "2", "--p", "1.2",
               "--window-lo", "5", "--window-hi", "50",
               "--grid-n", "400", "--out", str(tmp_path), "--seed", "4"])
    assert rc == 0
    rows = (tmp_path / "goodset-4.csv").read_text().splitlines()
    assert rows[0] == "lo,hi"
    lo, hi = (float(v) for v in rows[1].split(","))
    assert lo == pytest.approx(32.0, abs=0.2)
    assert hi == pytest.approx(50.0, abs=0.2)


def test_offspring_command(tmp_path):
    rc = main(["offspring", "--out", str(tmp_path), "--seed", "2"])
    assert rc == 0
    blob = json.loads((tmp_path / "offspring-2.json").read_text())
    assert blob["m"] >= 1 and blob["verification"]["ok"]


def test_dimension_command_and_determinism(tmp_path):
    out = tmp_path / "run"
    rc = main(["dimension", "--out", str(out), "--seed", "42"])
    assert rc == 0
    first_json = (out / "dimension-42.json").read_bytes()
    first_csv = (out / "dimension-42.csv").read_bytes()
    rc = main(["dimension", "--out", str(out), "--seed", "42"])
    assert rc == 0
    assert (out / "dimension-42.json").read_bytes() == first_json
    assert (out / "dimension-42.csv").read_bytes() == first_csv
    blob = json.loads(first_json)
    assert blob["consistent"] is True
    assert abs(blob["lower"]["t"] - 1.8) < 0.15


def test_verify_levels_exit_zero(tmp_path):
    rc = main(["verify", "levels", "--out", str(tmp_path), "--seed", "1",
               "--no-figures"])
    assert rc == 0
    name = next(n for n in os.listdir(tmp_path) if n.startswith("verify"))
    blob = json.loads((tmp_path / name).read_text())
    assert blob["ok"] and blob["mass_conservation_error"] <= 1e-12
