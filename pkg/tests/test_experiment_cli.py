import json
import math
import subprocess
import sys

import pytest

from fracconf import cli
from fracconf.errors import ConfigError, FracConfError, ParamError
from fracconf.experiment import (CountReport, PRESETS, emit_plot_data, load_config, resolve_config,
                                 run_experiment, scales_csv_text)


def _small_cfg(**over):
    cfg = {
        "name": "cantor-pairs",
        "construction": {"name": "cantor_line", "params": {}},
        "shape": {"kind": "chain", "gaps": [2 / 3]},
        "scales": {"vary": "depth", "values": [3, 4, 5, 6]},
        "tolerance": {"mode": "absolute", "delta": 1e-9},
        "bounds": [{"name": "chain_trivial_upper", "k": 1, "d": 2, "alpha": 0.63}],
        "margin": 0.1,
    }
    cfg.update(over)
    return cfg


def test_run_experiment_outputs(tmp_path):
    rep = run_experiment(_small_cfg(), out_dir=tmp_path)
    # x and x + 2/3 are both left endpoints exactly when x lies in the left third
    assert [c for _, c in rep.per_scale] == [8, 16, 32, 64]
    assert rep.fitted_exponent == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    assert rep.verdict == "consistent"
    lines = (tmp_path / "scales.csv").read_text().splitlines()
    assert lines[0] == "level,delta,n_points,count,log_count" and len(lines) == 5
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["config"]["seed"] == 0
    assert report["config"]["construction"]["params"]["ratio"] == pytest.approx(1 / 3)
    assert report["config"]["shape"]["shape_kind"] == "chain"


def test_config_errors_carry_field_path():
    cases = [
        ({"construction": {"name": "nope"}}, "construction.name"),
        ({"construction": {"name": "cantor_line", "params": {"bogus": 1}}}, "construction.params"),
        ({"construction": {"name": "cantor_line", "params": {"depth": "x"}}}, "construction.params.depth"),
        ({"metric": "taxicab"}, "metric"),
        ({"scales": {"vary": "nope", "values": [1]}}, "scales.vary"),
        ({"tolerance": {"mode": "fuzzy"}}, "tolerance.mode"),
        ({"bounds": [{"name": "nope"}]}, "bounds[0].name"),
        ({"counting": "lattice_identity"}, "counting"),
        ({"shape": {"kind": "hexagon"}}, "shape.kind"),
        ({"extra": 1}, "extra"),
    ]
    for over, field in cases:
        with pytest.raises(ConfigError) as e:
            resolve_config(_small_cfg(**over))
        assert e.value.field == field, (over, e.value)
        assert str(e.value).startswith(field)


def test_stage_tags():
    cfg = _small_cfg(construction={"name": "sphere_cantor", "params": {"alpha": 3.0}},
                     scales={"vary": "depth", "values": [2, 3, 4]})
    with pytest.raises(FracConfError) as e:
        run_experiment(cfg)
    assert e.value.stage == "construction" and str(e.value).startswith("[construction]")
    with pytest.raises(FracConfError) as e:
        run_experiment({"construction": {"name": "cantor_line"}})
    assert e.value.stage == "config"


def test_load_config_toml_and_json(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('name = "t"\nseed = 3\n[construction]\nname = "cantor_line"\n'
                    '[shape]\nkind = "chain"\ngaps = [1.0]\n[scales]\nvary = "depth"\nvalues = [3, 4, 5]\n')
    assert load_config(toml)["seed"] == 3
    js = tmp_path / "c.json"
    js.write_text(json.dumps(_small_cfg()))
    assert load_config(js)["name"] == "cantor-pairs"
    bad = tmp_path / "bad.toml"
    bad.write_text("name = ")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_emit_plot_data():
    rep = run_experiment(_small_cfg(scales={"vary": "depth", "values": [3, 4, 5]}))
    rows = emit_plot_data(rep).splitlines()
    assert rows[0] == "kind,log_inv_delta,log_count,fit"
    assert sum(r.startswith("data") for r in rows) == 3 and sum(r.startswith("fit") for r in rows) == 2
    for r in rows[1:]:
        _, x, _, f = r.split(",")
        assert abs(float(f) - (rep.fit.slope * float(x) + rep.fit.intercept)) < 1e-12
    with pytest.raises(ParamError):
        emit_plot_data(CountReport([], math.nan, math.nan, [], "inconclusive"))


def test_orthogonal_preset_counts_pattern_tuples(tmp_path):
    cfg = json.loads(json.dumps(PRESETS["orthogonal-chains"]))
    rep = run_experiment(cfg, out_dir=tmp_path)
    for row in rep.rows:
        assert row["count"] >= row["n_per_sphere"] ** 4
    cfg["counting"] = "pattern"
    rep = run_experiment(cfg)
    assert [r["count"] for r in rep.rows] == [n**4 for n in cfg["scales"]["values"]]
    assert rep.fitted_exponent == pytest.approx(4, abs=1e-9)


def test_scales_csv_deterministic():
    a = scales_csv_text(run_experiment(_small_cfg(seed=5)))
    b = scales_csv_text(run_experiment(_small_cfg(seed=5)))
    assert a == b


# ---------------------------------------------------------------- CLI


def test_cli_build_count_dimfit(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert cli.main(["build", "cantor_line", "--depth", "8", "--out", str(out)]) == 0
    capsys.readouterr()
    assert cli.main(["count", str(out), "--chain", "0.6666666666666666", "--check"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["count"] == res["brute_force"] == 256
    assert cli.main(["dimfit", str(out)]) == 0
    assert abs(json.loads(capsys.readouterr().out)["slope"] - math.log(2) / math.log(3)) < 0.05
    assert cli.main(["count", str(out), "--chain", "0.6666666666666666", "--pin", "1", "--pin-point", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 1


def test_cli_build_stdout(capsys):
    assert cli.main(["build", "valtr_lattice", "--m", "2"]) == 0
    text = capsys.readouterr().out.splitlines()
    assert text[0].startswith("# dim=2") and len(text) == 86


def test_cli_bounds(capsys):
    assert cli.main(["bounds", "--which", "chain_upper_u", "--k", "2", "--d", "2", "--alpha", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 4
    assert cli.main(["bounds", "--table", "--k", "1", "--d", "2", "--alpha", "1.5", "--tau", "0.5"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert {r["name"] for r in rows} >= {"valtr_lower", "tri_upper"}
    assert cli.main(["bounds", "--which", "tri_upper", "--d", "2", "--alpha", "5"]) == 1


def test_cli_audits(tmp_path, capsys):
    assert cli.main(["audit-phi", "--metric", "dot_product", "--samples", "10"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["min_abs_ma_det"] - 1) < 1e-4
    assert cli.main(["audit", "lattice-witness", "--q", "4,16,256"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["w"] == pytest.approx(1 / 16)
    out = tmp_path / "p.csv"
    cli.main(["build", "cantor_product", "--depth", "6", "--out", str(out)])
    capsys.readouterr()
    assert cli.main(["audit", "fubini", "--cloud", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["passes"] is True
    assert cli.main(["audit", "regularity", "--cloud", str(out), "--alpha", "1.26"]) == 0


def test_cli_experiment_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    ok = _small_cfg()
    cfg.write_text(json.dumps(ok))
    assert cli.main(["experiment", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "scales.csv").exists()
    bad = _small_cfg(bounds=[{"name": "chain_trivial_upper", "k": 1, "d": 2, "alpha": 0.63}], margin=0.0,
                     construction={"name": "unit_cube_grid", "params": {"d": 2}},
                     scales={"vary": "n", "values": [4, 8, 16]},
                     shape={"kind": "chain", "gaps": [0.5]})
    cfg.write_text(json.dumps(bad))
    assert cli.main(["experiment", str(cfg)]) == 2
    cfg.write_text(json.dumps({"construction": {"name": "nope"}}))
    assert cli.main(["experiment", str(cfg)]) == 1
    assert "construction.name" in capsys.readouterr().err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fracconf", "bounds", "--which", "beta_sobolev", "--d", "2",
                        "--alpha", "1"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["value"] == 1.5
