import csv
import json

import pytest

from singular_elliptic.cli import (BUILTINS, ScenarioConfig, config_from_dict, main,
                                   parse_config, run_scenario, sweep)
from singular_elliptic.errors import ConfigError


def write(tmp_path, d, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return p


def test_minimal_classify_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {"scenario": "Classify"}))
    assert isinstance(cfg, ScenarioConfig)
    assert cfg.nonlinearity == ["power:q=3"] and cfg.N == 2 and cfg.alpha == [2.0]
    assert cfg.output == "out" and cfg.seed == 0 and not cfg.is_sweep


def test_alpha_type_mismatch(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config(write(tmp_path, {"scenario": "Classify", "params": {"alpha": "two"}}))
    assert exc.value.key == ".params.alpha"


def test_missing_file(tmp_path):
    with pytest.raises(IOError):
        parse_config(tmp_path / "nope.json")


@pytest.mark.parametrize("d, key", [
    ({"scenario": "Classify", "colour": 1}, ".colour"),
    ({"scenario": "Classify", "params": {"beta": 1}}, ".params.beta"),
    ({"scenario": "Classify", "grid": {"resolution": 8}}, ".grid.resolution"),
    ({"scenario": "Barrier", "options": {"q": 1}}, ".options.q"),
    ({"scenario": "Classify", "solver": {"tolerance": 1}}, ".solver.tolerance"),
    ({"scenario": "Heat"}, ".scenario"),
    ({"scenario": "Classify", "nonlinearity": "cosh"}, ".nonlinearity"),
])
def test_config_errors_name_key(d, key):
    with pytest.raises(ConfigError) as exc:
        config_from_dict(d)
    assert exc.value.key == key


def test_empty_range():
    with pytest.raises(ConfigError):
        config_from_dict({"scenario": "Classify", "params": {"alpha": []}})
    with pytest.raises(ConfigError):
        config_from_dict({"scenario": "Classify",
                          "params": {"alpha": {"start": 1, "stop": 2, "num": 0}}})


def test_sweep_cardinality(tmp_path):
    cfg = config_from_dict({"scenario": "Classify", "nonlinearity": "builtins",
                            "params": {"alpha": {"start": 0.5, "stop": 2.0, "num": 4}}})
    reports = sweep(cfg, threads=3, out_dir=tmp_path)
    assert len(reports) == 3 * 4
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert [r["nonlinearity"] for r in rows[::4]] == list(BUILTINS)


def test_classify_truth_table(tmp_path):
    cfg = config_from_dict({"scenario": "Classify", "nonlinearity": "builtins",
                            "params": {"alpha": [0.5, 1, 1.5, 2]}})
    sweep(cfg, out_dir=tmp_path)
    for r in csv.DictReader(open(tmp_path / "sweep.csv")):
        assert r["verdict"] == ("Holds" if float(r["alpha"]) > 1 else "Fails")


def test_exit_policy(tmp_path):
    # alpha = N-1 is a Fails cell: plain runs exit 0, strict runs do not
    p = write(tmp_path, {"scenario": "Classify", "params": {"alpha": [1.0, 2.0]}})
    assert main(["run", str(p), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", str(p), "--out", str(tmp_path / "b"), "--strict-exit"]) != 0
    rows = list(csv.DictReader(open(tmp_path / "a" / "sweep.csv")))
    assert rows[0]["verdict"] == "Fails" and rows[1]["verdict"] == "Holds"


def test_config_error_exit(tmp_path, capsys):
    p = write(tmp_path, {"scenario": "Classify", "params": {"alpha": "two"}})
    assert main(["run", str(p)]) != 0
    assert ".params.alpha" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) != 0


def test_module_error_embedded(tmp_path):
    # linear h has no KO envelope: the error lands in the report, exit nonzero
    cfg = config_from_dict({"scenario": "Envelope", "nonlinearity": "linear"})
    rep = run_scenario(cfg, tmp_path)
    assert not rep.passed and "DivergentEnvelope" in rep.error
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["error"] == rep.error and saved["passed"] is False
    p = write(tmp_path, {"scenario": "Envelope", "nonlinearity": "linear"}, "lin.json")
    assert main(["run", str(p), "--out", str(tmp_path / "x")]) == 1


def test_manifest_and_determinism(tmp_path):
    cfg = config_from_dict({"scenario": "Profile"})
    r1 = run_scenario(cfg, tmp_path / "one")
    r2 = run_scenario(cfg, tmp_path / "two")
    assert r1.passed and r1.manifest == ["profile.csv", "refinement.csv"]
    for name in r1.manifest:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_stability_scenario(tmp_path):
    cfg = config_from_dict({"scenario": "Stability", "grid": {"resolution": 128},
                            "options": {"eps0": 0.2, "halvings": 2}})
    rep = run_scenario(cfg, tmp_path)
    assert rep.passed
    rows = list(csv.DictReader(open(tmp_path / "stability.csv")))
    l1 = [float(r["l1"]) for r in rows]
    assert l1[1] < l1[0]


def test_vss_scenario_has_table(tmp_path):
    cfg = config_from_dict({"scenario": "VSSCompare", "grid": {"resolution": 128}})
    rep = run_scenario(cfg, tmp_path)
    rows = list(csv.DictReader(open(tmp_path / "vss_deviation.csv")))
    assert [float(r["radius"]) for r in rows] == [0.2, 0.15, 0.1]
    assert "vss_table.csv" in rep.manifest
    assert rep.data["deviation"]["deviations"] == [float(r["deviation"]) for r in rows]


def test_classify_command(capsys):
    assert main(["classify", "--nl", "power:q=3", "--N", "2", "--alpha", "2"]) == 0
    out = capsys.readouterr().out
    assert "SubcriticalClassifier  Holds" in out
    assert main(["classify", "--nl", "power:q=3", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["condition"] == "Structural"
