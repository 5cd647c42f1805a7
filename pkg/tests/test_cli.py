import json
import math
import os

import numpy as np
import pytest

from kerrcat.cli import main
from kerrcat.errors import SchemaViolation, UnknownScenario
from kerrcat.scenarios import (
    config_hash,
    criteria_coverage,
    get_scenario,
    list_scenarios,
    run_scenario,
    validate_overrides,
)


def test_registry_size_and_unique_ids():
    scenarios = list_scenarios()
    assert len(scenarios) >= 14
    ids = [s.id for s in scenarios]
    assert len(ids) == len(set(ids))


def test_every_criterion_covered_exactly_once():
    cover = criteria_coverage()
    for criterion in range(1, 13):
        assert cover.get(criterion) is not None, f"criterion {criterion} unreachable"
        assert len(cover[criterion]) == 1, f"criterion {criterion}: {cover[criterion]}"


def test_gate_scenario_ids_present():
    ids = {s.id for s in list_scenarios()}
    assert {"cx-lossless", "cx-thermal", "cx-overrot", "ccd-lossless", "ccd-thermal"} <= ids


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        get_scenario("not-a-scenario")
    with pytest.raises(UnknownScenario):
        run_scenario("not-a-scenario")


def test_override_validation():
    sc = get_scenario("gadget-threshold-scan")
    assert validate_overrides(sc, {}) == []
    diags = validate_overrides(sc, {"bogus": 1})
    assert diags and "bogus" in diags[0]
    diags = validate_overrides(sc, {"n_max": "many"})
    assert diags
    with pytest.raises(SchemaViolation):
        run_scenario("gadget-threshold-scan", overrides={"bogus": 1})


def test_config_hash_deterministic_and_normalized():
    h1 = config_hash({"a": 1, "b": [1.5, 2.5]})
    h2 = config_hash({"b": [1.5, 2.5], "a": 1})
    assert h1 == h2
    assert h1 != config_hash({"a": 2, "b": [1.5, 2.5]})


def test_run_scenario_writes_record_and_artifacts(tmp_path):
    rec = run_scenario(
        "magic-states", overrides={"ns": [3, 5]}, out_dir=str(tmp_path)
    )
    assert rec.scenario_id == "magic-states"
    record_path = tmp_path / "magic-states.record.json"
    assert record_path.exists()
    payload = json.loads(record_path.read_text())
    assert payload["config_hash"] == rec.config_hash
    assert payload["results"]["success"]["3"]["closed_form"] == pytest.approx(0.75)


def test_scenario_outputs_deterministic(tmp_path):
    a = run_scenario("berry-phase", out_dir=str(tmp_path / "a"))
    b = run_scenario("berry-phase", out_dir=str(tmp_path / "b"))
    assert a.results == b.results
    assert a.config_hash == b.config_hash


def test_threshold_scan_csv_columns(tmp_path):
    rec = run_scenario(
        "gadget-threshold-scan",
        overrides={"etas": [1e4], "scan_points": 3},
        out_dir=str(tmp_path),
    )
    csv_path = [p for p in rec.artifacts if p.endswith("scan.csv")][0]
    header = open(csv_path).readline().strip().split(",")
    assert header == ["eta", "epsilon", "n", "r", "eps_target", "eps_control",
                      "eps_ec", "eps_nondeph", "eps_cat"]


def test_cli_list_and_validate(tmp_path, capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "cx-lossless" in out

    good = tmp_path / "good.json"
    good.write_text(json.dumps({"scenario": "magic-states", "overrides": {"ns": [3]}}))
    assert main(["validate", str(good)]) == 0

    bad = tmp_path / "bad.json"
    bad.write_text('{"scenario": "magic-states", "overrides": {"nope": 1}}')
    assert main(["validate", str(bad)]) == 1

    broken = tmp_path / "broken.json"
    broken.write_text('{"scenario": ')
    assert main(["validate", str(broken)]) == 1
    out = capsys.readouterr().out
    assert "line" in out and "column" in out


def test_cli_run_with_overrides(tmp_path, capsys):
    code = main([
        "run", "magic-states", "--set", "ns=[3]", "--out-dir", str(tmp_path),
    ])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["scenario_id"] == "magic-states"


def test_cli_unknown_scenario_exit_code(capsys):
    assert main(["run", "missing-scenario"]) == 2


def test_env_var_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("KERRCAT_OUT_DIR", str(tmp_path / "envout"))
    run_scenario("magic-states", overrides={"ns": [3]})
    assert (tmp_path / "envout" / "magic-states.record.json").exists()
