import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from cuspml.cli import EXIT_BUDGET, EXIT_OK, EXIT_SCHEMA, main
from cuspml.config import ConfigError, build_config, criterion_params, load_preset
from cuspml.experiments import EXPERIMENTS
from cuspml.manifest import emit_manifest, resolve

FIX = Path(__file__).parent / "fixtures"


def _write(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(obj))
    return str(p)


def test_desk_preset_validates_for_every_experiment():
    preset = load_preset("desk")
    assert sorted(preset) == sorted(EXPERIMENTS)
    for exp in EXPERIMENTS:
        cfg = build_config(exp)
        assert cfg["seed"] == 0


def test_top_level_override_reaches_criteria():
    cfg = build_config("egorov", user={"experiment": "egorov", "h_list": [0.1, 0.05]})
    assert criterion_params(cfg, 10)["h_list"] == [0.1, 0.05]
    assert "h_list" not in criterion_params(cfg, 12)


@pytest.mark.parametrize("user", [
    {"experiment": "calculus", "h_list": []},
    {"experiment": "calculus", "bogus": 1},
    {"experiment": "calculus", "criteria": {"5": {"extra": 1}}},
    {"experiment": "calculus", "criteria": {"5": {"h": -0.1}}},
    {"experiment": "calculus", "seed": -1},
    {"experiment": "egorov"},
])
def test_schema_errors(user):
    with pytest.raises(ConfigError):
        build_config("calculus", user=user)


def test_select_must_belong_to_experiment():
    with pytest.raises(ConfigError):
        build_config("eisenstein", select=[3])


def test_cli_empty_h_list_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, {"experiment": "calculus", "h_list": []})
    assert main(["calculus", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_SCHEMA
    assert "h_list" in capsys.readouterr().err


def test_cli_unknown_preset_exit_2(tmp_path):
    assert main(["eisenstein", "--preset", "nope", "--out", str(tmp_path)]) == EXIT_SCHEMA


def test_cli_budget_error_exit_3(tmp_path):
    cfg = _write(tmp_path, {"experiment": "equidistribution", "t_budget": 5.0})
    assert main(["equidistribution", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_BUDGET


def test_self_test_fast_and_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        t0 = time.perf_counter()
        assert main(["run", "eisenstein", "--self-test", "--out", str(out), "--seed", "7"]) == EXIT_OK
        assert time.perf_counter() - t0 < 10
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == ["criterion_13_special_functions.csv", "summary.json"]
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    summary = json.loads((outs[0] / "summary.json").read_text())
    assert summary["seed"] == 7 and summary["all_pass"] is True
    assert [c["criterion"] for c in summary["criteria"]] == [13]
    assert (outs[0] / files[0]).read_text().splitlines()[1].startswith("7,")


def test_console_script_runs(tmp_path):
    r = subprocess.run([sys.executable, "-m", "cuspml.cli", "eisenstein", "--self-test", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "PASS" in r.stdout


def test_manifest_contents():
    expect = json.loads((FIX / "manifest_expect.json").read_text())
    m = emit_manifest()
    assert len(m) >= expect["min_entries"]
    assert any(e["anchor"] == expect["required_anchor"] for e in m)
    for e in m:
        assert e["anchor"] and e["module"] and e["check"]
        assert callable(resolve(e))
    assert len({e["check"] for e in m}) == len(m)


def test_manifest_cli(tmp_path, capsys):
    assert main(["manifest"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)) >= 20
