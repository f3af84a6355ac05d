import hashlib
import json
import xml.etree.ElementTree as ET

import pytest

from lfcopt import config as cfgio
from lfcopt.cli import main, problem_hash
from lfcopt.model import DecisionVector, nominal_decision
from lfcopt.objective import evaluate

SVG = "{http://www.w3.org/2000/svg}"


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def tuned(tmp_path_factory):
    root = tmp_path_factory.mktemp("tuned")
    dirs = {}
    for method in ("bfo", "pso", "gd"):
        out = root / method
        assert main(["tune", "--method", method, "--max-evaluations", "120", "--out", str(out)]) == 0
        dirs[method] = out
    return dirs


# config files

def test_nominal_config_round_trip():
    text = cfgio.dump(cfgio.RunConfig())
    rc = cfgio.load(text)
    assert rc.system == cfgio.RunConfig().system
    assert cfgio.dump(rc) == text


def test_empty_config_means_nominal():
    assert cfgio.dump(cfgio.load("")) == cfgio.dump(cfgio.RunConfig())


def test_config_overrides():
    rc = cfgio.load("[bounds]\nkp = 0.0, 1.0\n[bfo]\nS = 10\n[tuning]\nhorizon = 50\npenalty = 100\n")
    assert rc.bounds.upper[0] == 1.0 and rc.bounds.lower[0] == 0.0
    assert rc.optimizer_params("bfo").S == 10
    assert rc.tuning.horizon == 50.0 and rc.penalty == 100.0


def test_config_unknown_key_rejected():
    with pytest.raises(ValueError):
        cfgio.load("[simulation]\nstep = 0.1\n")


def test_full_budget_profile_sizes():
    p = cfgio.RunConfig().optimizer_params("bfo", "paper")
    assert (p.S, p.Nc, p.Nre, p.Ned) == (120, 120, 30, 5)


# simulate

def test_simulate_nominal(tmp_path):
    out = tmp_path / "s"
    assert main(["simulate", "--nominal", "--load-area", "1", "--load-pu", "0.01", "--out", str(out)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert len(metrics["areas"]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"traces.csv", "metrics.json"}
    assert manifest["status"] == "ok"


def test_simulate_is_byte_reproducible(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "--nominal", "--out", str(tmp_path / name)]) == 0
    for f in ("traces.csv", "metrics.json"):
        assert digest(tmp_path / "a" / f) == digest(tmp_path / "b" / f)


def test_simulate_zero_load(tmp_path):
    assert main(["simulate", "--nominal", "--load-pu", "0.0", "--out", str(tmp_path)]) == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    for area in metrics["areas"]:
        assert area["peak_overshoot"] == area["peak_undershoot"] == area["steady_state_value"] == 0.0
    assert metrics["ise"] == 0.0


def test_simulate_divergence_exit_code(tmp_path):
    hot = DecisionVector((2.0,) * 3, (2.0,) * 3, (1.0,) * 3, (1.0,) * 3)
    path = tmp_path / "hot.json"
    path.write_text(json.dumps(hot.to_dict()))
    assert main(["simulate", "--decision", str(path), "--out", str(tmp_path / "o")]) == 3
    assert (tmp_path / "o" / "traces.csv").exists()
    assert json.loads((tmp_path / "o" / "metrics.json").read_text())["diverged"] is True


def test_invalid_config_exit_code(tmp_path, capsys):
    text = cfgio.dump(cfgio.RunConfig()).replace("Tg = 0.08", "Tg = -0.1")
    path = tmp_path / "bad.ini"
    path.write_text(text)
    assert main(["simulate", "--nominal", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "area1.thermal.Tg" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path):
    assert main(["simulate", "--nominal", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2


def test_usage_errors_exit_one(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit) as info:
        main(["tune", "--method", "anneal"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_inputs_not_mutated(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(cfgio.dump(cfgio.RunConfig()))
    before = digest(cfg)
    assert main(["simulate", "--nominal", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert digest(cfg) == before


def test_nominal_config_command(tmp_path, capsys):
    assert main(["nominal-config"]) == 0
    assert "[area.1]" in capsys.readouterr().out
    assert main(["nominal-config", "--out", str(tmp_path)]) == 0
    assert cfgio.load_file(tmp_path / "config.ini").system == cfgio.RunConfig().system


# tune

def test_tune_outputs(tuned):
    out = tuned["bfo"]
    result = json.loads((out / "result.json").read_text())
    assert result["evaluations"] == 120
    assert result["scenario_hash"] == problem_hash(cfgio.RunConfig())
    rows = (out / "convergence.csv").read_text().splitlines()
    assert rows[0] == "iteration,best_cost"
    costs = [float(r.split(",")[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(costs, costs[1:]))
    assert costs[-1] == result["best_cost"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"config.ini", "result.json", "best_decision.json", "convergence.csv"}


def test_tuned_bfo_beats_droop_only(tuned):
    rc = cfgio.RunConfig()
    tuned_cost = json.loads((tuned["bfo"] / "result.json").read_text())["best_cost"]
    droop = evaluate(nominal_decision(rc.system), rc.tuning_scenario())
    assert tuned_cost < droop


def test_gd_starts_from_clamped_zero(tuned):
    rc = cfgio.RunConfig()
    result = json.loads((tuned["gd"] / "result.json").read_text())
    start_cost = evaluate(DecisionVector.from_array(rc.bounds.clamp([0.0] * 12)), rc.tuning_scenario())
    assert result["history"][0] <= start_cost


def test_tune_is_byte_reproducible(tmp_path):
    for name in ("a", "b"):
        assert main(["tune", "--method", "bfo", "--seed", "3", "--max-evaluations", "80",
                     "--out", str(tmp_path / name)]) == 0
    for f in ("result.json", "convergence.csv", "best_decision.json", "config.ini"):
        assert digest(tmp_path / "a" / f) == digest(tmp_path / "b" / f)


def test_tune_rejects_bad_budget(tmp_path):
    assert main(["tune", "--method", "pso", "--max-evaluations", "0", "--out", str(tmp_path)]) == 2


# compare

def test_compare_three_methods(tuned, tmp_path):
    out = tmp_path / "cmp"
    code = main(["compare", str(tuned["bfo"]), str(tuned["pso"]), str(tuned["gd"]), "--out", str(out)])
    assert code in (0, 3)
    text = (out / "report.txt").read_text()
    for method in ("BFO", "PSO", "GD"):
        assert method in text
    rows = (out / "report.csv").read_text().splitlines()
    assert len(rows) == 1 + 3 * 3
    for area in (1, 2, 3):
        root = ET.parse(out / f"delta_f_area{area}.svg").getroot()
        assert len(root.findall(f"{SVG}polyline")) == 3
        labels = [t.text for t in root.findall(f"{SVG}text")]
        assert "Time (s)" in labels and f"Δf{area} (Hz)" in labels
        assert {"BFO", "PSO", "GD"} <= set(labels)
    manifest = json.loads((out / "manifest.json").read_text())
    assert "delta_f_area3.svg" in manifest["outputs"]


def test_compare_result_with_itself(tuned, tmp_path):
    d = str(tuned["pso"])
    assert main(["compare", d, d, d, "--out", str(tmp_path)]) in (0, 3)
    rows = [r.split(",") for r in (tmp_path / "report.csv").read_text().splitlines()[1:]]
    for key in ("undershoot", "overshoot", "settling"):
        values = [r[2:] for r in rows if r[0] == key]
        assert values[0] == values[1] == values[2]


def test_compare_rejects_scenario_mismatch(tuned, tmp_path):
    cfg = tmp_path / "other.ini"
    cfg.write_text("[tuning]\nhorizon = 60\n")
    other = tmp_path / "other"
    assert main(["tune", "--method", "pso", "--max-evaluations", "30", "--config", str(cfg),
                 "--out", str(other)]) == 0
    assert main(["compare", str(tuned["bfo"]), str(other), "--out", str(tmp_path / "c")]) == 2
