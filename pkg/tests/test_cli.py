import json
import subprocess
import sys

import pytest

from ergodic_alignment.cli import main, parse_grid


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_noiseless(capsys):
    code, out, _ = run(["simulate-ff", "--q", "5", "--k", "3", "--rho", "0", "--n", "10000",
                        "--seed", "7"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["seed"] == 7
    assert doc["report"]["per_user_error_rate"] == [0.0, 0.0, 0.0]


def test_simulate_rejects_even_q(capsys):
    code, _, err = run(["simulate-ff", "--q", "4"], capsys)
    assert code == 2 and "q must be an odd prime" in err


def test_simulate_n_too_small(capsys):
    code, _, err = run(["simulate-ff", "--q", "5", "--k", "3", "--n", "3"], capsys)
    assert code == 2 and "too small" in err


def test_region_verdicts(capsys):
    code, out, _ = run(["region", "--q", "5", "--rho", "0", "--rates", "[1.2,1.2,1.2]"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "non-member" and doc["binding_pair"] == [1, 2]
    _, out, _ = run(["region", "--q", "5", "--rates", "[0,0,0]"], capsys)
    assert json.loads(out)["member"]
    half = json.loads(out)["cap"] / 2
    _, out, _ = run(["region", "--q", "5", "--rates", json.dumps([half] * 4)], capsys)
    doc = json.loads(out)
    assert doc["member"] and len(doc["tight_pairs"]) == 6


def test_region_malformed(capsys):
    assert run(["region", "--rates", "[1,"], capsys)[0] == 2
    assert run(["region", "--rates", "[-1, 0]"], capsys)[0] == 2
    assert run(["region"], capsys)[0] == 2


def test_sweep_default_grid_and_header(capsys, tmp_path):
    assert len(parse_grid("-10:30:1")) == 41
    out = tmp_path / "s.csv"
    code, _, _ = run(["sweep", "--samples", "2000", "--output", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "snr_db,achievable,bound_half,gap,stderr_ach,stderr_bound"
    rows = [list(map(float, l.split(","))) for l in lines[2:]]
    assert len(rows) == 41 and all(r[3] >= 0 for r in rows)


def test_sweep_empty_grid(capsys):
    assert run(["sweep", "--snr-db", ""], capsys)[0] == 2


def test_sweep_json_output(capsys, tmp_path):
    out = tmp_path / "s.json"
    assert run(["sweep", "--snr-db", "0,10", "--samples", "1000", "--output", str(out)],
               capsys)[0] == 0
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 2 and doc["header"][0] == "snr_db"


def test_pairing_stats_ff(capsys):
    code, out, _ = run(["pairing-stats", "--q", "3", "--k", "2", "--n", "10000",
                        "--trials", "20"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["matched_fraction"] > 0.9
    assert doc["lemma1_bound"] == pytest.approx(0.84)
    assert doc["typical_frequency"] >= doc["lemma1_bound"]


def test_pairing_stats_degenerate_and_gauss(capsys):
    _, out, _ = run(["pairing-stats", "--n", "2", "--trials", "2"], capsys)
    assert json.loads(out)["matched_fraction"] in (0.0, 1.0)
    code, out, _ = run(["pairing-stats", "--model", "gauss", "--n", "2000", "--tau", "0.5",
                        "--gamma", "1.0", "--trials", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["discarded_fraction"] > 0.5


def test_pairing_stats_csv(capsys, tmp_path):
    out = tmp_path / "plan.csv"
    assert run(["pairing-stats", "--n", "100", "--trials", "1", "--output", str(out)],
               capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "t,state_key,partner,role" and len(lines) == 102


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"q": 3, "k": 2, "rho": 0.0, "n": 500, "seed": 1}))
    _, out, _ = run(["simulate-ff", "--config", str(cfg), "--seed", "4"], capsys)
    doc = json.loads(out)
    assert doc["config"]["q"] == 3 and doc["config"]["seed"] == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ergodic_alignment", "region", "--rates",
                          "[0.1, 0.2]"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["member"]
