import io
import json
import subprocess
import sys

import pytest

from majority_automata.cli import run_cli
from majority_automata.dynamics import MAJORITY, read_generation, step
from majority_automata.topology import build_lattice

TORUS6 = ["--topology", "torus", "--n", "6", "--neighborhood", "neumann"]


def cli(*argv):
    out = io.StringIO()
    code = run_cli([str(a) for a in argv], out)
    return code, out.getvalue()


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_simulate_single_blue(data_dir):
    code, text = cli("simulate", *TORUS6, "--rule", "majority", "--init-file", data_dir / "single_blue.txt")
    assert code == 0
    got = kv(text)
    assert got["consensus_time"] == "1"
    assert got["period"] == "1"
    assert got["classification"] == "r-monochromatic"


def test_bounds_prints_edge_count():
    code, text = cli("bounds", "--topology", "torus", "--n", 10, "--neighborhood", "neumann", "--rule", "majority")
    assert code == 0
    assert kv(text)["consensus_time_bound"] == "200"


def test_verify_eternal_diagonal_pair(data_dir):
    code, text = cli(
        "verify-eternal", "--topology", "torus", "--n", 4, "--neighborhood", "neumann",
        "--rule", "biased", "--pattern", data_dir / "diag_pair.txt", "--color", "b",
    )
    assert code == 0
    assert text.splitlines()[0] == "true"
    assert "2^14" in text


def test_verify_robust(tmp_path):
    pattern = tmp_path / "block.txt"
    pattern.write_text("BB....\nBB....\n......\n......\n......\n......\n")
    code, text = cli("verify-robust", *TORUS6, "--rule", "majority", "--pattern", pattern)
    assert code == 0 and text.splitlines()[0] == "true"
    pattern.write_text("B.....\n......\n......\n......\n......\n......\n")
    code, text = cli("verify-robust", *TORUS6, "--rule", "majority", "--pattern", pattern)
    assert code == 0 and text.splitlines()[0] == "false"


def test_verify_eternal_cap_is_domain_error(tmp_path, capsys):
    pattern = tmp_path / "one.txt"
    pattern.write_text("B.....\n" + "......\n" * 5)
    code, _ = cli("verify-eternal", *TORUS6, "--rule", "majority", "--pattern", pattern)
    assert code == 1
    assert "cap of 24" in capsys.readouterr().err


def test_unknown_flag_is_usage_error():
    assert cli("simulate", *TORUS6, "--rule", "majority", "--frobnicate")[0] == 2
    assert cli("teleport")[0] == 2
    assert cli()[0] == 2


def test_missing_inputs_are_usage_errors(data_dir):
    assert cli("simulate", *TORUS6, "--rule", "majority")[0] == 2
    assert cli("simulate", "--topology", "torus", "--rule", "majority", "--p-b", "0.1")[0] == 2
    assert cli("bounds")[0] == 2
    assert cli("sweep", "--topology", "torus", "--n", 5)[0] == 2


def test_malformed_file_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("RRRRRR\nRRXRRR\n" + "RRRRRR\n" * 4)
    code, _ = cli("simulate", *TORUS6, "--rule", "majority", "--init-file", bad)
    assert code == 1
    assert f"{bad}:2:3" in capsys.readouterr().err


def test_usage_errors_leave_no_files(tmp_path):
    dump = tmp_path / "steps"
    csv = tmp_path / "out.csv"
    assert cli("simulate", *TORUS6, "--rule", "majority", "--dump-steps", dump)[0] == 2
    assert cli("sweep", "--topology", "torus", "--rule", "majority", "--p-b", "0.1", "--trials", 2, "--out", csv)[0] == 2
    assert cli("sweep", *TORUS6, "--rule", "majority", "--p-b", "0.1", "--trials", 2, "--out", csv, "--bogus")[0] == 2
    assert not dump.exists() and not csv.exists()


def test_dump_steps_round_trip(tmp_path):
    dump = tmp_path / "steps"
    code, text = cli("simulate", *TORUS6, "--rule", "majority", "--p-b", 0.5, "--seed", 5, "--dump-steps", dump)
    assert code == 0
    first = kv(text)
    files = sorted(dump.iterdir())
    assert files[0].name == "step_000000.txt"
    assert len(files) == int(first["steps_executed"]) + 1
    # re-simulating from the dumped initial generation reproduces the outcome
    code, again = cli("simulate", *TORUS6, "--rule", "majority", "--init-file", files[0])
    assert kv(again) == first
    t = build_lattice(6, "neumann", True)
    last = read_generation(files[-1], t)
    again = last
    for _ in range(int(first["period"])):
        again = step(t, MAJORITY, again)
    assert again == last


def test_json_output(data_dir):
    code, text = cli("--json", "simulate", *TORUS6, "--rule", "majority", "--init-file", data_dir / "single_blue.txt")
    assert code == 0
    payload = json.loads(text)
    assert payload["consensus_time"] == 1 and payload["classification"] == "r-monochromatic"
    code, text = cli("bounds", "--topology", "torus", "--n", 10, "--rule", "biased", "--json")
    assert json.loads(text)["consensus_time_bound"] == 300


def test_sweep_flags_and_config_agree(tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, _ = cli("sweep", *TORUS6, "--rule", "majority", "--p-b", "0.5,0.05", "--trials", 5, "--out", out_a)
    assert code == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"topology": "torus", "n": 6, "neighborhood": "neumann", "rule": "majority",
                               "p_b": [0.05, 0.5], "trials": 5}))
    assert cli("sweep", "--config", cfg, "--out", out_b)[0] == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    lines = out_a.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("n,topology,neighborhood,rule,p_b")


def test_bounds_survival_and_thresholds(tmp_path):
    code, text = cli("bounds", "--survival", "disjoint", "--k", 100, "--s", 2, "--p-b", 0.1)
    assert code == 0 and float(kv(text)["survival_bound"]) == pytest.approx(0.36787944117144233)
    weights = tmp_path / "a.txt"
    weights.write_text(" ".join(["1"] * 400))
    code, text = cli("bounds", "--survival", "azuma", "--k", 100, "--s", 2, "--p-b", 0.5, "--a", f"@{weights}")
    assert code == 0 and float(kv(text)["survival_bound"]) == pytest.approx(0.4578333617716143)
    code, text = cli("bounds", "--topology", "torus", "--n", 10000, "--rule", "majority", "--thresholds")
    got = kv(text)
    assert float(got["p1"]) == pytest.approx(0.01) and float(got["p2"]) == pytest.approx(0.99)
    code, _ = cli("bounds", "--topology", "torus", "--n", 10, "--neighborhood", "moore", "--rule", "biased", "--thresholds")
    assert code == 1


def test_rectangulate_command(tmp_path):
    gen = tmp_path / "g.txt"
    gen.write_text("BRRRRRRR\nRBRRRRRR\n" + "RRRRRRRR\n" * 2 + "RRRRRBRR\n" + "RRRRRRRR\n" * 3)
    code, text = cli("rectangulate", "--topology", "torus", "--n", 8, "--generation", gen)
    assert code == 0
    lines = text.splitlines()
    assert lines == ["rectangles=2", "anchor=(0,0) extent=2x2", "anchor=(4,5) extent=1x1"]
    assert cli("rectangulate", "--topology", "cycle", "--n", 8, "--generation", gen)[0] == 2


def test_module_entry_point(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "majority_automata", "simulate", *TORUS6, "--rule", "majority",
         "--init-file", str(data_dir / "single_blue.txt")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "classification=r-monochromatic" in proc.stdout
