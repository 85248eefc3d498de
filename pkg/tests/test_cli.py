import json

import pytest

from somdsa.cli import main
from somdsa.model import NetworkInstance, save_instance

from conftest import pair_instance


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--s", "3", "--c", "4", "--density", "0.5", "--rmax", "2", "--seed", "7", "-o", str(path)]) == 0
    return path


def test_gen_prints_fingerprint_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["gen", "--s", "5", "--c", "4", "--density", "0.3", "--seed", "7", "-o", str(a)])
    fp = capsys.readouterr().out.strip()
    main(["gen", "--s", "5", "--c", "4", "--density", "0.3", "--seed", "7", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert len(fp) == 16
    manifest = json.loads((tmp_path / "a.manifest.json").read_text())
    assert manifest["fingerprint"] == fp and manifest["command"] == "gen"


def test_gen_rejects_bad_density(tmp_path, capsys):
    assert main(["gen", "--s", "5", "--c", "4", "--density", "1.5", "-o", str(tmp_path / "x.json")]) == 1
    assert "density" in capsys.readouterr().err


def test_solve_som_writes_result_and_trace(inst_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["solve", "-i", str(inst_file), "--method", "som", "--seed", "0", "-o", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["method"] == "som" and res["converged"]
    assert (tmp_path / "r.trace.csv").read_text().startswith("outer_step,epoch,max_delta_w")
    assert (tmp_path / "r.manifest.json").exists()


def test_solve_som_and_exact_comparable(inst_file, tmp_path):
    main(["solve", "-i", str(inst_file), "--method", "som", "-o", str(tmp_path / "som.json")])
    main(["solve", "-i", str(inst_file), "--method", "exact", "-o", str(tmp_path / "ex.json")])
    som_cost = json.loads((tmp_path / "som.json").read_text())["cost"]
    ex_cost = json.loads((tmp_path / "ex.json").read_text())["cost"]
    assert som_cost >= ex_cost


def test_solve_byte_identical(inst_file, tmp_path):
    for name in ("a", "b"):
        main(["solve", "-i", str(inst_file), "--seed", "3", "--no-timing", "-o", str(tmp_path / f"{name}.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.trace.csv").read_bytes() == (tmp_path / "b.trace.csv").read_bytes()


def test_solve_exact_over_guard(tmp_path, capsys):
    path = tmp_path / "big.json"
    save_instance(NetworkInstance(8, 10, [5] * 8, [[[0] * 10] * 8] * 8), path)
    assert main(["solve", "-i", str(path), "--method", "exact"]) == 1
    assert "guard" in capsys.readouterr().err


def test_solve_nonconverged_exit_code(tmp_path):
    path = tmp_path / "k6.json"
    I = [[[0 if n == k else 1] * 3 for k in range(6)] for n in range(6)]
    save_instance(NetworkInstance(6, 3, [1] * 6, I), path)
    assert main(["solve", "-i", str(path), "--max-outer", "1"]) == 2


def test_solve_malformed_instance(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"S": 1, "C": 1, "R": [1], "I": [[[0]]], "oops": True}))
    assert main(["solve", "-i", str(path)]) == 1
    assert "oops" in capsys.readouterr().err


@pytest.mark.parametrize("method", ["greedy", "random"])
def test_solve_baselines_stdout(inst_file, capsys, method):
    assert main(["solve", "-i", str(inst_file), "--method", method]) == 0
    assert json.loads(capsys.readouterr().out)["method"] == method


def test_simulate(inst_file, tmp_path):
    events = tmp_path / "ev.jsonl"
    events.write_text('{"t": 2, "kind": "pu_arrival", "pu": "a", "channel": 0}\n{"t": 4, "kind": "pu_departure", "pu": "a"}\n')
    out = tmp_path / "final.json"
    assert main(["simulate", "-i", str(inst_file), "-e", str(events), "--seed", "0", "-o", str(out)]) == 0
    lines = (tmp_path / "final.metrics.csv").read_text().splitlines()
    assert lines[0] == "tick,cost,satisfaction,churn" and len(lines) == 4
    assert "assignment" in json.loads(out.read_text())


def test_simulate_empty_events(inst_file, tmp_path, capsys):
    events = tmp_path / "ev.jsonl"
    events.write_text("")
    assert main(["simulate", "-i", str(inst_file), "-e", str(events)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2


def test_simulate_warm_start(inst_file, tmp_path):
    events = tmp_path / "ev.jsonl"
    events.write_text('{"t": 2, "kind": "pu_arrival", "pu": "a", "channel": 0}\n')
    for flag in ([], ["--warm-start"]):
        assert main(["simulate", "-i", str(inst_file), "-e", str(events), *flag]) == 0


def test_simulate_unordered_events(inst_file, tmp_path):
    events = tmp_path / "ev.jsonl"
    events.write_text('{"t": 5, "kind": "pu_arrival", "pu": "a", "channel": 0}\n{"t": 1, "kind": "pu_departure", "pu": "a"}\n')
    assert main(["simulate", "-i", str(inst_file), "-e", str(events)]) == 1


def test_bench(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--s", "3", "--c", "4", "--rmax", "2", "--seeds", "100", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "instance,method,cost,optimal_gap,elapsed_ms"
    assert len(lines) == 401
    exact_gaps = {line.split(",")[3] for line in lines[1:] if line.split(",")[1] == "exact"}
    assert exact_gaps == {"0.0"}
    summary = json.loads((tmp_path / "bench.summary.json").read_text())
    assert all(0 <= v["optimum_match_rate"] <= 1 for v in summary.values())


def test_bench_deterministic_without_timing(tmp_path):
    for name in ("a", "b"):
        main(["bench", "--s", "2", "--c", "3", "--seeds", "5", "--no-timing", "-o", str(tmp_path / f"{name}.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
