import json
import subprocess
import sys

import requests

from vpdebug.cli import main
from vpdebug.harness import datasets
from vpdebug.harness.server import MockServer, RecordOracle
from vpdebug.inject.records import dumps_jsonl, loads_jsonl


def test_trace_prints_golden(capsys):
    assert main(["trace"]) == 0
    assert capsys.readouterr().out == datasets.golden_feedback_path().read_text(encoding="utf-8")


def test_run(tmp_path, capsys):
    prog = tmp_path / "p.py"
    prog.write_text("def execute_command(image) -> str:\n    return 'yes'")
    assert main(["run", str(prog), "--scene", "fig_trace"]) == 0
    assert capsys.readouterr().out.startswith("-> yes\n")
    prog.write_text("def execute_command(image) -> str:\n    return nope")
    assert main(["run", str(prog), "--scene", "fig_trace"]) == 1


def test_run_reports_missing_scene(tmp_path, capsys):
    prog = tmp_path / "p.py"
    prog.write_text("def execute_command(image) -> str:\n    return 'yes'")
    assert main(["run", str(prog), "--scene", "nowhere"]) == 2
    assert "nowhere" in capsys.readouterr().err


def _small_pool(pool, tmp_path, n=15):
    path = tmp_path / "pool.jsonl"
    path.write_text(dumps_jsonl(p.to_dict() for p in pool[:n]))
    return path


def test_inject_dataset_gen_stats_eval_debug(pool, natural_pool, tmp_path, capsys):
    pool_path = _small_pool(pool, tmp_path)
    out = tmp_path / "rec.jsonl"
    args = ["inject", "--pool", str(pool_path), "--out", str(out), "--mode", "mask-best",
            "--th", "0.9", "--max-masked", "1", "--seed", "0", "--attempts", "3"]
    assert main(args) == 0
    err = capsys.readouterr().err
    assert "mode=mask-best" in err
    records = loads_jsonl(out.read_text())
    assert records

    nat_dir = tmp_path / "natural"
    nat_dir.mkdir()
    nat = _small_pool(natural_pool, nat_dir, 4)
    critic, refiner = tmp_path / "c.jsonl", tmp_path / "r.jsonl"
    assert main(["dataset-gen", "--records", str(out), "--natural", str(nat),
                 "--critic-out", str(critic), "--refiner-out", str(refiner)]) == 0
    assert len(loads_jsonl(critic.read_text())) == 2 * len(records) + 4
    assert len(loads_jsonl(refiner.read_text())) == len(records)

    assert main(["stats", "--pool-correct", str(pool_path), "--records", f"mask-best={out}"]) == 0
    table = capsys.readouterr().out
    assert f"\t{len(records)}\t" in table

    report = tmp_path / "report.json"
    assert main(["eval", "--records", str(out), "--out", str(report), "--max-steps", "2"]) == 0
    data = json.loads(report.read_text())
    for series in (data["accuracy"], data["mean_iou"]):
        assert series[1] in (None, 1.0)
    capsys.readouterr()

    assert main(["debug", "--records", str(out), "--id", records[0]["id"], "--threshold", "0.5", "--max-steps", "3"]) == 0
    transcript = json.loads(capsys.readouterr().out)
    assert transcript["reason"] == "critic-accepted"


def test_stats_from_counts(capsys):
    assert main(["stats", "--name", "GQA", "--n-correct", "18126", "--records", "greedy=3927", "--records", "mask-best=7758"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split("\t")
    assert row[4] == "21.7" and row[6] == "42.8"


def test_debug_remote_uses_env_endpoints(injected, tmp_path, capsys, monkeypatch):
    rec = injected.records[0]
    path = tmp_path / "rec.jsonl"
    path.write_text(dumps_jsonl([rec.to_dict()]))
    oracle = RecordOracle([rec])
    with MockServer(critic=oracle.critic, refine=oracle.refine) as server:
        monkeypatch.setenv("VPDEBUG_CRITIC_ENDPOINT", server.url)
        monkeypatch.setenv("VPDEBUG_REFINER_ENDPOINT", server.url)
        assert main(["debug", "--records", str(path), "--id", rec.id, "--backend", "remote"]) == 0
    transcript = json.loads(capsys.readouterr().out)
    assert transcript["final_program"] == rec.program_correct


def test_debug_remote_transport_failure(injected, tmp_path, capsys, monkeypatch):
    rec = injected.records[0]
    path = tmp_path / "rec.jsonl"
    path.write_text(dumps_jsonl([rec.to_dict()]))
    monkeypatch.setenv("VPDEBUG_CRITIC_ENDPOINT", "http://127.0.0.1:9")
    monkeypatch.setenv("VPDEBUG_REFINER_ENDPOINT", "http://127.0.0.1:9")
    assert main(["debug", "--records", str(path), "--id", rec.id, "--backend", "remote"]) == 2
    assert "aborted" in capsys.readouterr().err


def test_serve_mock_subprocess(tmp_path):
    proc = subprocess.Popen(
        [sys.executable, "-m", "vpdebug", "serve-mock", "--port", "0"],
        stdout=subprocess.PIPE, text=True,
    )
    try:
        line = proc.stdout.readline()
        url = line.strip().rsplit(" ", 1)[-1]
        tokens = requests.get(url + "/v1/vocab", timeout=10).json()["tokens"]
        probs = requests.post(url + "/v1/next", json={"context": [0, 1]}, timeout=10).json()["probs"]
        assert len(probs) == len(tokens)
        assert abs(sum(probs) - 1.0) < 1e-9
        assert requests.post(url + "/v1/next", data=b"{bad", timeout=10).status_code == 400
    finally:
        proc.terminate()
        proc.wait(timeout=10)
