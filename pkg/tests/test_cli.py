import json

import jsonschema
import pytest
from click.testing import CliRunner

from rtbound.cli import main, report_schema


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args])

    return invoke


def test_analyze_synth_text(run, data_dir):
    res = run("analyze", data_dir / "r_search.rec", "--bound", "logn", "--mode", "synth", "--epsilon", "0.01")
    assert res.exit_code == 0
    assert "N: 1398" in res.output and "verdict: yes" in res.output


def test_analyze_fail_exit_code(run, data_dir):
    res = run("analyze", data_dir / "q_sort.rec", "--bound", "logn", "--mode", "decide")
    assert res.exit_code == 2
    assert "verdict: fail" in res.output


def test_analyze_json_schema(run, data_dir):
    schema = report_schema()
    for name, args in [
        ("coupon.rec", ["--bound", "auto", "--epsilon", "0.5"]),
        ("q_sort.rec", ["--bound", "logn", "--mode", "decide"]),
        ("diam_b.rec", ["--bound", "n", "--epsilon", "0.1"]),
    ]:
        res = run("analyze", data_dir / name, *args, "--json")
        report = json.loads(res.output)
        jsonschema.validate(report, schema)
        assert res.exit_code == (0 if report["verdict"] == "yes" else 2)
    res = run("analyze", data_dir / "coupon.rec", "--bound", "auto", "--epsilon", "0.5", "--json")
    report = json.loads(res.output)
    assert report["shape"] == "n ln m" and report["d"] == "3.001" and report["N"] == 2


def test_text_and_json_agree(run, data_dir):
    text = run("analyze", data_dir / "diam_b.rec", "--bound", "n", "--epsilon", "0.1").output
    report = json.loads(run("analyze", data_dir / "diam_b.rec", "--bound", "n", "--epsilon", "0.1", "--json").output)
    for key in ("d", "N", "d_prefix", "d_threshold"):
        assert f"{key}: {report[key]}" in text


def test_analyze_errors(run, tmp_path):
    bad = tmp_path / "bad.rec"
    bad.write_text("rel T(n) = 1 + T(n-2)\nbase T(1) = 1\n")
    res = run("analyze", bad)
    assert res.exit_code == 1
    assert "error:" in res.output
    assert run("analyze", tmp_path / "missing.rec").exit_code == 1


def test_eval(run, data_dir):
    res = run("eval", data_dir / "r_search.rec", "--upto", 5)
    assert res.exit_code == 0
    assert [line.split("\t")[1] for line in res.output.splitlines()] == ["1", "7", "11", "15", "17.8"]
    assert run("eval", data_dir / "r_search.rec", "--upto", 1).output.strip() == "1\t1"
    res = run("eval", data_dir / "coupon.rec", "--upto", 3, "--n", 4, "--json")
    assert json.loads(res.output)["values"] == ["4", "6", "22/3"]
    assert run("eval", data_dir / "coupon.rec", "--upto", 3).exit_code == 1


def test_eval_interval_output(run, data_dir):
    res = run("eval", data_dir / "res_b.rec", "--upto", 4, "--n", 9, "--json")
    last = json.loads(res.output)["values"][-1]
    assert abs(last["approx"] - (1 + 3 * 2.718281828459045)) < 1e-9


def test_corpus_single_column(run):
    res = run("corpus", "--epsilons", "0.5", "--json")
    payload = json.loads(res.output)
    assert {c["key"] for c in payload["cells"] if c["kind"] in ("N", "d")} == {"0.5"}
    assert res.exit_code == (0 if payload["ok"] else 1)


def test_corpus_fixture_injection(run, tmp_path):
    patch = tmp_path / "patch.json"
    patch.write_text(json.dumps({"coupon": {"synth": {"0.5": {"N": 7}}}}))
    res = run("corpus", "--epsilons", "0.5", "--fixtures", patch)
    assert res.exit_code != 0
    assert "FAIL coupon" in res.output


def test_version(run):
    assert "0.1.0" in run("--version").output
