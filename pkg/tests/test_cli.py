import json
import logging

import pytest

from codd_lab import __version__
from codd_lab.core.constants import LOGGER_NAME
from codd_lab.main import parse_sizes, run


def invoke(capsys, *argv: str) -> tuple[int, dict | None, str]:
    code = run(list(argv))
    captured = capsys.readouterr()
    report = json.loads(captured.out) if code == 0 and captured.out.startswith("{") else None
    return code, report, captured.err


class TestEntropyAndTrees:
    def test_entropy(self, capsys, write_json):
        partition = write_json("p.json", {"n": 2, "cell": [0, 1, 2, 2]})
        code, report, _ = invoke(capsys, "entropy", "--partition", str(partition))
        assert code == 0
        assert report["command"] == "entropy"
        assert report["version"] == __version__
        assert report["payload"]["logical_entropy"] == "5/8"
        assert report["payload"]["max_logical_entropy"] == "3/4"
        assert report["payload"]["shannon_entropy"] == pytest.approx(1.5)

    def test_optimal_tree(self, capsys, write_json):
        labeling = write_json("f.json", {"n": 2, "labels": [0, 1, 1, 0]})
        code, report, _ = invoke(capsys, "tree", "optimal", "--labeling", str(labeling))
        assert code == 0
        assert report["payload"]["average_depth"] == "2/1"

    def test_greedy_tree(self, capsys, write_json):
        labeling = write_json("f.json", {"n": 2, "labels": [0, 1, 0, 1]})
        code, report, _ = invoke(capsys, "tree", "greedy", "--labeling", str(labeling))
        assert code == 0
        assert report["payload"]["tree"] == {"bit": 1, "zero": {"leaf": 0}, "one": {"leaf": 1}}

    def test_malformed_json_is_reported(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        path.write_text("{", encoding="utf-8")
        code, _, err = invoke(capsys, "entropy", "--partition", str(path))
        assert code == 1
        assert "error[io]: malformed input" in err
        assert "at offset 1" in err


class TestCodd:
    def test_encode_then_decode(self, capsys, tmp_path):
        binary = tmp_path / "d.bin"
        code, report, _ = invoke(capsys, "codd", "encode", "--expr", "D0(L[0], L[1])", "--out", str(binary))
        assert code == 0
        assert report["payload"]["bits"] == 112
        code, report, _ = invoke(capsys, "codd", "decode", "--in", str(binary))
        assert code == 0
        assert report["payload"]["expr"] == "D0(L[0], L[1])"
        assert report["payload"]["size"] == 1

    def test_encode_tree(self, capsys, write_json):
        tree = write_json("t.json", {"n": 2, "tree": {"bit": 0, "zero": {"leaf": 0}, "one": {"leaf": 2}}})
        code, report, _ = invoke(capsys, "codd", "encode", "--tree", str(tree))
        assert code == 0
        assert report["payload"]["expr"] == "D0(L[00], L[10])"

    def test_decode_of_empty_file(self, capsys, tmp_path):
        binary = tmp_path / "empty.bin"
        binary.write_bytes(b"")
        code, report, err = invoke(capsys, "codd", "decode", "--in", str(binary))
        assert code == 1
        assert report is None
        assert "decode error at offset 0" in err

    def test_eval_identity(self, capsys):
        code, report, _ = invoke(capsys, "codd", "eval", "--expr", "S K K", "--arg", "L[01]")
        assert code == 0
        assert report["payload"]["status"] == "normalized"
        assert report["payload"]["expr"] == "L[01]"
        assert report["payload"]["steps"] == 2

    def test_eval_reports_fuel_exhaustion(self, capsys):
        omega = "S (S K K) (S K K) (S (S K K) (S K K))"
        code, report, _ = invoke(capsys, "codd", "eval", "--expr", omega, "--fuel", "50")
        assert code == 0
        assert report["payload"] == {"status": "fuel-exhausted", "steps": 50}

    def test_eval_writes_normal_form(self, capsys, tmp_path):
        binary = tmp_path / "nf.bin"
        code, _, _ = invoke(capsys, "codd", "eval", "--expr", "K L[1] L[0]", "--out", str(binary))
        assert code == 0
        code, report, _ = invoke(capsys, "codd", "decode", "--in", str(binary))
        assert report["payload"]["expr"] == "L[1]"

    def test_memoize_largest_repeat(self, capsys):
        expr = "(S D1(L[0], L[1])) (S D2(L[0], L[1]))"
        code, report, _ = invoke(capsys, "codd", "memoize", "--expr", expr)
        assert code == 0
        assert report["payload"]["repeats"] == [{"pattern": "S", "occurrences": 2}]
        assert report["payload"]["after"]["expr"] == "(((SP S) D1(L[0], L[1])) D2(L[0], L[1]))"
        assert report["payload"]["after"]["unfolded"] <= report["payload"]["before"]["unfolded"]

    def test_unparseable_expression(self, capsys):
        code, _, err = invoke(capsys, "codd", "eval", "--expr", "S (K")
        assert code == 1
        assert err.startswith("error[validation]: cannot parse expression")


class TestPatternCheck:
    def test_intensity(self, capsys, write_json):
        p = write_json("p.json", {"n": 2, "labels": [0, 0, 1, 1]})
        f = write_json("f.json", {"n": 2, "labels": [0, 1, 2, 3]})
        rho = write_json("rho.json", {"n": 2, "default_weight": "1"})
        code, report, _ = invoke(capsys, "pattern", "check", "--p", str(p), "--f", str(f), "--rho", str(rho))
        assert code == 0
        assert report["payload"]["is_pattern"] is False
        assert report["payload"]["intensity"] == "2/9"
        assert report["payload"]["runtime_refines"] is None

    def test_approximate_with_runtime(self, capsys, write_json):
        p = write_json("p.json", {"n": 2, "labels": [0, 0, 0, 1]})
        f = write_json("f.json", {"n": 2, "labels": [0, 1, 2, 3]})
        rho = write_json("rho.json", {"n": 2, "overrides": [[0, 1, "1"], [0, 2, "1"], [0, 3, "1"]]})
        d = write_json("d.json", {"n": 2, "mass": ["1/4"] * 4})
        argv = ["pattern", "check", "--p", str(p), "--f", str(f), "--rho", str(rho), "--dist", str(d)]
        code, report, _ = invoke(capsys, *argv, "--slack", "3")
        assert report["payload"]["is_pattern"] is True
        assert report["payload"]["runtime_factor"] == "4/3"
        code, report, _ = invoke(capsys, *argv, "--slack", "2")
        assert report["payload"]["is_pattern"] is False


class TestExperiments:
    def test_correlation_is_byte_identical_across_runs(self, capsys, tmp_path):
        argv = ["synsem", "correlate", "--n", "3", "--pairs", "6", "--seed", "7"]
        first = invoke(capsys, *argv, "--out", str(tmp_path / "r.json"), "--csv", str(tmp_path / "r.csv"))
        second = invoke(capsys, *argv, "--jobs", "2")
        assert first[0] == second[0] == 0
        assert first[1] == second[1]
        assert (tmp_path / "r.json").read_text(encoding="utf-8") == json.dumps(first[1], sort_keys=True, indent=2) + "\n"
        header = (tmp_path / "r.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "pair_id,semantic,syn_entropy,syn_depth"
        assert first[1]["config"]["seed"] == 7

    def test_grow_trace(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        code, report, _ = invoke(capsys, "grow", "--n", "3", "--steps", "20", "--seed", "1", "--trace", str(trace))
        assert code == 0
        assert report["payload"]["decreases"] == 0
        assert len(report["payload"]["entries"]) == 21
        assert trace.read_text(encoding="utf-8").splitlines()[0] == "step,size,entropy_num,entropy_den"

    def test_grow_ensemble(self, capsys, tmp_path):
        table = tmp_path / "table.csv"
        code, report, _ = invoke(capsys, "grow", "ensemble", "--n", "3", "--sizes", "0..3", "--samples", "2", "--out", str(table))
        assert code == 0
        assert [row["size"] for row in report["payload"]["table"]] == [0, 1, 2, 3]
        assert table.read_text(encoding="utf-8").startswith("size,samples,mean_entropy,q10,q50,q90\n")

    def test_grow_profile(self, capsys, tmp_path):
        code, report, _ = invoke(capsys, "grow", "profile", "--n", "3", "--size", "4", "--samples", "10", "--csv", str(tmp_path / "h.csv"))
        assert code == 0
        assert sum(report["payload"]["histogram"]["counts"]) == 10

    def test_record_timing(self, capsys):
        code, report, _ = invoke(capsys, "grow", "--n", "2", "--steps", "1", "--record-timing")
        assert code == 0
        assert report["duration_seconds"] >= 0

    def test_out_of_range_parameter(self, capsys):
        code, _, err = invoke(capsys, "synsem", "correlate", "--n", "9")
        assert code == 1
        assert err.startswith("error[validation]: --n: ")

    def test_jobs_must_be_positive(self, capsys):
        assert run(["grow", "--jobs", "0"]) == 2
        assert "--jobs" in capsys.readouterr().err


class TestUsage:
    def test_unknown_flag(self, capsys):
        assert run(["entropy", "--bogus"]) == 2

    def test_missing_subcommand(self, capsys):
        assert run([]) == 2

    def test_environment_does_not_change_a_run(self, capsys, monkeypatch):
        argv = ["grow", "--n", "3", "--steps", "5", "--seed", "1"]
        plain = invoke(capsys, *argv)
        monkeypatch.setenv("CODD_LAB_JOBS", "0")
        monkeypatch.setenv("CODD_LAB_LOGGING__CONSOLE_LEVEL", "LOUD")
        assert invoke(capsys, *argv)[:2] == plain[:2]

    def test_log_file_flag(self, capsys, tmp_path):
        log_file = tmp_path / "run.log"
        try:
            code, _, _ = invoke(capsys, "grow", "--n", "2", "--steps", "2", "--log-file", str(log_file))
            assert code == 0
            assert log_file.exists()
        finally:
            logger = logging.getLogger(LOGGER_NAME)
            for handler in [h for h in logger.handlers if h.get_name() == "file"]:
                logger.removeHandler(handler)
                handler.close()

    @pytest.mark.parametrize("argv", [["--help"], ["--version"], ["grow", "ensemble", "--help"]])
    def test_help_and_version(self, capsys, argv):
        assert run(argv) == 0

    @pytest.mark.parametrize("text, sizes", [("1..3", (1, 2, 3)), ("0,5,2", (0, 5, 2))])
    def test_parse_sizes(self, text, sizes):
        assert parse_sizes(text) == sizes
