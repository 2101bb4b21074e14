import csv
import io
import json
import math

import pytest

from levy_lab import __version__
from levy_lab.cli import ConfigError, ExperimentConfig, main, run
from levy_lab.report import CSV_HEADER, ExperimentReport, emit_report, to_csv, to_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestReportFormat:
    def test_empty_records(self):
        rep = ExperimentReport("reduce", {"seed": 1})
        data = json.loads(to_json(rep))
        assert data["records"] == []
        assert data["summary"]["verdict"] == "PASS"

    def test_round_trip(self):
        rep = ExperimentReport("x", {"a": 1}, records=[{"v": 0.1 + 0.2, "w": 1e-300, "z": 2.0, "b": True}])
        assert json.loads(to_json(rep)) == rep.to_dict()

    def test_floats_stay_floats(self):
        text = to_json({"a": 2.0, "b": 3})
        assert '"a": 2.0' in text and '"b": 3' in text

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            to_json({"a": math.nan})

    def test_csv_header_and_row(self):
        row = {"n": 2048, "epsilon": 0.5, "median": 1.27, "upper_tail": 0.0, "two_sided_tail": 0.0,
               "bound": 2 * math.exp(-4), "pass": True, "extra": 1}
        text = to_csv(ExperimentReport("levy-report", {}, records=[row, {"decay": {}}]))
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER) == "n,epsilon,median,upper_tail,two_sided_tail,bound,pass"
        assert len(lines) == 2
        parsed = next(csv.DictReader(io.StringIO(text)))
        assert parsed["bound"].startswith("0.036631")
        assert parsed["pass"] == "true"

    def test_emit_io_error(self, tmp_path):
        bad = tmp_path / "missing" / "out.json"
        with pytest.raises(OSError, match="missing"):
            emit_report(ExperimentReport("x", {}), "json", bad)

    def test_emit_writes(self, tmp_path):
        path = tmp_path / "r.json"
        text = emit_report(ExperimentReport("x", {}), "json", path)
        assert path.read_text() == text


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs,field",
        [
            (dict(command="reduce"), "n"),
            (dict(command="reduce", n=0), "n"),
            (dict(command="diameter", n=4), "k"),
            (dict(command="diameter", n=4, k=5), "k"),
            (dict(command="chain", n=4, num_samples=0), "num_samples"),
            (dict(command="concentrate", n=4, epsilons=[0.5], num_samples=10), "num_samples"),
            (dict(command="concentrate", n=4, epsilons=[0.5, 0.1], num_samples=1000), "epsilons"),
            (dict(command="levy-report", ns=[8, 4], epsilons=[0.5], num_samples=1000), "ns"),
            (dict(command="reduce", n=3, output_format="csv"), "output_format"),
            (dict(command="reduce", n=3, group="symplectic"), "group"),
            (dict(command="teleport"), "command"),
        ],
    )
    def test_invalid(self, kwargs, field):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig(**kwargs).validate()
        assert info.value.field == field

    def test_default_seed(self):
        assert ExperimentConfig("reduce", n=2).seed == 0xC0FFEE


class TestCommands:
    def test_reduce_n1(self, capsys):
        code, out, _ = run_cli(capsys, "reduce", "--n", "1", "--seed", "1")
        data = json.loads(out)
        rec = data["records"][0]
        assert code == 0
        assert rec["branch"] == "trivial-k<=2"
        assert rec["distance"] <= 2.0
        assert data["version"] == __version__

    def test_reduce_generic(self, capsys):
        code, out, _ = run_cli(capsys, "reduce", "--n", "8", "--k", "6", "--seed", "2")
        rec = json.loads(out)["records"][0]
        assert code == 0
        assert rec["branch"] == "generic-rotation"
        assert rec["distance"] <= 0.5 + 1e-9

    def test_diameter(self, capsys):
        code, out, _ = run_cli(capsys, "diameter", "--k", "16", "--n", "16", "--samples", "200",
                               "--refine-budget", "5", "--seed", "7")
        rec = json.loads(out)["records"][0]
        assert code == 0
        assert rec["constructive_sup"] <= 0.25 + 1e-9

    def test_chain(self, capsys):
        code, out, _ = run_cli(capsys, "chain", "--n", "6", "--samples", "3")
        data = json.loads(out)
        assert code == 0
        assert len(data["records"]) == 3
        assert all(r["total_distance_bound"] <= 4 for r in data["records"])

    def test_concentrate_csv(self, capsys):
        code, out, _ = run_cli(capsys, "concentrate", "--n", "64", "--eps", "0.3,0.6",
                               "--samples", "1000", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert [r["epsilon"] for r in rows] == ["0.3", "0.6"]

    def test_orthogonal_levy_report(self, capsys):
        code, out, _ = run_cli(capsys, "levy-report", "--group", "orthogonal", "--ns", "64,128",
                               "--eps", "0.5", "--samples", "1000", "--observable", "trace")
        assert code == 0
        assert json.loads(out)["config"]["group"] == "orthogonal"

    def test_hilbert_schmidt_metric(self, capsys):
        code, out, _ = run_cli(capsys, "concentrate", "--n", "32", "--eps", "0.5", "--samples", "1000",
                               "--metric", "hilbert-schmidt")
        data = json.loads(out)
        assert code == 0
        # Haar mean of ||u - 1||_2 / n is close to sqrt(2 / n).
        assert data["records"][0]["median"] == pytest.approx(math.sqrt(2 / 32), rel=0.05)

    def test_selftest_small(self, capsys):
        code, out, _ = run_cli(capsys, "haar-selftest", "--samples", "300", "--seeds", "1,2")
        data = json.loads(out)
        assert {r["check"] for r in data["records"]} >= {"trace-moment", "u1-uniformity", "left-invariance"}
        assert code in (0, 1)
        assert (code == 0) == (data["summary"]["verdict"] == "PASS")

    def test_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "diameter", "--k", "9", "--n", "4")
        assert code == 2
        assert "k:" in err

    def test_argparse_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["reduce"])
        assert info.value.code == 2

    def test_io_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "reduce", "--n", "3", "--output", str(tmp_path / "no" / "x.json"))
        assert code == 3
        assert "no" in err

    def test_failure_exit(self, monkeypatch, capsys):
        import levy_lab.cli as cli

        def failing(cfg, report):
            report.checks.append({"name": "forced", "pass": False})

        monkeypatch.setitem(cli._DISPATCH, "reduce", failing)
        code, out, _ = run_cli(capsys, "reduce", "--n", "3")
        assert code == 1
        assert json.loads(out)["summary"]["failed"] == ["forced"]


class TestDeterminism:
    def test_byte_identical_files(self, tmp_path, capsys):
        paths = [tmp_path / f"r{i}.json" for i in range(2)]
        for p in paths:
            assert main(["levy-report", "--ns", "32,64", "--eps", "0.3,0.5", "--samples", "1000",
                         "--seed", "3", "--output", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_echo_reproduces(self):
        first = run(ExperimentConfig("diameter", n=6, k=4, num_samples=5, refine_budget=10, seed=11))
        again = run(ExperimentConfig(**first.config))
        assert to_json(first) == to_json(again)

    def test_timing_opt_in(self):
        rep = run(ExperimentConfig("reduce", n=3), record_timing=True)
        assert "wall_clock_seconds" in rep.to_dict()
        assert "wall_clock_seconds" not in run(ExperimentConfig("reduce", n=3)).to_dict()

    def test_thread_count_invariant(self, monkeypatch):
        cfg = dict(command="concentrate", n=16, epsilons=[0.2], num_samples=1000, sampler="dense")
        monkeypatch.setenv("LEVY_LAB_THREADS", "3")
        a = to_json(run(ExperimentConfig(**cfg)))
        monkeypatch.setenv("LEVY_LAB_THREADS", "1")
        assert to_json(run(ExperimentConfig(**cfg))) == a

    def test_bad_thread_env(self, monkeypatch):
        monkeypatch.setenv("LEVY_LAB_THREADS", "zero")
        with pytest.raises(ValueError):
            run(ExperimentConfig("diameter", n=3, k=3, num_samples=2, refine_budget=0))

    def test_bad_thread_env_cli(self, monkeypatch, capsys):
        monkeypatch.setenv("LEVY_LAB_THREADS", "-2")
        code, _, err = run_cli(capsys, "reduce", "--n", "3")
        assert code == 2
        assert "LEVY_LAB_THREADS" in err
