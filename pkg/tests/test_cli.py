import csv
import json

import pytest

from upq_currents import checks, cli
from upq_currents.checks import SuiteResult
from upq_currents.config import RunConfig


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_group_suite_lists_dimensions(tmp_path, capsys):
    assert cli.main(["--suite", "group", "--p", "1", "--q", "2", "--out-dir", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert rep["schema_version"] == 1 and rep["passed"]
    rows = rep["suites"][0]["rows"]
    dims = {r["check"]: r["estimate"] for r in rows if r["check"].startswith("dimension.")}
    assert dims["dimension.full.U(1,2)"] == 9
    assert dims["dimension.heisenberg.U(1,2)"] == 3
    assert dims["dimension.iwasawa.U(1,2)"] == 4
    for r in rows:
        assert {"anchor", "estimate", "tolerance", "verdict"} <= set(r)
    assert "group" in capsys.readouterr().out
    with open(tmp_path / "summary.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["suite", "check", "anchor", "estimate", "tolerance", "verdict", "seed"]


def test_special_suite_growth_slope(tmp_path):
    cfg = RunConfig(suite="special", window_min=1e-3, out_dir=str(tmp_path))
    rep, _ = cli.run(cfg, plots=True)
    slope = next(r for r in rep["suites"][0]["rows"] if r["check"] == "condition_i.growth_slope")
    assert abs(slope["estimate"] - 1) <= 0.05
    assert (tmp_path / "special_condition_i_growth.svg").exists()


def test_runs_are_byte_identical(tmp_path):
    cfg = RunConfig(suite="all", seed=42, samples=2000, out_dir=str(tmp_path))
    cli.run(cfg)
    first = {p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())}
    cli.run(cfg)
    second = {p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())}
    assert first == second
    assert {"report.json", "summary.csv"} <= set(first) and any(n.endswith(".svg") for n in first)


def test_config_file_and_flags(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("suite: iwasawa\nseed: 5\nsamples: 500\n")
    args = cli.build_parser().parse_args(["--config", str(f), "--seed", "9", "--eps", "-"])
    cfg = cli.config_from_args(args)
    assert (cfg.suite, cfg.seed, cfg.samples, cfg.eps) == ("iwasawa", 9, 500, (-1,))


@pytest.mark.parametrize("argv", [["--p", "3", "--q", "2"], ["--eps", "x"], ["--degree", "2"]])
def test_bad_config_exit_code(tmp_path, argv, capsys):
    assert cli.main(argv + ["--suite", "group", "--out-dir", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_failing_suite_exit_code(tmp_path, monkeypatch, capsys):
    def broken(cfg):
        res = SuiteResult("group")
        res.add("always", "a failing row", 1.0, 0.0, False, 0)
        return res

    monkeypatch.setitem(checks.SUITES, "group", broken)
    assert cli.main(["--suite", "group", "--out-dir", str(tmp_path), "--no-plots"]) == 1
    assert "suite failed" in capsys.readouterr().err
    assert not _report(tmp_path)["passed"]
