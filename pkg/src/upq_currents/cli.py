"""Command line entry point: run suites, write JSON/CSV reports and SVG plots."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .checks import SUITES, SuiteResult, run_suites
from .config import SUITES as SUITE_NAMES
from .config import RunConfig, load_config, parse_eps
from .errors import ConfigInvalid, SuiteFailed

SCHEMA_VERSION = 1
log = logging.getLogger("upq_currents")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="upq-currents", description="Run the U(p,q) verification suites.")
    ap.add_argument("--suite", choices=SUITE_NAMES)
    ap.add_argument("--p", type=int)
    ap.add_argument("--q", type=int)
    ap.add_argument("--eps", help="comma separated signs, e.g. '+,-' or '1,-1'")
    ap.add_argument("--degree", type=int, help="Bargmann truncation degree D")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--window-min", type=float)
    ap.add_argument("--window-max", type=float)
    ap.add_argument("--out-dir")
    ap.add_argument("--config", help="flat YAML file with the same keys as the flags")
    ap.add_argument("--no-plots", action="store_true", help="skip SVG output")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    base = load_config(args.config) if args.config else {}
    flags = {
        "suite": args.suite, "p": args.p, "q": args.q, "degree": args.degree, "seed": args.seed,
        "samples": args.samples, "window_min": args.window_min, "window_max": args.window_max,
        "out_dir": args.out_dir,
        "eps": parse_eps(args.eps) if args.eps is not None else None,
    }
    merged = {**base, **{k: v for k, v in flags.items() if v is not None}}
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from None


def build_report(cfg: RunConfig, results: list[SuiteResult]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "passed": all(r.passed for r in results),
        "suites": [
            {
                "name": r.name,
                "passed": r.passed,
                "rows": [row.to_dict() for row in r.rows],
                **({"tables": r.tables} if r.tables else {}),
            }
            for r in results
        ],
    }


def report_csv(results: list[SuiteResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "check", "anchor", "estimate", "tolerance", "verdict", "seed"])
    for r in results:
        for row in r.rows:
            d = row.to_dict()
            w.writerow([r.name, d["check"], d["anchor"], _cell(d["estimate"]), _cell(d["tolerance"]),
                        d["verdict"], "" if d["seed"] is None else d["seed"]])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return json.dumps(v)
    return str(v)


def write_plots(results: list[SuiteResult], out: Path) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "upq-currents"
    written = []
    for r in results:
        for key, plot in sorted(r.plots.items()):
            fig, ax = plt.subplots(figsize=(5.5, 3.8))
            kind = plot["kind"]
            if kind == "errorbar":
                ax.errorbar(plot["x"], plot["y"], yerr=plot["yerr"], fmt="o", capsize=3, label="estimate")
                b, a = plot["line"]
                xs = [min(plot["x"]), max(plot["x"])]
                ax.plot(xs, [b + a * x for x in xs], "-", label=f"fit, slope {a:.3f}")
                ax.legend()
            elif kind == "bar":
                ax.bar(plot["x"], plot["y"])
                if plot.get("log") and min(plot["y"]) > 0:
                    ax.set_yscale("log")
            else:
                for label, ys in plot["series"].items():
                    ax.plot(plot["x"], ys, "o-", label=label)
                if kind == "semilogy":
                    ax.set_yscale("log")
                elif kind == "semilogx":
                    ax.set_xscale("log")
                if "ref" in plot:
                    ax.axhline(plot["ref"], color="k", ls="--", lw=1, label="closed form")
                ax.legend()
            ax.set_xlabel(plot["xlabel"])
            ax.set_ylabel(plot["ylabel"])
            ax.set_title(plot["title"])
            fig.tight_layout()
            path = out / f"{r.name}_{key}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path.name)
    return written


def run(cfg: RunConfig, plots: bool = True) -> tuple[dict, list[SuiteResult]]:
    results = []
    for name in (list(SUITES) if cfg.suite == "all" else [cfg.suite]):
        log.info("running suite %s", name)
        results.extend(run_suites(cfg.with_overrides(suite=name)))
    report = build_report(cfg, results)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "summary.csv").write_text(report_csv(results))
    if plots:
        write_plots(results, out)
    return report, results


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report, results = run(cfg, plots=not args.no_plots)
    for r in results:
        n_fail = sum(not row.passed for row in r.rows)
        print(f"{r.name:10s} {'PASS' if r.passed else 'FAIL'}  {len(r.rows) - n_fail}/{len(r.rows)} checks")
        for row in r.rows:
            if not row.passed:
                print(f"    failed: {row.check} estimate={row.to_dict()['estimate']} tolerance={row.tolerance}")
    print(f"report written to {Path(cfg.out_dir) / 'report.json'}")
    if not report["passed"]:
        err = SuiteFailed(", ".join(r.name for r in results if not r.passed))
        print(f"suite failed: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
