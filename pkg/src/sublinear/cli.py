"""Command-line entry point.

Every subcommand reads a JSON config (``--config``), writes its reports to
``--out`` and returns an exit status: 0 success, 1 verification failure,
2 input or hypothesis error, 3 policy error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bounds import verify_theorem_2_1, verify_theorem_2_2
from .dependence import MonotoneTestGrid, estimate_K
from .documents import load_family, read_json
from .errors import AtomLimitError, HypothesisError, PolicyError, StructuralError
from .experiments import (MarginalSet, LemmaSeriesReport, SeriesConfig, SeriesReport, WLLNReport,
                          complete_convergence_report, lemma32_check, lemma33_check, wlln_experiment)
from .soak import run_soak, soak_row
from .sublinear_core import check_axioms
from .transforms import SlowlyVaryingFn, check_lemma31

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_POLICY = 0, 1, 2, 3
SOAK_COLUMNS = ("seed", "n", "p", "eps_or_x", "lhs", "rhs", "slack", "branch")


def _plain(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True)


def write_json(path: Path, obj):
    path.write_text(json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_csv(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row[c]) for c in columns])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _family(cfg: dict, base: Path, key: str = "family"):
    if key not in cfg:
        raise StructuralError(f"config needs a {key!r} entry")
    return load_family(read_json(cfg[key], base))


def _grid(doc):
    if doc is None:
        return None
    return MonotoneTestGrid.build(doc["thresholds"], doc["widths"])


def cmd_axioms(cfg, base, out, args) -> int:
    F = _family(cfg, base).family
    probes = int(cfg.get("probes", 100))
    report = check_axioms(F, probes, args.seed)
    write_json(out / "axioms.json", {"family": F.to_dict(), **report.to_dict()})
    return EXIT_OK if report.passed else EXIT_FAIL


def _instance_reports(cfg, base, args):
    """Reports for explicit instances listed under ``instances``."""
    for i, inst in enumerate(cfg["instances"]):
        doc = _family(inst, base)
        if doc.X is None:
            raise StructuralError(f"instance {i} has no random vector values")
        theorem = str(inst.get("theorem", cfg.get("theorem", "2.1")))
        two_sided = bool(inst.get("two_sided", False))
        cert = doc.certificate
        if cert is None:
            if args.assert_mode:
                raise PolicyError("cannot assert on estimated K")
            cert = estimate_K(doc.family, doc.X, direction="both")
        level = float(inst["eps"] if theorem == "2.1" else inst["x"])
        p = float(inst["p"])
        verify = verify_theorem_2_1 if theorem == "2.1" else verify_theorem_2_2
        report = verify(doc.family, doc.X, level, p, cert, two_sided)
        row = {"seed": i, "n": doc.X.n, "p": p, "eps_or_x": level, "lhs": report.lhs,
               "rhs": report.rhs, "slack": report.slack, "branch": report.branch}
        yield row, report


def _soak_reports(cfg, args):
    soak = cfg["soak"]
    theorem = str(soak.get("theorem", cfg.get("theorem", "2.1")))
    if theorem not in ("2.1", "2.2"):
        raise HypothesisError(f"unknown theorem {theorem!r}")
    count = int(soak.get("count", 1000))
    if count < 1:
        raise HypothesisError("soak count must be positive")
    for i, inst, report in run_soak(theorem, count, args.seed, bool(soak.get("two_sided", False))):
        yield soak_row(i, inst, report), report


def cmd_verify_bounds(cfg, base, out, args) -> int:
    if "instances" in cfg:
        stream = _instance_reports(cfg, base, args)
    elif "soak" in cfg:
        stream = _soak_reports(cfg, args)
    else:
        raise StructuralError("config needs 'instances' or 'soak'")
    rows, failures, branches = [], 0, {}
    max_ratio = 0.0
    with open(out / "bounds.jsonl", "w", encoding="utf-8") as fh:
        for row, report in stream:
            rows.append(row)
            fh.write(_dumps(report.to_dict()) + "\n")
            failures += report.failed
            branches[report.branch] = branches.get(report.branch, 0) + 1
            if report.branch == "asserted" and report.rhs > 0:
                max_ratio = max(max_ratio, report.lhs / report.rhs)
    write_csv(out / "bounds.csv", SOAK_COLUMNS, rows)
    total = len(rows)
    summary = {"instances": total, "failures": failures, "branches": branches,
               "non_vacuous_fraction": branches.get("asserted", 0) / total if total else 0.0,
               "max_asserted_lhs_over_rhs": max_ratio, "seed": args.seed}
    write_json(out / "bounds_summary.json", summary)
    return EXIT_FAIL if failures else EXIT_OK


def cmd_estimate_k(cfg, base, out, args) -> int:
    doc = _family(cfg, base)
    if doc.X is None:
        raise StructuralError("family document has no random vector values")
    direction = cfg.get("direction", "both")
    est = estimate_K(doc.family, doc.X, _grid(cfg.get("grid")), direction)
    result = {"estimate": est.to_dict(),
              "certificate": doc.certificate.to_dict() if doc.certificate else None}
    write_json(out / "estimate_k.json", result)
    return EXIT_OK


def cmd_wlln(cfg, base, out, args) -> int:
    try:
        marg = MarginalSet.from_dict(cfg["marginals"])
        n_grid, eps = cfg["n_grid"], float(cfg["eps"])
    except KeyError as exc:
        raise HypothesisError(f"wlln config is missing {exc}") from exc
    report: WLLNReport = wlln_experiment(marg, n_grid, eps, cfg.get("delta"))
    write_csv(out / "wlln.csv", WLLNReport.CSV_COLUMNS, report.records)
    write_json(out / "wlln_summary.json", report.to_dict())
    return EXIT_OK


def cmd_series(cfg, base, out, args) -> int:
    report: SeriesReport = complete_convergence_report(SeriesConfig.from_dict(cfg))
    write_csv(out / "series.csv", SeriesReport.CSV_COLUMNS, report.records)
    write_json(out / "series_summary.json", report.to_dict())
    return EXIT_OK


def _lemma(entry, base):
    which = str(entry.get("lemma"))
    l = SlowlyVaryingFn.from_dict(entry.get("l", {"kind": "one"}))
    if which == "3.1":
        rep = check_lemma31(l, float(entry["r"]), int(entry.get("k_max", 30)))
        return rep.to_dict(), True
    if which in ("3.2", "3.3"):
        doc = _family(entry, base)
        if doc.X is None or doc.X.n != 1:
            raise StructuralError("lemma checks need a single-coordinate random variable")
        if which == "3.2":
            rep: LemmaSeriesReport = lemma32_check(
                doc.family, doc.X, float(entry["p"]), float(entry["alpha"]), l,
                float(entry.get("c0", 1.0)), float(entry.get("theta", 2.0)),
                int(entry.get("N", 1000)))
        else:
            rep = lemma33_check(doc.family, doc.X, float(entry["p"]), float(entry["alpha"]),
                                float(entry["s"]), float(entry.get("mu", 0.5)), l,
                                int(entry.get("N", 1000)))
        return rep.to_dict(), all(rep.checks.values())
    raise HypothesisError(f"unknown lemma {which!r}")


def cmd_lemmas(cfg, base, out, args) -> int:
    entries = cfg.get("checks", [cfg])
    results, ok = [], True
    for entry in entries:
        try:
            result, passed = _lemma(entry, base)
        except KeyError as exc:
            raise HypothesisError(f"lemma entry is missing {exc}") from exc
        results.append({"lemma": str(entry.get("lemma")), "passed": passed, "report": result})
        ok &= passed
    write_json(out / "lemmas.json", {"results": results})
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "axioms": cmd_axioms,
    "verify-bounds": cmd_verify_bounds,
    "estimate-k": cmd_estimate_k,
    "wlln": cmd_wlln,
    "series": cmd_series,
    "lemmas": cmd_lemmas,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sublinear",
                                     description="Sub-linear expectation checks and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides the config's 'seed'; default 0)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--assert", dest="assert_mode", action="store_true", default=True,
                          help="assert bounds (requires certified K; default)")
        mode.add_argument("--report-only", dest="assert_mode", action="store_false",
                          help="report slack without asserting")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg_path = args.config
        if not cfg_path.is_file():
            raise StructuralError(f"config file not found: {cfg_path}")
        cfg = read_json(cfg_path)
        if not isinstance(cfg, dict):
            raise StructuralError("config must be a JSON object")
        if args.seed is None:
            args.seed = int(cfg.get("seed", 0))
        if not 0 <= args.seed < 2**64:
            raise StructuralError("seed must be an unsigned 64-bit integer")
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, cfg_path.parent, args.out, args)
    except PolicyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except (StructuralError, AtomLimitError, HypothesisError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
