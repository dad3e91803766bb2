"""Command-line interface.

Subcommands: detect (run the tests on a CSV column, optionally with
recursive segmentation), deseasonalize (subtract monthly medians),
simulate (run a size/power study from a config file), critval
(asymptotic critical value). Errors leave as a JSON document on stderr
with a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .asymptotics import kolmogorov_quantile
from .detectors import TEST_NAMES, decide, run_test
from .harness import (
    load_study_config,
    parse_study_config,
    results_csv_text,
    run_power_experiment,
    run_size_experiment,
)
from .nuisance import DegenerateNuisanceError
from .ustat import hl_split_median

MIN_SEGMENT = 8  # shortest stretch the tests are allowed to look at


class CliError(Exception):
    def __init__(self, kind: str, message: str, details: Optional[dict] = None, code: int = 2):
        super().__init__(message)
        self.kind = kind
        self.details = details or {}
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2) with plain text
        raise CliError("usage", message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hlshift", description="Robust level-shift detection for time series")
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="run change-point tests on a CSV column")
    p_detect.add_argument("--input", required=True, help="CSV file with the series")
    p_detect.add_argument("--column", default=None, help="value column name or 0-based index")
    p_detect.add_argument("--tests", default="hle,cusum,wmw", help="comma list from hle,cusum,wmw")
    p_detect.add_argument("--policy", default="fixed", choices=("fixed", "adaptive"))
    p_detect.add_argument("--alpha", type=float, default=0.05)
    p_detect.add_argument("--recursive", type=int, default=0, metavar="DEPTH",
                          help="binary segmentation depth after a rejection")
    p_detect.add_argument("--format", default="json", choices=("json", "csv"))

    p_deseas = sub.add_parser("deseasonalize", help="subtract monthly medians from a series")
    p_deseas.add_argument("--input", required=True)
    p_deseas.add_argument("--month-column", required=True, help="month column name or 0-based index")
    p_deseas.add_argument("--column", default=None, help="value column name or 0-based index")
    p_deseas.add_argument("--output", required=True, help="where to write the adjusted CSV")

    p_sim = sub.add_parser("simulate", help="run a size/power study from a config file")
    p_sim.add_argument("--config", required=True, help="JSON (or TOML on 3.11+) study config")
    p_sim.add_argument("--output", required=True, help="where to write the results CSV")

    p_crit = sub.add_parser("critval", help="asymptotic critical value for a level")
    p_crit.add_argument("--alpha", type=float, required=True)

    return parser


def _read_csv_table(path: str) -> Tuple[Optional[List[str]], List[List[str]], int]:
    """Rows of a CSV file plus a sniffed header.

    Returns (header_or_None, data_rows, first_data_lineno). A header is
    assumed when any cell of the first row fails to parse as a number.
    """
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            raw = [row for row in csv.reader(fh)]
    except OSError as exc:
        raise CliError("input", f"could not read {path}: {exc.strerror}", {"path": path}) from None
    rows = [(i + 1, row) for i, row in enumerate(raw) if any(cell.strip() for cell in row)]
    if not rows:
        raise CliError("input", f"{path} contains no data rows", {"path": path})
    first = rows[0][1]

    def _numeric(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    if all(_numeric(c) for c in first if c.strip()):
        return None, [r for r in rows], rows[0][0]
    header = [c.strip() for c in first]
    return header, rows[1:], rows[1][0] if len(rows) > 1 else rows[0][0] + 1


def _column_index(header: Optional[List[str]], rows, column: Optional[str], *, role: str) -> int:
    width = max(len(r) for _, r in rows)
    if column is None:
        if width == 1:
            return 0
        raise CliError("usage", f"file has {width} columns; pick the {role} column with --column")
    col = column.strip()
    if header is not None and col in header:
        return header.index(col)
    try:
        idx = int(col)
    except ValueError:
        known = ", ".join(header) if header else "file has no header row"
        raise CliError("usage", f"unknown {role} column {column!r} ({known})") from None
    if not 0 <= idx < width:
        raise CliError("usage", f"{role} column index {idx} out of range 0..{width - 1}")
    return idx


def _parse_column(rows, idx: int, *, kind: str, path: str) -> np.ndarray:
    out = []
    for lineno, row in rows:
        if idx >= len(row):
            raise CliError("input", f"line {lineno}: row has no column {idx}", {"line": lineno, "path": path})
        cell = row[idx].strip()
        try:
            if kind == "month":
                value = int(cell)
                if not 1 <= value <= 12:
                    raise ValueError
            else:
                value = float(cell)
                if not math.isfinite(value):
                    raise ValueError
        except ValueError:
            want = "a month in 1..12" if kind == "month" else "a finite number"
            raise CliError(
                "input",
                f"line {lineno}: could not parse {cell!r} as {want}",
                {"line": lineno, "path": path},
            ) from None
        out.append(value)
    dtype = np.int64 if kind == "month" else np.float64
    return np.asarray(out, dtype=dtype)


def _report_node(report, values, start: int) -> dict:
    return {
        "statistic": report.statistic,
        "p_value": report.p_value,
        "change_point": start + report.change_point - 1,
        "shift_estimate": hl_split_median(values, report.change_point),
        "sigma_hat": report.sigma_hat,
        "u_hat_zero": report.u_hat_zero,
        "block_length": report.block_length,
        "block_policy": report.block_policy_name,
    }


def _segment_tree(values: np.ndarray, start: int, test: str, policy: str, alpha: float, depth: int) -> Optional[dict]:
    if values.shape[0] < MIN_SEGMENT:
        return None
    try:
        report = run_test(values, test, policy)
    except DegenerateNuisanceError:
        return None
    node = _report_node(report, values, start)
    node["segment_start"] = start
    node["segment_end"] = start + values.shape[0] - 1
    node["reject"] = decide(report, alpha)
    node["children"] = []
    if node["reject"] and depth > 0:
        k = report.change_point
        left = _segment_tree(values[:k], start, test, policy, alpha, depth - 1)
        right = _segment_tree(values[k:], start + k, test, policy, alpha, depth - 1)
        node["children"] = [c for c in (left, right) if c is not None]
    return node


def _flatten_tree(node: dict, test: str, depth: int, out: List[dict]) -> None:
    row = {"test": test, "depth": depth}
    row.update({k: node[k] for k in node if k != "children"})
    out.append(row)
    for child in node["children"]:
        _flatten_tree(child, test, depth + 1, out)


def _cmd_detect(args) -> int:
    tests = tuple(t.strip().lower() for t in args.tests.split(",") if t.strip())
    if not tests:
        raise CliError("usage", "--tests must name at least one test")
    for t in tests:
        if t not in TEST_NAMES:
            raise CliError("usage", f"unknown test {t!r}; expected a comma list from {','.join(TEST_NAMES)}")
    if len(set(tests)) != len(tests):
        raise CliError("usage", "--tests contains duplicates")
    if not 0.0 < args.alpha < 1.0:
        raise CliError("usage", f"--alpha must lie in (0, 1), got {args.alpha}")
    if args.recursive < 0:
        raise CliError("usage", "--recursive depth cannot be negative")

    header, rows, _ = _read_csv_table(args.input)
    idx = _column_index(header, rows, args.column, role="value")
    values = _parse_column(rows, idx, kind="value", path=args.input)
    if values.shape[0] < MIN_SEGMENT:
        raise CliError("input", f"need at least {MIN_SEGMENT} observations, got {values.shape[0]}")

    results = []
    for test in tests:
        try:
            report = run_test(values, test, args.policy)
        except DegenerateNuisanceError as exc:
            raise CliError("degenerate", f"{test}: {exc}", {"test": test}, code=3) from None
        entry = {"test": test}
        entry.update(_report_node(report, values, 1))
        entry["reject"] = decide(report, args.alpha)
        if args.recursive > 0:
            entry["segments"] = _segment_tree(values, 1, test, args.policy, args.alpha, args.recursive)
        results.append(entry)

    if args.format == "json":
        doc = {
            "schema_version": 1,
            "command": "detect",
            "input": args.input,
            "n": int(values.shape[0]),
            "alpha": args.alpha,
            "policy": args.policy,
            "results": results,
        }
        print(json.dumps(doc, indent=2, allow_nan=False))
        return 0

    flat: List[dict] = []
    for entry in results:
        if args.recursive > 0 and entry.get("segments") is not None:
            _flatten_tree(entry["segments"], entry["test"], 0, flat)
        else:
            row = {
                "test": entry["test"],
                "depth": 0,
                "segment_start": 1,
                "segment_end": int(values.shape[0]),
                "reject": entry["reject"],
            }
            row.update({k: entry[k] for k in (
                "statistic", "p_value", "change_point", "shift_estimate",
                "sigma_hat", "u_hat_zero", "block_length", "block_policy",
            )})
            flat.append(row)
    fields = (
        "test", "depth", "segment_start", "segment_end", "statistic", "p_value",
        "reject", "change_point", "shift_estimate", "sigma_hat", "u_hat_zero",
        "block_length", "block_policy",
    )
    writer = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in flat:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fields})
    return 0


def _cmd_deseasonalize(args) -> int:
    header, rows, _ = _read_csv_table(args.input)
    m_idx = _column_index(header, rows, args.month_column, role="month")
    if args.column is None and header is not None and max(len(r) for _, r in rows) == 2:
        v_idx = 1 - m_idx  # two columns: the other one is the value
    else:
        v_idx = _column_index(header, rows, args.column, role="value")
    if v_idx == m_idx:
        raise CliError("usage", "month and value columns must differ")
    months = _parse_column(rows, m_idx, kind="month", path=args.input)
    values = _parse_column(rows, v_idx, kind="value", path=args.input)

    medians = {}
    for month in sorted(set(int(m) for m in months)):
        medians[month] = float(np.median(values[months == month]))
    adjusted = values - np.asarray([medians[int(m)] for m in months])

    try:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if header is not None:
                writer.writerow(header)
            for (_, row), value in zip(rows, adjusted):
                out = list(row)
                out[v_idx] = repr(float(value))
                writer.writerow(out)
    except OSError as exc:
        raise CliError("output", f"could not write {args.output}: {exc.strerror}", {"path": args.output}) from None

    print(json.dumps({
        "schema_version": 1,
        "command": "deseasonalize",
        "input": args.input,
        "output": args.output,
        "rows": int(values.shape[0]),
        "monthly_medians": {str(m): medians[m] for m in medians},
    }, indent=2, allow_nan=False))
    return 0


def _cmd_simulate(args) -> int:
    try:
        doc = load_study_config(args.config)
    except OSError as exc:
        raise CliError("config", f"could not read {args.config}: {exc.strerror}", {"path": args.config}) from None
    except json.JSONDecodeError as exc:
        raise CliError("config", f"invalid JSON in {args.config}: {exc}", {"path": args.config}) from None
    except ValueError as exc:
        raise CliError("config", str(exc), {"path": args.config}) from None
    try:
        mode, plan = parse_study_config(doc)
    except ValueError as exc:
        raise CliError("config", str(exc), {"path": args.config}) from None

    def _nu_json(nu: float):
        return "inf" if math.isinf(nu) else nu

    if mode == "size":
        cfg = plan["config"]
        table = run_size_experiment(cfg, plan["seed"])
        text = results_csv_text(table)
        rows = len(table.rows)
        resolved = {
            "n": cfg.n,
            "replications": cfg.replications,
            "burn_in": cfg.burn_in,
            "critical_value": cfg.critical_value,
            "phis": list(cfg.phis),
            "nus": [_nu_json(v) for v in cfg.nus],
            "policies": list(cfg.policies),
        }
        cells = len(cfg.phis) * len(cfg.nus) * len(cfg.policies)
    else:
        configs = plan["configs"]
        curves = [run_power_experiment(cfg, plan["seed"]) for cfg in configs]
        text = results_csv_text(curves)
        rows = sum(len(c.heights) * 3 for c in curves)
        first = configs[0]
        resolved = {
            "n": first.n,
            "replications": first.replications,
            "burn_in": first.burn_in,
            "critical_value": first.critical_value,
            "shift_position": first.shift_position,
            "cells": [
                {
                    "phi": cfg.phi,
                    "nu": _nu_json(cfg.nu),
                    "policy": cfg.policy,
                    "heights": list(cfg.heights),
                }
                for cfg in configs
            ],
        }
        cells = len(curves)
    try:
        with open(args.output, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError("output", f"could not write {args.output}: {exc.strerror}", {"path": args.output}) from None
    print(json.dumps({
        "schema_version": 1,
        "command": "simulate",
        "mode": mode,
        "seed": plan["seed"],
        "config": resolved,
        "cells": cells,
        "rows": rows,
        "output": args.output,
    }, indent=2))
    return 0


def _cmd_critval(args) -> int:
    if not 0.0 < args.alpha < 1.0:
        raise CliError("usage", f"--alpha must lie in (0, 1), got {args.alpha}")
    print(format(kolmogorov_quantile(1.0 - args.alpha), ".4f"))
    return 0


_COMMANDS = {
    "detect": _cmd_detect,
    "deseasonalize": _cmd_deseasonalize,
    "simulate": _cmd_simulate,
    "critval": _cmd_critval,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        doc = {"error": {"type": exc.kind, "message": str(exc), "details": exc.details}}
        print(json.dumps(doc), file=sys.stderr)
        return exc.code
    except (ValueError, DegenerateNuisanceError) as exc:
        doc = {"error": {"type": "invalid", "message": str(exc), "details": {}}}
        print(json.dumps(doc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
