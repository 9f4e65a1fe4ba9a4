"""Command-line interface.

Subcommands::

    prodwheel solve   --scenario S [--format json|text] [--out F] [--timings]
    prodwheel curves  --scenario S --grid LO:HI:STEP [--kind cost|revenue|expansion] [--out F]
    prodwheel verify  [--scenario S] [--count N] [--seed U64] [--format text|json]
    prodwheel report  --scenario S [--format text|json] [--out F]

Exit codes: 0 success, 1 a duality check failed (``verify``), 2 invalid
scenario or arguments, 3 solver failure (a partial report is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .checks import LemmaReport
from .config import DEFAULT_CONFIG, SolverError
from .curves import expansion_path, revenue_curves, sample_cost_curves
from .funcspace import CobbDouglas, DomainError, Isoelastic, PowerSingleInput
from .markets import Monopoly, PerfectCompetition
from .profit import verify_lemmas
from .report import answers_text, format_number, run_wheel, to_json, to_text
from .scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``"lo:hi:step"`` to an ascending array including ``hi`` when it falls on the grid."""
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--grid must look like lo:hi:step, got {text!r}") from exc
    if not (step > 0 and hi > lo and math.isfinite(hi) and math.isfinite(lo)):
        raise UsageError(f"--grid needs lo < hi and step > 0, got {text!r}")
    count = int(math.floor((hi - lo) / step * (1 + 1e-12))) + 1
    if count > 1_000_000:
        raise UsageError(f"--grid has {count} points; limit is 1000000")
    return lo + step * np.arange(count)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text}")
    return value


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    report = run_wheel(scenario)
    timings = args.timings or bool(scenario.report.get("include_timings", False))
    data = report.as_dict(include_timings=timings)
    _emit(to_text(data) if args.format == "text" else to_json(data), args.out)
    return EXIT_OK if report.ok else EXIT_SOLVER


def cmd_report(args) -> int:
    scenario = load_scenario(args.scenario)
    report = run_wheel(scenario)
    answers = report.answers()
    _emit(to_json(answers) if args.format == "json" else answers_text(answers), args.out)
    return EXIT_OK if report.ok else EXIT_SOLVER


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(format_number(float(v)) if v is not None else "" for v in row)
    return buf.getvalue()


def cmd_curves(args) -> int:
    scenario = load_scenario(args.scenario)
    grid_text = args.grid or scenario.report.get("curve_grid")
    if not grid_text:
        raise UsageError("curves needs --grid lo:hi:step (or report.curve_grid in the scenario)")
    grid = parse_grid(grid_text)
    tech, W, cfg = scenario.technology, scenario.factor_prices, scenario.config
    failed = False
    if args.kind == "cost":
        points = sample_cost_curves(tech, W, grid, cfg)
        failed = any(p.error for p in points)
        text = _csv(["y", "AC", "AVC", "MC"], [(p.y, p.AC, p.AVC, p.MC) for p in points])
    elif args.kind == "revenue":
        try:
            points = revenue_curves(scenario.market, grid)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
        text = _csv(["Y", "TR", "AR", "MR"], points)
    else:
        path = expansion_path(tech, W, grid, cfg)
        failed = any(p.error for p in path)
        n = tech.input_count
        rows = [(p.y, *(p.demands if p.demands is not None else [math.nan] * n)) for p in path]
        text = _csv(["y", *(f"x{i + 1}" for i in range(n))], rows)
    _emit(text, args.out)
    return EXIT_SOLVER if failed else EXIT_OK


def random_lemma_scenarios(count: int, seed: int):
    """Random DRS Cobb-Douglas price-takers and isoelastic monopolists.

    Yields ``(label, technology, prices, market)``; the sequence depends only on
    ``seed``.
    """
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = int(rng.integers(2, 5))
        exps = rng.uniform(0.05, 1.0, n)
        exps *= rng.uniform(0.3, 0.9) / exps.sum()
        tech = CobbDouglas(float(rng.uniform(0.5, 2.0)), tuple(exps))
        W = tuple(rng.uniform(0.5, 5.0, n))
        yield f"pc-{k}", tech, W, PerfectCompetition(float(rng.uniform(0.5, 10.0)))
    for k in range(count):
        eta = float(rng.uniform(0.1, 0.9))
        if rng.random() < 0.5:
            tech = PowerSingleInput(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 1.0)))
            W = (float(rng.uniform(0.2, 5.0)),)
        else:
            n = int(rng.integers(2, 4))
            exps = rng.uniform(0.05, 1.0, n)
            exps *= rng.uniform(0.5, 1.0) / exps.sum()
            tech = CobbDouglas(float(rng.uniform(0.5, 2.0)), tuple(exps))
            W = tuple(rng.uniform(0.5, 5.0, n))
        yield f"monopoly-{k}", tech, W, Monopoly(Isoelastic(float(rng.uniform(0.5, 3.0)), eta))


def cmd_verify(args) -> int:
    if args.scenario:
        sc = load_scenario(args.scenario)
        cases = [(sc.name or Path(args.scenario).stem, sc.technology, sc.factor_prices,
                  sc.market, sc.config)]
    else:
        cases = [(*case, DEFAULT_CONFIG) for case in random_lemma_scenarios(args.count, args.seed)]
    results = []
    solver_failed = False
    for label, tech, W, market, cfg in cases:
        try:
            results.append((label, verify_lemmas(tech, W, market, cfg), None))
        except SolverError as exc:
            solver_failed = True
            results.append((label, LemmaReport(), str(exc)))

    if args.format == "json":
        payload = {"seed": args.seed if not args.scenario else None,
                   "cases": [{"label": label, "error": err, **report.as_dict()}
                             for label, report, err in results]}
        _emit(to_json(payload), args.out)
    else:
        lines = []
        for label, report, err in results:
            if err:
                lines.append(f"{label}: ERROR {err}")
                continue
            verdicts = ", ".join(
                f"{c.name}={c.verdict}" + (f"({format_number(c.max_residual)})" if c.values else "")
                for c in report.checks)
            lines.append(f"{label}: {'PASS' if report.passed else 'FAIL'} {verdicts}")
        passed = sum(1 for _, r, e in results if e is None and r.passed)
        lines.append(f"{passed}/{len(results)} scenarios passed")
        _emit("\n".join(lines) + "\n", args.out)
    if solver_failed:
        return EXIT_SOLVER
    return EXIT_OK if all(r.passed for _, r, _ in results) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodwheel",
        description="Cost minimisation, profit maximisation and duality checks for one firm.",
    )
    parser.add_argument("--version", action="version", version=f"prodwheel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, default):
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=formats, default=default)

    p = sub.add_parser("solve", help="run the full pipeline and print the report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--timings", action="store_true", help="include stage timings (not reproducible)")
    common(p, ["json", "text"], "json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("curves", help="export cost, revenue or expansion-path samples as CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid", help="output grid lo:hi:step")
    p.add_argument("--kind", choices=["cost", "revenue", "expansion"], default="cost")
    common(p, ["csv"], "csv")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("verify", help="check Shephard, Hotelling and consistency identities")
    p.add_argument("--scenario", help="check this scenario instead of random ones")
    p.add_argument("--count", type=int, default=25,
                   help="random scenarios per market structure (default 25)")
    p.add_argument("--seed", type=_u64, default=0)
    common(p, ["text", "json"], "text")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="answer the entrepreneur's seven questions")
    p.add_argument("--scenario", required=True)
    common(p, ["text", "json"], "text")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ScenarioError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
