"""Command-line frontend.

    orderfix certify PROBLEM.toml
    orderfix anchors PROBLEM.toml
    orderfix solve   PROBLEM.toml [--out report.json]
    orderfix scan    PROBLEM.toml --starts 32

The JSON report goes to standard output (or ``--out``), a short summary to
standard error.  Exit status: 0 success, 1 mathematical failure
(certification, anchors, solve), 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .exceptions import AnchorSearchError, DomainError, MonotonicityError
from .hammerstein import assemble
from .operators import certify
from .problemfile import ProblemFileError, dumps_report, load_problem, write_values_csv
from .solver import SolverConfig, find_anchors, find_interior_fixed_point, scan_fixed_points

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", type=Path, help="problem file (TOML)")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument(
        "--margin",
        type=float,
        default=None,
        help="strict-order margin relative to the interval diameter (default 1e-8)",
    )
    common.add_argument("--tol-res", type=float, default=None, help="residual tolerance (default 1e-10)")
    common.add_argument("--max-iter", type=int, default=None, help="iteration cap per start (default 10000)")
    common.add_argument("--out", type=Path, default=None, help="write the JSON report here")
    common.add_argument(
        "--timings", action="store_true", help="include wall-clock timings in the report"
    )

    parser = argparse.ArgumentParser(prog="orderfix", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"orderfix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("certify", parents=[common], help="check the hypotheses")
    sub.add_parser("anchors", parents=[common], help="certify and build the anchor pair")
    sub.add_parser("solve", parents=[common], help="full pipeline")
    scan = sub.add_parser("scan", parents=[common], help="collect all distinct fixed points")
    scan.add_argument("--starts", type=int, default=None, help="number of starts")
    return parser


def _config(args, overrides: dict) -> tuple[SolverConfig, int]:
    overrides = dict(overrides)
    n_samples = overrides.pop("n_samples", 1000)
    if n_samples < 1:
        raise UsageError("solver.n_samples must be at least 1")
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.margin is not None:
        overrides["relative_margin"] = args.margin
    if args.tol_res is not None:
        overrides["tol_res"] = args.tol_res
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if getattr(args, "starts", None) is not None:
        overrides["n_starts"] = args.starts
    try:
        return SolverConfig(**overrides), n_samples
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


class _Run:
    def __init__(self, command: str, problem: Path, timings: bool):
        self.report = {
            "tool": "orderfix",
            "tool_version": __version__,
            "command": command,
            "problem_file": problem.name,
            "status": "ok",
            "failed_stage": None,
            "message": "",
        }
        self.keep_timings = timings
        self.timings = {}
        self.summary = []

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - t0

    def fail(self, stage: str, message: str) -> int:
        if self.report["failed_stage"] is None:
            self.report["status"] = "failed"
            self.report["failed_stage"] = stage
            self.report["message"] = message
        self.summary.append(f"{stage} FAILED: {message}")
        return EXIT_FAILED

    def finish(self) -> dict:
        if self.keep_timings:
            self.report["timings"] = dict(self.timings)
        return self.report


def _solution_path(args) -> Path:
    if args.out is not None:
        return args.out.with_suffix(".csv")
    return args.problem.with_name(args.problem.stem + ".solution.csv")


def run(args) -> tuple[int, dict, list[str]]:
    run_ = _Run(args.command, args.problem, args.timings)
    rep = run_.report
    try:
        inst, overrides = load_problem(args.problem)
        cfg, n_samples = _config(args, overrides)
        with run_.phase("assemble"):
            T = assemble(inst)
    except MonotonicityError as exc:
        rep.update(problem={"label": str(args.problem.stem)}, seed=0)
        return run_.fail("certification", str(exc)), run_.finish(), run_.summary
    except (ProblemFileError, UsageError, DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    interval = inst.interval
    margin = cfg.strict_margin(interval)
    rep.update(
        problem={"name": inst.name, "label": inst.label, "n_points": inst.grid.size},
        seed=cfg.seed,
        config={
            "tol_res": cfg.tol_res,
            "tol_step": cfg.tol_step,
            "max_iter": cfg.max_iter,
            "damping": cfg.damping,
            "n_starts": cfg.n_starts,
            "relative_margin": cfg.relative_margin,
            "strict_margin": margin.margin,
            "fd_step": cfg.fd_step,
            "monotone_samples": n_samples,
        },
    )

    with run_.phase("certify"):
        cert = certify(T, interval, margin, n_samples, cfg.seed)
    rep["certification"] = cert.to_dict()
    run_.summary.append(
        f"certification {'passed' if cert.passed else 'failed'}: super_margin = "
        f"{cert.super_margin:.6g}, sub_margin = {cert.sub_margin:.6g}, "
        f"interval_order_margin = {cert.interval_order_margin:.6g}"
    )
    status = EXIT_OK
    if not cert.passed:
        status = run_.fail("certification", "; ".join(cert.failures()))
        if args.command != "anchors":
            return status, run_.finish(), run_.summary
    if args.command == "certify":
        return status, run_.finish(), run_.summary

    with run_.phase("anchors"):
        try:
            anchors = find_anchors(T, interval, cfg)
        except AnchorSearchError as exc:
            rep["anchors"] = {"error": str(exc), "best_margins": exc.best_margins}
            return run_.fail("anchors", str(exc)), run_.finish(), run_.summary
    rep["anchors"] = anchors.to_dict()
    run_.summary.append(f"anchors: t_minus = {anchors.t_minus!r}, t_plus = {anchors.t_plus!r}")
    if args.command == "anchors" or status != EXIT_OK:
        return status, run_.finish(), run_.summary

    if args.command == "scan":
        with run_.phase("scan"):
            scan = scan_fixed_points(T, interval, anchors, cfg)
        rep["scan"] = scan.to_dict()
        run_.summary.append(f"scan: {len(scan.clusters)} distinct fixed point(s)")
        if not scan.clusters:
            return run_.fail("scan", "no interior fixed point found"), run_.finish(), run_.summary
        return EXIT_OK, run_.finish(), run_.summary

    with run_.phase("solve"):
        sol = find_interior_fixed_point(T, interval, anchors, cfg)
    rep["solve"] = sol.to_dict()
    run_.summary.append(
        f"solve: {sol.classification.value}, residual = {sol.residual_sup:.3g}, "
        f"starts tried = {sol.starts_tried}"
    )
    if not sol.ok:
        return run_.fail("solve", sol.message or sol.classification.value), run_.finish(), run_.summary
    csv_path = _solution_path(args)
    write_values_csv(csv_path, sol.candidate)
    rep["solution_csv"] = csv_path.name
    return EXIT_OK, run_.finish(), run_.summary


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, report, summary = run(args)
    except UsageError as exc:
        print(f"orderfix: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps_report(report)
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    for line in summary:
        print(line, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
