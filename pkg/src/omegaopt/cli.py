"""Command-line front end.

Subcommands::

    omegaopt optimize   --prices p.csv --benchmark 0.01 [--solver sras|qp] [--allow-short]
    omegaopt omega      --dist normal|skewnormal --mean M --stddev S [--skew G] --threshold L
    omegaopt sweep-skew [--mean 0.1 --stddev 0.3 --threshold 0.01 --step 0.01 --out f.csv]
    omegaopt bench      --assets 30 --instances 20 --seed 0 [--out table.csv]

Single results are printed as JSON; tables are written as CSV. Failures set a
nonzero exit code and print a JSON object with an ``error`` field.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, market, omega, qpref, sharpe, sras
from .errors import OmegaOptError, UsageError
from .numerics import RngStream
from .skewnorm import from_moments
from .sweep import format_sweep_csv, sweep_skewness, write_sweep_csv

COMMANDS = ("optimize", "omega", "sweep-skew", "bench")
GAP_TOL = 1e-6


@dataclass
class CommandSpec:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or f"{self.prog}: exited with status {status}")
        super().exit(status, message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="omegaopt", description="Sharpe ratio and Omega measure portfolio tools")
    parser.add_argument("--version", action="version", version=f"omegaopt {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("optimize", help="maximize the Sharpe ratio of a portfolio from price history")
    p.add_argument("--prices", required=True, help="CSV with header date,<label1>,...")
    p.add_argument("--benchmark", type=float, required=True, help="per-period benchmark return L")
    p.add_argument("--solver", choices=("sras", "qp"), default="sras")
    p.add_argument("--allow-short", action="store_true", help="drop w >= 0 and use the closed form")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=None, help="default 3 n^2")
    p.add_argument("--output", choices=("json",), default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = sub.add_parser("omega", help="evaluate the Omega measure of a return distribution")
    p.add_argument("--dist", choices=("normal", "skewnormal"), required=True)
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--stddev", type=float, required=True)
    p.add_argument("--skew", type=float, default=0.0)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--method", choices=(omega.QUADRATURE, omega.PARTIAL_MOMENT, omega.MONTE_CARLO,
                                        omega.CLOSED_FORM), default=omega.QUADRATURE)
    p.add_argument("--samples", type=int, default=omega.DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--output", choices=("json",), default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep-skew", help="Omega versus skewness at fixed mean and sd")
    p.add_argument("--mean", type=float, default=0.1)
    p.add_argument("--stddev", type=float, default=0.3)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--gamma-min", type=float, default=-0.99)
    p.add_argument("--gamma-max", type=float, default=0.99)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--method", choices=(omega.QUADRATURE, omega.PARTIAL_MOMENT, omega.MONTE_CARLO),
                   default=omega.QUADRATURE)
    p.add_argument("--samples", type=int, default=omega.DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("bench", help="time the active-set and QP solvers on synthetic instances")
    p.add_argument("--assets", type=int, required=True)
    p.add_argument("--instances", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--benchmark", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV table path")
    return parser


def parse_args(argv: list[str]) -> CommandSpec:
    ns = _build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}")
    opts = {k.replace("-", "_"): v for k, v in vars(ns).items() if k != "command"}
    _validate(ns.command, opts)
    return CommandSpec(ns.command, opts)


def _validate(command: str, o: dict) -> None:
    if "tol" in o and not o["tol"] > 0:
        raise UsageError("--tol must be positive")
    if o.get("max_iter") is not None and o["max_iter"] < 1:
        raise UsageError("--max-iter must be at least 1")
    if command == "omega":
        if not o["stddev"] > 0:
            raise UsageError("--stddev must be positive")
        if o["dist"] == "normal" and o["skew"] != 0:
            raise UsageError("--skew requires --dist skewnormal")
    if command in ("omega", "sweep-skew") and o["samples"] < 1000:
        raise UsageError("--samples must be at least 1000")
    if command == "sweep-skew":
        if not o["stddev"] > 0:
            raise UsageError("--stddev must be positive")
        if not o["step"] > 0:
            raise UsageError("--step must be positive")
    if command == "bench":
        if o["assets"] < 1 or o["instances"] < 1:
            raise UsageError("--assets and --instances must be at least 1")
    if any(k in o and o[k] is not None and o[k] < 0 for k in ("seed",)):
        raise UsageError("--seed must be non-negative")


def _versions() -> dict:
    return {"omegaopt": __version__, "numpy": np.__version__, "python": platform.python_version()}


def _envelope(spec: CommandSpec) -> dict:
    return {"command": spec.command, "options": dict(spec.options), "versions": _versions()}


def run_optimize(spec: CommandSpec) -> dict:
    prices = market.load_prices(spec.prices)
    moments = market.estimate_moments(market.arithmetic_returns(prices))
    model = market.excess_model(moments, spec.benchmark)
    n = model.n
    max_iter = spec.max_iter if spec.max_iter is not None else 3 * n * n
    report = _envelope(spec)
    report["options"]["max_iter"] = max_iter
    report["mu"] = dict(zip(model.labels, moments.mu.tolist()))

    if spec.allow_short:
        w = sharpe.unconstrained_optimum(model)
        kkt = float(np.max(np.abs(sharpe.sharpe_gradient(w, model))))
        report.update(solver="closed-form", iterations=0, stationarity=kkt,
                      closed_form=w.as_dict())
    elif spec.solver == "sras":
        w, trace = sras.solve(model, tol=spec.tol, max_iter=max_iter)
        report.update(solver="sras", iterations=trace.iterations)
    else:
        w, info = qpref.solve_model(model, tol=spec.tol, max_iter=max(max_iter, 500_000))
        report.update(solver="qp", iterations=info.iterations, z=qpref.default_z(model.e))
    if not spec.allow_short:
        report["kkt_max_violation"] = sharpe.kkt_report(w, model).max_violation
    report["weights"] = w.as_dict()
    report["sharpe"] = sharpe.sharpe_ratio(w, model)
    return report


def _distribution(spec: CommandSpec):
    if spec.dist == "normal":
        return omega.Normal(spec.mean, spec.stddev)
    return from_moments(spec.mean, spec.stddev, spec.skew)


def run_omega(spec: CommandSpec) -> dict:
    dist = _distribution(spec)
    est = omega.omega(dist, spec.threshold, spec.method, tol=spec.tol,
                      n_samples=spec.samples, seed=spec.seed)
    report = _envelope(spec)
    report.update(omega=est.value, omega_paper=est.paper_value, method=est.method,
                  error_estimate=est.error_estimate,
                  sharpe=(spec.mean - spec.threshold) / spec.stddev)
    if spec.dist == "skewnormal":
        report["params"] = {"epsilon": dist.epsilon, "omega": dist.omega, "alpha": dist.alpha,
                            "delta": dist.delta}
    return report


def run_sweep(spec: CommandSpec, stdout=None) -> dict:
    stdout = stdout or sys.stdout
    rows = sweep_skewness(spec.mean, spec.stddev, spec.threshold, spec.gamma_min, spec.gamma_max,
                          spec.step, spec.method, spec.samples, spec.seed, spec.tol)
    values = [r.omega_true for r in rows]
    summary = {"rows": len(rows), "omega_min": min(values), "omega_max": max(values),
               "sharpe": rows[0].sharpe, "method": spec.method, "out": spec.out}
    if spec.out:
        write_sweep_csv(spec.out, rows)
        print(f"wrote {len(rows)} rows to {spec.out}: omega in [{min(values):.6f}, "
              f"{max(values):.6f}], sharpe {rows[0].sharpe:.10g}", file=stdout)
    else:
        stdout.write(format_sweep_csv(rows))
        print(f"{len(rows)} rows: omega in [{min(values):.6f}, {max(values):.6f}], "
              f"sharpe {rows[0].sharpe:.10g}", file=sys.stderr)
    report = _envelope(spec)
    report.update(summary)
    return report


BENCH_COLUMNS = ("instance", "n", "sras_time_s", "sras_sharpe", "sras_iterations",
                 "qp_time_s", "qp_sharpe", "qp_iterations", "weight_gap")


def bench_instance(n: int, seed: int, k: int, benchmark: float = 0.0) -> market.ExcessModel:
    """Instance ``k`` of a benchmark run; redrawn from the same stream until some excess is positive."""
    rng = RngStream(seed, k)
    while True:
        model = market.excess_model(market.synthetic_moments(n, rng), benchmark)
        if model.has_positive_excess:
            return model


def run_bench(spec: CommandSpec) -> dict:
    n = spec.assets
    max_iter = spec.max_iter if spec.max_iter is not None else 3 * n * n
    rows = []
    for k in range(spec.instances):
        model = bench_instance(n, spec.seed, k, spec.benchmark)
        t0 = time.perf_counter()
        w_a, trace = sras.solve(model, tol=spec.tol, max_iter=max_iter)
        t1 = time.perf_counter()
        w_q, info = qpref.solve_model(model, tol=spec.tol)
        t2 = time.perf_counter()
        rows.append({"instance": k, "n": n, "sras_time_s": t1 - t0,
                     "sras_sharpe": sharpe.sharpe_ratio(w_a, model), "sras_iterations": trace.iterations,
                     "qp_time_s": t2 - t1, "qp_sharpe": sharpe.sharpe_ratio(w_q, model),
                     "qp_iterations": info.iterations,
                     "weight_gap": float(np.max(np.abs(w_a.w - w_q.w)))})
    mean_sras = float(np.mean([r["sras_time_s"] for r in rows]))
    mean_qp = float(np.mean([r["qp_time_s"] for r in rows]))
    gap = max(r["weight_gap"] for r in rows)
    if spec.out:
        with Path(spec.out).open("w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(BENCH_COLUMNS)
            for r in rows:
                out.writerow([r[c] if isinstance(r[c], int) else f"{r[c]:.10g}" for c in BENCH_COLUMNS])
            out.writerow(["mean", n, f"{mean_sras:.10g}", "", "", f"{mean_qp:.10g}", "", "", ""])
    report = _envelope(spec)
    report["options"]["max_iter"] = max_iter
    report.update(instances=rows, mean_sras_time_s=mean_sras, mean_qp_time_s=mean_qp,
                  speedup=mean_qp / mean_sras if mean_sras > 0 else None,
                  max_weight_gap=gap, all_within_tolerance=gap <= GAP_TOL,
                  gap_tolerance=GAP_TOL)
    return report


RUNNERS = {"optimize": run_optimize, "omega": run_omega, "sweep-skew": run_sweep, "bench": run_bench}


def _emit(report: dict, path: str | None, stream) -> None:
    text = json.dumps(report, indent=2, default=str)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text, file=stream)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    try:
        report = RUNNERS[spec.command](spec)
    except OmegaOptError as exc:
        _emit({**_envelope(spec), "error": exc.code, "message": str(exc)}, None, sys.stdout)
        return 1
    except OSError as exc:
        _emit({**_envelope(spec), "error": "IOError", "message": str(exc)}, None, sys.stdout)
        return 1
    if spec.command == "sweep-skew":
        return 0
    if spec.command == "bench" and spec.out is None:
        _emit(report, None, sys.stdout)
    elif spec.command == "bench":
        _emit({k: v for k, v in report.items() if k != "instances"}, None, sys.stdout)
    else:
        _emit(report, spec.out, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
