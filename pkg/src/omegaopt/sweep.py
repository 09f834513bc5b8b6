"""Omega versus skewness at fixed mean and standard deviation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .omega import DEFAULT_SAMPLES, QUADRATURE, omega
from .skewnorm import MAX_ABS_SKEWNESS, from_moments

CSV_HEADER = ("gamma1", "omega", "omega_paper", "sharpe")


@dataclass(frozen=True)
class SkewSweepRow:
    gamma1: float
    omega_true: float
    omega_paper: float
    sharpe: float
    method: str
    error_estimate: float = 0.0


def skewness_grid(gamma_min: float, gamma_max: float, step: float) -> list[float]:
    if not step > 0:
        raise ValidationError("step must be positive")
    if not -MAX_ABS_SKEWNESS <= gamma_min <= gamma_max <= MAX_ABS_SKEWNESS:
        raise ValidationError(
            f"need -{MAX_ABS_SKEWNESS} <= gamma_min <= gamma_max <= {MAX_ABS_SKEWNESS}")
    count = int(round((gamma_max - gamma_min) / step + 1e-9)) + 1
    # rounding keeps 0.0 and the endpoints exact instead of drifting by ulps
    return [round(gamma_min + k * step, 12) for k in range(count)]


def sweep_skewness(mu: float = 0.1, sigma: float = 0.3, L: float = 0.01,
                   gamma_min: float = -0.99, gamma_max: float = 0.99, step: float = 0.01,
                   method: str = QUADRATURE, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                   tol: float = 1e-10) -> list[SkewSweepRow]:
    """One row per skewness level; Monte-Carlo rows use seed ``seed + row index``.

    Every row shares mean and sd, so the Sharpe column is constant.
    """
    sharpe = (mu - L) / sigma
    rows = []
    for k, g in enumerate(skewness_grid(gamma_min, gamma_max, step)):
        est = omega(from_moments(mu, sigma, g), L, method, tol=tol, n_samples=n_samples, seed=seed + k)
        rows.append(SkewSweepRow(g, est.value, est.paper_value, sharpe, est.method, est.error_estimate))
    return rows


def format_sweep_csv(rows: list[SkewSweepRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for r in rows:
        out.writerow([f"{r.gamma1:.10g}", f"{r.omega_true:.10g}", f"{r.omega_paper:.10g}",
                      f"{r.sharpe:.10g}"])
    return buf.getvalue()


def write_sweep_csv(path, rows: list[SkewSweepRow]) -> None:
    Path(path).write_text(format_sweep_csv(rows), encoding="utf-8")


def read_sweep_csv(path) -> list[dict[str, float]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValidationError(f"unexpected sweep header {reader.fieldnames!r}")
        return [{k: float(v) for k, v in row.items()} for row in reader]
