"""Price ingestion, arithmetic returns, moment estimation and portfolio aggregation."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegeneratePortfolio,
    NotPositiveDefinite,
    ParseError,
    SingularCovariance,
    ValidationError,
    ZeroWealth,
)
from .numerics import RngStream, as_sym_matrix, cholesky


@dataclass(frozen=True)
class PriceHistory:
    labels: tuple[str, ...]
    dates: tuple[dt.date, ...]
    prices: np.ndarray  # (T, n)

    def __post_init__(self):
        T, n = self.prices.shape
        if len(self.labels) != n or len(self.dates) != T:
            raise ValidationError("labels/dates do not match the price matrix shape")
        if T < 3:
            raise ValidationError(f"need at least 3 dates, got {T}")
        if not np.all(np.isfinite(self.prices)):
            raise ValidationError("price matrix has missing or non-finite cells")
        bad = np.argwhere(self.prices <= 0)
        if bad.size:
            t, i = bad[0]
            raise ValidationError(
                f"non-positive price {self.prices[t, i]} at row {t + 1} ({self.dates[t]}), "
                f"column {self.labels[i]!r}")
        for t in range(1, T):
            if not self.dates[t] > self.dates[t - 1]:
                raise ValidationError(
                    f"dates must be strictly increasing: row {t + 1} ({self.dates[t]}) "
                    f"follows {self.dates[t - 1]}")


@dataclass(frozen=True)
class ReturnsMatrix:
    labels: tuple[str, ...]
    returns: np.ndarray  # (T-1, n)


@dataclass(frozen=True)
class MomentEstimate:
    labels: tuple[str, ...]
    mu: np.ndarray
    sigma: np.ndarray

    @property
    def n(self) -> int:
        return self.mu.size


@dataclass(frozen=True)
class PortfolioWeights:
    labels: tuple[str, ...]
    w: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        if not np.all(np.isfinite(self.w)):
            raise ValidationError("weights must be finite")
        if self.normalized and abs(self.w.sum() - 1.0) > 1e-10:
            raise ValidationError(f"normalized weights sum to {self.w.sum()!r}, not 1")

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in zip(self.labels, self.w)}


@dataclass(frozen=True)
class ExcessModel:
    """Excess returns ``e = mu - L`` over a benchmark together with the covariance."""

    e: np.ndarray
    sigma: np.ndarray
    benchmark: float = 0.0
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"asset{i + 1}" for i in range(self.e.size)))

    @property
    def n(self) -> int:
        return self.e.size

    @property
    def has_positive_excess(self) -> bool:
        return bool(np.max(self.e) > 0)

    @classmethod
    def from_arrays(cls, e, sigma, benchmark: float = 0.0, labels=()) -> "ExcessModel":
        e = np.atleast_1d(np.asarray(e, dtype=float))
        sigma = as_sym_matrix(np.atleast_2d(np.asarray(sigma, dtype=float)))
        if sigma.shape[0] != e.size:
            raise ValidationError(f"e has {e.size} entries but sigma is {sigma.shape}")
        return cls(e=e, sigma=sigma, benchmark=float(benchmark), labels=tuple(labels))


def load_prices(path) -> PriceHistory:
    """Read a ``date,<label1>,...`` CSV with ISO dates in ascending order."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0].lower() != "date":
        raise ParseError(f"{path}: header must be 'date,<label1>,...', got {rows[0]!r}")
    labels = tuple(header[1:])
    if len(set(labels)) != len(labels):
        raise ParseError(f"{path}: duplicate asset labels")
    dates, prices = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            dates.append(dt.date.fromisoformat(row[0].strip()))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad date {row[0]!r}") from None
        values = []
        for label, cell in zip(labels, row[1:]):
            try:
                values.append(float(cell.strip()))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad number {cell!r} in column {label!r}") from None
        prices.append(values)
    return PriceHistory(labels, tuple(dates), np.array(prices, dtype=float).reshape(len(dates), len(labels)))


def write_prices(path, history: PriceHistory) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["date", *history.labels])
        for d, row in zip(history.dates, history.prices):
            out.writerow([d.isoformat(), *(repr(float(x)) for x in row)])


def arithmetic_returns(p: PriceHistory) -> ReturnsMatrix:
    s = p.prices
    return ReturnsMatrix(p.labels, (s[1:] - s[:-1]) / s[:-1])


def estimate_moments(r: ReturnsMatrix) -> MomentEstimate:
    """Column means and unbiased sample covariance; the covariance must be PD."""
    x = np.asarray(r.returns, dtype=float)
    if x.shape[0] < 2:
        raise ValidationError("need at least 2 return observations")
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / (x.shape[0] - 1)
    sigma = 0.5 * (sigma + sigma.T)
    try:
        cholesky(sigma)
    except NotPositiveDefinite as exc:
        label = r.labels[exc.pivot] if exc.pivot < len(r.labels) else exc.pivot
        raise SingularCovariance(
            f"sample covariance is singular at asset {label!r} "
            "(duplicated, constant or linearly dependent column)") from exc
    return MomentEstimate(r.labels, mu, sigma)


def excess_model(m: MomentEstimate, L: float) -> ExcessModel:
    return ExcessModel(e=m.mu - L, sigma=m.sigma, benchmark=float(L), labels=m.labels)


def holdings_to_weights(deltas, prices0, labels=()) -> PortfolioWeights:
    """Wealth fractions ``w_i = D_i S_i(0) / sum_j D_j S_j(0)``."""
    value = np.asarray(deltas, dtype=float) * np.asarray(prices0, dtype=float)
    wealth = value.sum()
    if wealth == 0:
        raise ZeroWealth("initial portfolio value is zero")
    if not labels:
        labels = tuple(f"asset{i + 1}" for i in range(value.size))
    return PortfolioWeights(tuple(labels), value / wealth, normalized=True)


def portfolio_moments(w, m: MomentEstimate) -> tuple[float, float]:
    """Mean ``w . mu`` and standard deviation ``sqrt(w' Sigma w)`` of the portfolio return."""
    w = np.asarray(getattr(w, "w", w), dtype=float)
    if w.size != m.mu.size:
        raise ValidationError(f"{w.size} weights for {m.mu.size} assets")
    var = float(w @ m.sigma @ w)
    if not var > 1e-300:
        raise DegeneratePortfolio(f"portfolio variance {var!r} is not positive")
    return float(w @ m.mu), math.sqrt(var)


def synthetic_moments(n: int, rng: RngStream) -> MomentEstimate:
    """Random benchmark instance: mu ~ U[-0.05, 0.15], Sigma = A'A/n + 0.01 I."""
    mu = rng.uniform(n, -0.05, 0.15)
    A = rng.standard_normal(n * n).reshape(n, n)
    sigma = A.T @ A / n + 0.01 * np.eye(n)
    sigma = 0.5 * (sigma + sigma.T)
    return MomentEstimate(tuple(f"asset{i + 1}" for i in range(n)), mu, sigma)
