"""Sharpe ratio, its gradient, KKT certificate and the closed-form unconstrained optimum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalization, DegeneratePortfolio
from .market import ExcessModel, PortfolioWeights
from .numerics import solve_pd

GRADIENT_TOL = 1e-10
KKT_TOL = 1e-8


def _variance(w: np.ndarray, model: ExcessModel) -> float:
    var = float(w @ model.sigma @ w)
    if not var > 1e-300:
        raise DegeneratePortfolio(f"portfolio variance {var!r} is not positive")
    return var


def _as_vector(w) -> np.ndarray:
    return np.asarray(getattr(w, "w", w), dtype=float)


def sharpe_ratio(w, model: ExcessModel) -> float:
    """``w'e / sqrt(w' Sigma w)``; invariant to positive rescaling of ``w``."""
    w = _as_vector(w)
    return float(w @ model.e) / math.sqrt(_variance(w, model))


def sharpe_gradient(w, model: ExcessModel) -> np.ndarray:
    w = _as_vector(w)
    var = _variance(w, model)
    sd = math.sqrt(var)
    return model.e / sd - float(w @ model.e) * (model.sigma @ w) / (var * sd)


def unconstrained_optimum(model: ExcessModel) -> PortfolioWeights:
    """Tangency portfolio ``Sigma^-1 e`` rescaled to unit sum.

    Raises :class:`DegenerateNormalization` when the entries of ``Sigma^-1 e``
    sum to zero or to a negative number; in the latter case rescaling would
    flip the direction and produce the Sharpe *minimizer*. The exception's
    ``sign`` attribute tells the two cases apart.
    """
    w_hat = solve_pd(model.sigma, model.e)
    total = float(w_hat.sum())
    scale = float(np.abs(w_hat).sum())
    if abs(total) <= 1e-12 * max(scale, 1.0):
        raise DegenerateNormalization("Sigma^-1 e sums to zero; cannot scale to unit sum", sign=0.0)
    if total < 0:
        raise DegenerateNormalization(
            f"Sigma^-1 e sums to {total:.6g} < 0; unit-sum rescaling would minimize the Sharpe ratio",
            sign=-1.0)
    return PortfolioWeights(model.labels, w_hat / total, normalized=True)


def max_sharpe(model: ExcessModel) -> float:
    """Upper bound ``sqrt(e' Sigma^-1 e)`` over all nonzero portfolios."""
    return math.sqrt(max(float(model.e @ solve_pd(model.sigma, model.e)), 0.0))


@dataclass(frozen=True)
class KktReport:
    stationarity_residual: np.ndarray
    duals: np.ndarray
    max_violation: float
    stationarity: float
    primal: float
    dual: float
    complementarity: float
    tol: float = KKT_TOL

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def kkt_report(w, model: ExcessModel, tol: float = KKT_TOL, zero_tol: float = 0.0) -> KktReport:
    """First-order certificate for the no-short-sale problem, equality constraint ignored.

    Duals are the unscaled multipliers ``mu = -grad S(w)`` on coordinates with
    ``w_j <= zero_tol`` and zero elsewhere. The multipliers of the scaled
    system used in the convergence argument are ``sqrt(w' Sigma w) * mu``.
    Never raises on a violated condition; ``tol`` only sets ``passed``.
    """
    w = _as_vector(w)
    grad = sharpe_gradient(w, model)
    zero = w <= zero_tol
    duals = np.where(zero, -grad, 0.0)
    residual = grad + duals
    stationarity = float(np.max(np.abs(residual), initial=0.0))
    primal = float(max(0.0, -np.min(w)))
    dual = float(max(0.0, -np.min(duals)))
    complementarity = abs(float(duals @ w))
    worst = max(stationarity, primal, dual, complementarity)
    return KktReport(residual, duals, worst, stationarity, primal, dual, complementarity, tol)
