"""Reference solver for the convex form ``min w' Sigma w  s.t.  w'e = z, w >= 0``.

Normalizing the minimizer to unit sum gives the no-short-sale Sharpe
maximizer, which makes this an independent check on the active-set route.
Also holds the brute-force simplex grid used as a last-resort oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionTooLarge,
    InfeasibleProjection,
    IterationLimit,
    NoPositiveExcess,
    ValidationError,
)
from .market import ExcessModel, PortfolioWeights
from .numerics import as_sym_matrix

PROJECTION_TOL = 1e-14
ARMIJO = 1e-4


@dataclass(frozen=True)
class QpInstance:
    sigma: np.ndarray
    e: np.ndarray
    z: float

    def __post_init__(self):
        if not self.z > 0:
            raise ValidationError(f"z must be positive, got {self.z!r}")
        if not np.max(self.e) > 0:
            raise NoPositiveExcess("no asset has a positive excess return over the benchmark")

    @classmethod
    def from_model(cls, model: ExcessModel, z: float | None = None) -> "QpInstance":
        return cls(as_sym_matrix(model.sigma), np.asarray(model.e, dtype=float),
                   default_z(model.e) if z is None else float(z))


@dataclass
class QpInfo:
    iterations: int
    raw: np.ndarray
    objective: list[float] = field(default_factory=list)
    # worst |e'w - z| and most negative weight over recorded iterates
    max_constraint_residual: float = 0.0
    min_weight: float = 0.0


def default_z(e) -> float:
    """``sum(e)`` when positive, otherwise ``max(e)``."""
    e = np.asarray(e, dtype=float)
    if not np.max(e) > 0:
        raise NoPositiveExcess("no asset has a positive excess return over the benchmark")
    total = float(e.sum())
    return total if total > 0 else float(np.max(e))


def project(v, e, z: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{w >= 0, e'w = z}``.

    The projection is ``max(0, v + lam e)`` where ``lam`` is the root of the
    nondecreasing map ``lam -> e' max(0, v + lam e)``. The root is bracketed
    geometrically and bisected; at every bisection step the exact root for
    the current support is tried and accepted once it is consistent.
    """
    v = np.asarray(v, dtype=float)
    e = np.asarray(e, dtype=float)
    if not (np.max(e) > 0 and z > 0):
        raise InfeasibleProjection("need max(e) > 0 and z > 0")

    def g(lam):
        return float(e @ np.maximum(0.0, v + lam * e))

    target = PROJECTION_TOL * max(1.0, abs(z))
    nz = np.abs(e[e != 0])
    step = (np.max(np.abs(v)) + abs(z)) / np.min(nz) + 1.0
    lo, hi = -step, step
    while g(lo) > z:
        lo *= 2.0
        if not math.isfinite(lo):
            raise InfeasibleProjection("could not bracket the multiplier from below")
    while g(hi) < z:
        hi *= 2.0
        if not math.isfinite(hi):
            raise InfeasibleProjection("could not bracket the multiplier from above")

    for _ in range(400):
        mid = 0.5 * (lo + hi)
        support = (v + mid * e) > 0
        denom = float(e[support] @ e[support])
        if denom > 0:
            # any lam meeting the constraint yields the projection, since the map is monotone
            lam = (z - float(e[support] @ v[support])) / denom
            w = np.maximum(0.0, v + lam * e)
            if abs(float(e @ w) - z) <= target:
                return w
        gm = g(mid)
        if abs(gm - z) <= target:
            return np.maximum(0.0, v + mid * e)
        if gm < z:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.spacing(max(abs(lo), abs(hi))):
            break
    w = np.maximum(0.0, v + 0.5 * (lo + hi) * e)
    if abs(float(e @ w) - z) > 1e-10 * max(1.0, abs(z)):
        raise InfeasibleProjection(f"projection residual {float(e @ w) - z:.3e}")
    return w


def solve_qp(inst: QpInstance, tol: float = 1e-10, max_iter: int = 500_000,
             record: bool = False) -> tuple[PortfolioWeights, QpInfo]:
    """Projected gradient with Armijo backtracking, then unit-sum normalization.

    Each iteration starts from step ``1/||Sigma||_inf`` and halves until the
    sufficient-decrease test passes. Stops when the iterate moves by at most
    ``tol * max(1, ||w||_inf)`` in the sup norm.
    """
    sigma, e, z = inst.sigma, inst.e, inst.z
    n = e.size
    t0 = 1.0 / float(np.max(np.abs(sigma).sum(axis=1)))
    w = project(np.ones(n), e, z)
    f = float(w @ sigma @ w)
    history = [f] if record else []
    residual, lowest = abs(float(e @ w) - z), float(w.min())
    for it in range(1, max_iter + 1):
        grad = 2.0 * (sigma @ w)
        t = t0
        while True:
            w_new = project(w - t * grad, e, z)
            d = w_new - w
            f_new = float(w_new @ sigma @ w_new)
            if f_new <= f + ARMIJO * float(grad @ d) or t < 1e-30:
                break
            t *= 0.5
        moved = float(np.max(np.abs(d)))
        w, f = w_new, f_new
        if record:
            history.append(f)
            residual = max(residual, abs(float(e @ w) - z))
            lowest = min(lowest, float(w.min()))
        if moved <= tol * max(1.0, float(np.max(np.abs(w)))):
            labels = tuple(f"asset{i + 1}" for i in range(n))
            return PortfolioWeights(labels, w / w.sum(), normalized=True), QpInfo(it, w, history, residual, lowest)
    raise IterationLimit(f"projected gradient did not converge in {max_iter} iterations",
                         best=PortfolioWeights(tuple(f"asset{i + 1}" for i in range(n)),
                                               w / w.sum(), normalized=True))


def solve_model(model: ExcessModel, tol: float = 1e-10, max_iter: int = 500_000,
                z: float | None = None) -> tuple[PortfolioWeights, QpInfo]:
    """Convenience wrapper: build the instance from ``model`` and keep its labels."""
    weights, info = solve_qp(QpInstance.from_model(model, z), tol, max_iter)
    return PortfolioWeights(model.labels, weights.w, normalized=True), info


def simplex_grid(n: int, step: float) -> np.ndarray:
    """All points of the unit simplex in ``R^n`` with coordinates on a ``step`` mesh."""
    N = int(round(1.0 / step))
    if not math.isclose(N * step, 1.0, rel_tol=1e-9):
        raise ValidationError(f"1/step must be an integer, got step={step!r}")
    if n == 1:
        return np.ones((1, 1))
    cuts = np.array(list(itertools.combinations(range(N + n - 1), n - 1)))
    bounds = np.hstack([np.full((len(cuts), 1), -1), cuts, np.full((len(cuts), 1), N + n - 1)])
    return (np.diff(bounds, axis=1) - 1) / N


def grid_oracle(model: ExcessModel, step: float = 1e-3) -> PortfolioWeights:
    """Best Sharpe ratio among simplex grid points; first point wins ties."""
    if model.n > 4:
        raise DimensionTooLarge(f"grid oracle supports n <= 4, got {model.n}")
    pts = simplex_grid(model.n, step)
    num = pts @ model.e
    den = np.sqrt(np.einsum("ij,jk,ik->i", pts, model.sigma, pts))
    best = int(np.argmax(num / den))
    return PortfolioWeights(model.labels, pts[best], normalized=True)
