"""Active-set maximization of the Sharpe ratio without short sales.

The iteration keeps a partition of the assets into a free set ``P`` (positive
weight) and a bound set ``W`` (weight pinned at zero). Each pass solves
``Sigma_P x_P = e_P``, steps from the current point toward ``x`` until the
first weight hits zero, and once ``w == x`` inspects the multipliers on ``W``
to either stop or release the most negative one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateNormalization, IterationLimit, NoPositiveExcess
from .market import ExcessModel, PortfolioWeights
from .numerics import cho_solve, cholesky
from .sharpe import sharpe_ratio

STEP_ZERO_RTOL = 1e-12
DUAL_TOL = 1e-10

# snapshot actions
STEP = "step"          # full step, alpha == 1
BLOCK = "block"        # partial step, blocking index moved to W
RELEASE = "release"    # w == x, most negative multiplier moved to P
OPTIMAL = "optimal"


@dataclass(frozen=True)
class ActiveSetState:
    iteration: int
    w: np.ndarray
    P: tuple[int, ...]
    W: tuple[int, ...]
    sharpe: float
    action: str
    x: np.ndarray | None = None
    p: np.ndarray | None = None
    alpha: float | None = None
    duals: dict[int, float] | None = None
    moved: int | None = None


@dataclass
class SolverTrace:
    states: list[ActiveSetState] = field(default_factory=list)
    status: str = "running"
    initial: int | None = None

    @property
    def sharpe_per_iteration(self) -> list[float]:
        return [s.sharpe for s in self.states]

    @property
    def iterations(self) -> int:
        return len(self.states)


def initial_index(model: ExcessModel) -> int:
    """Zero-based index of the best single-asset portfolio (lowest index on ties)."""
    e = model.e
    if not np.max(e) > 0:
        raise NoPositiveExcess("no asset has a positive excess return over the benchmark")
    ratio = e / np.sqrt(np.diag(model.sigma))
    return int(np.argmax(ratio))


def _multipliers(w: np.ndarray, model: ExcessModel, W: list[int]) -> np.ndarray:
    var = float(w @ model.sigma @ w)
    sd = math.sqrt(var)
    return float(w @ model.e) * (model.sigma[W] @ w) / (var * sd) - model.e[W] / sd


def solve(model: ExcessModel, tol: float = DUAL_TOL, max_iter: int | None = None
          ) -> tuple[PortfolioWeights, SolverTrace]:
    """Maximize ``w'e / sqrt(w' Sigma w)`` subject to ``sum(w) == 1``, ``w >= 0``.

    ``tol`` is the slack allowed on the multiplier sign test. The default
    iteration cap is ``3 n^2``; hitting it raises :class:`IterationLimit`
    with the current iterate (normalized) and the trace attached.
    """
    n = model.n
    if max_iter is None:
        max_iter = max(3 * n * n, 3)
    j0 = initial_index(model)
    e, sigma = model.e, model.sigma

    w = np.zeros(n)
    w[j0] = e[j0] / math.sqrt(sigma[j0, j0])
    P = {j0}
    trace = SolverTrace(initial=j0)

    for i in range(max_iter):
        Pl = sorted(P)
        Wl = [j for j in range(n) if j not in P]
        L = cholesky(sigma[np.ix_(Pl, Pl)])
        x = np.zeros(n)
        x[Pl] = cho_solve(L, e[Pl])
        p = x - w
        s_now = sharpe_ratio(w, model)

        if np.max(np.abs(p)) <= STEP_ZERO_RTOL * max(1.0, np.max(np.abs(w))):
            mults = _multipliers(w, model, Wl)
            duals = dict(zip(Wl, mults.tolist()))
            if not Wl or np.min(mults) >= -tol:
                trace.states.append(ActiveSetState(i, w.copy(), tuple(Pl), tuple(Wl), s_now, OPTIMAL,
                                                   x=x, p=p, duals=duals))
                trace.status = "optimal"
                return _normalize(w, model), trace
            k = Wl[int(np.argmin(mults))]
            trace.states.append(ActiveSetState(i, w.copy(), tuple(Pl), tuple(Wl), s_now, RELEASE,
                                               x=x, p=p, duals=duals, moved=k))
            P.add(k)
            continue

        blocking = [j for j in Pl if p[j] < 0]
        alpha, h = 1.0, None
        if blocking:
            ratios = np.array([-w[j] / p[j] for j in blocking])
            r = int(np.argmin(ratios))
            if ratios[r] < 1.0:
                alpha, h = float(ratios[r]), blocking[r]
        trace.states.append(ActiveSetState(i, w.copy(), tuple(Pl), tuple(Wl), s_now,
                                           STEP if h is None else BLOCK,
                                           x=x, p=p, alpha=alpha, moved=h))
        if h is None:
            w = x.copy()
        else:
            w = np.maximum(w + alpha * p, 0.0)
            w[h] = 0.0
            P.discard(h)

    trace.status = "iteration-limit"
    best = _normalize(w, model) if w.sum() > 0 else None
    raise IterationLimit(f"active-set iteration cap {max_iter} reached", best=best, trace=trace)


def _normalize(w: np.ndarray, model: ExcessModel) -> PortfolioWeights:
    total = float(w.sum())
    if not total > 0:
        raise DegenerateNormalization(f"iterate weights sum to {total!r}; cannot normalize",
                                      sign=float(np.sign(total)))
    return PortfolioWeights(model.labels, w / total, normalized=True)


@dataclass(frozen=True)
class TraceVerification:
    monotone: bool
    window_increase: bool
    releases_justified: bool
    blocks_justified: bool
    feasible: bool
    messages: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return (self.monotone and self.window_increase and self.releases_justified
                and self.blocks_justified and self.feasible)


def verify_trace(trace: SolverTrace, n: int, monotone_tol: float = 1e-12,
                 dual_tol: float = DUAL_TOL) -> TraceVerification:
    """Check a trace against the convergence argument.

    * Sharpe values never drop by more than ``monotone_tol``;
    * before termination every window of ``n`` iterations strictly raises Sharpe,
      counted after the initial single-asset rescaling step;
    * every release followed a multiplier below ``-dual_tol``;
    * every blocking move had ``alpha < 1``;
    * every snapshot is feasible with zeros exactly on ``W``.
    """
    msgs = []
    s = trace.sharpe_per_iteration
    monotone = True
    for i in range(1, len(s)):
        if s[i] < s[i - 1] - monotone_tol:
            monotone = False
            msgs.append(f"Sharpe decreased at snapshot {i}: {s[i - 1]!r} -> {s[i]!r}")

    last = len(s) - 1
    # the opening step only rescales the single starting asset onto x, which
    # cannot change Sharpe; windows are counted from the first point with w == x
    start = 1 if trace.states and trace.states[0].action == STEP and len(trace.states[0].P) == 1 else 0
    window = True
    for i in range(start, last - n + 1):
        if not s[i + n] > s[i]:
            window = False
            msgs.append(f"no strict increase over snapshots {i}..{i + n}")

    releases = True
    blocks = True
    feasible = True
    for st in trace.states:
        if st.action == RELEASE:
            if not st.duals or st.moved not in st.duals or st.duals[st.moved] >= -dual_tol \
                    or st.duals[st.moved] > min(st.duals.values()):
                releases = False
                msgs.append(f"release at iteration {st.iteration} lacks a negative minimal multiplier")
        if st.action == BLOCK and not (st.alpha is not None and 0.0 <= st.alpha < 1.0):
            blocks = False
            msgs.append(f"blocking move at iteration {st.iteration} has alpha={st.alpha!r}")
        if st.action == STEP and st.alpha != 1.0:
            blocks = False
            msgs.append(f"full step at iteration {st.iteration} has alpha={st.alpha!r}")
        if np.any(st.w < 0) or np.any(st.w[list(st.W)] != 0):
            feasible = False
            msgs.append(f"infeasible iterate at snapshot {st.iteration}")
    return TraceVerification(monotone, window, releases, blocks, feasible, tuple(msgs))
