"""Dense PD linear algebra, normal special functions, quadrature and seeded sampling."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import erfc

from .errors import NoConvergence, NotPositiveDefinite, ValidationError

PD_PIVOT_RTOL = 1e-12
SYMMETRY_RTOL = 1e-12
MAX_DEPTH = 60
ROUNDOFF_ULPS = 64.0
MAX_EVALUATIONS = 20_000_000
_INITIAL_PANELS = 8
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------------------
# linear algebra
# --------------------------------------------------------------------------

def as_sym_matrix(S) -> np.ndarray:
    """Validate a square, finite, symmetric matrix and return it as float array."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValidationError("matrix has non-finite entries")
    scale = np.max(np.abs(S))
    if np.max(np.abs(S - S.T)) > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise ValidationError("matrix is not symmetric")
    return S


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises :class:`NotPositiveDefinite` carrying the failing pivot index when a
    pivot falls to ``1e-12 * max(diag(S))`` or below.
    """
    S = as_sym_matrix(S)
    n = S.shape[0]
    floor = PD_PIVOT_RTOL * max(np.max(np.diag(S)), 0.0)
    L = np.zeros_like(S)
    for j in range(n):
        row = L[j, :j]
        d = S[j, j] - row @ row
        if not d > floor:
            raise NotPositiveDefinite(j, d)
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            L[j + 1:, j] = (S[j + 1:, j] - L[j + 1:, :j] @ row) / L[j, j]
    return L


def cho_solve(L: np.ndarray, b) -> np.ndarray:
    y = solve_triangular(L, b, lower=True, check_finite=False)
    return solve_triangular(L.T, y, lower=False, check_finite=False)


def solve_pd(S, b) -> np.ndarray:
    """Solve ``S x = b`` for positive-definite ``S`` through its Cholesky factor."""
    b = np.asarray(b, dtype=float)
    L = cholesky(S)
    if b.shape[0] != L.shape[0]:
        raise ValidationError(f"dimension mismatch: matrix {L.shape}, rhs {b.shape}")
    return cho_solve(L, b)


# --------------------------------------------------------------------------
# special functions
# --------------------------------------------------------------------------

def std_normal_cdf(x):
    """Standard normal CDF via ``erfc``; accurate in both tails."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

def _adaptive_simpson(f, a: np.ndarray, b: np.ndarray, tol: np.ndarray):
    """Breadth-first adaptive Simpson over a batch of intervals.

    All intervals of one refinement level are evaluated in a single call to
    ``f``, which must accept and return numpy arrays. Returns per-interval
    integrals and error estimates.
    """
    n_out = a.size
    owner = np.arange(n_out)
    m = 0.5 * (a + b)
    fa, fm, fb = np.split(np.asarray(f(np.concatenate([a, m, b])), dtype=float), 3)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = np.zeros(n_out)
    err = np.zeros(n_out)
    evaluations = 3 * a.size
    depth = 0
    while a.size:
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = np.split(np.asarray(f(np.concatenate([lm, rm])), dtype=float), 2)
        evaluations += 2 * a.size
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if not np.all(np.isfinite(delta)):
            raise NoConvergence("integrand produced non-finite values")
        # below a few ulps of the panel value the estimate cannot improve further
        floor = ROUNDOFF_ULPS * np.finfo(float).eps * (np.abs(left) + np.abs(right))
        done = np.abs(delta) <= np.maximum(15.0 * tol, floor)
        if np.any(~done & ((lm <= a) | (rm >= b))):
            raise NoConvergence("adaptive Simpson ran out of floating-point resolution")
        np.add.at(total, owner[done], left[done] + right[done] + delta[done] / 15.0)
        np.add.at(err, owner[done], np.abs(delta[done]) / 15.0)
        keep = ~done
        if not keep.any():
            break
        depth += 1
        if depth > MAX_DEPTH or evaluations > MAX_EVALUATIONS:
            raise NoConvergence(
                f"adaptive Simpson hit its subdivision limit (depth {depth}, "
                f"{evaluations} evaluations) with {int(keep.sum())} open intervals")
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        flm, frm = flm[keep], frm[keep]
        left, right, tol, owner = left[keep], right[keep], tol[keep], owner[keep]
        a, m, b = np.concatenate([a, m]), np.concatenate([lm[keep], rm[keep]]), np.concatenate([m, b])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb])
        whole = np.concatenate([left, right])
        tol = np.concatenate([tol, tol]) / 2.0
        owner = np.concatenate([owner, owner])
    return total, err


def integrate_with_error(f: Callable, a: float, b: float, tol: float = 1e-10) -> tuple[float, float]:
    """Like :func:`integrate` but also returns the estimated absolute error."""
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    edges = np.linspace(a, b, _INITIAL_PANELS + 1)
    tols = np.full(_INITIAL_PANELS, tol / _INITIAL_PANELS)
    vals, errs = _adaptive_simpson(f, edges[:-1], edges[1:], tols)
    return float(vals.sum()), float(errs.sum())


def integrate(f: Callable, a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Simpson estimate of the integral of ``f`` over ``[a, b]``.

    ``f`` is called with numpy arrays of abscissae. Raises
    :class:`NoConvergence` when the depth cap of 60 halvings is reached.
    """
    return integrate_with_error(f, a, b, tol)[0]


def integrate_pieces(f: Callable, edges, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Integrals of ``f`` over each consecutive pair of ``edges`` (nondecreasing).

    The tolerance is shared out in proportion to piece width, so the summed
    error stays within ``tol``. Zero-width pieces contribute exactly zero.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo
    vals = np.zeros(lo.size)
    errs = np.zeros(lo.size)
    live = width > 0
    if live.any():
        span = width[live].sum()
        v, e = _adaptive_simpson(f, lo[live], hi[live], tol * width[live] / span)
        vals[live] = v
        errs[live] = e
    return vals, errs


# --------------------------------------------------------------------------
# random numbers
# --------------------------------------------------------------------------

class RngStream:
    """Reproducible stream of uniforms and normals.

    Raw 64-bit words come from the Philox4x64 counter-based generator keyed by
    ``(seed, stream)``; uniforms take the top 53 bits and normals use the
    Marsaglia polar method on uniform pairs. Distinct ``stream`` values give
    non-overlapping sequences for the same seed. Not thread-safe: give each
    worker its own stream.
    """

    def __init__(self, seed: int = 0, stream: int = 0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative")
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.stream = int(stream) & 0xFFFF_FFFF_FFFF_FFFF
        self._bitgen = np.random.Philox(key=np.array([self.seed, self.stream], dtype=np.uint64))
        self.position = 0

    def raw(self, n: int) -> np.ndarray:
        words = self._bitgen.random_raw(n)
        self.position += n
        return np.asarray(words, dtype=np.uint64)

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.raw(n) >> np.uint64(11)).astype(float) * (1.0 / 9007199254740992.0)
        return low + (high - low) * u

    def standard_normal(self, n: int) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            pairs = int((n - filled) / 2 / (math.pi / 4) * 1.02) + 16
            u = self.uniform(2 * pairs, -1.0, 1.0).reshape(pairs, 2)
            s = np.einsum("ij,ij->i", u, u)
            ok = (s > 0.0) & (s < 1.0)
            u, s = u[ok], s[ok]
            z = (u * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
            take = min(z.size, n - filled)
            out[filled:filled + take] = z[:take]
            filled += take
        return out


def sample_std_normals(rng: RngStream, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return rng.standard_normal(n)
