"""Omega measure of a scalar return distribution.

Three independent estimators are provided: the ratio of CDF areas on either
side of the threshold, the partial-moment identity
``Omega = 1 + (mean - L) / E[(L - R)+]`` and a Monte-Carlo version of the
same identity. For normal returns the closed form depends on the portfolio
only through ``z = (L - mean) / sd`` and decreases in ``z``, so maximizing
Omega and maximizing the Sharpe ratio pick the same portfolio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateDenominator, DimensionTooLarge, ValidationError
from .market import ExcessModel
from .numerics import RngStream, integrate_with_error, std_normal_cdf, std_normal_pdf
from .qpref import simplex_grid
from .skewnorm import TRUNCATION, SkewNormalParams

QUADRATURE = "quadrature"
PARTIAL_MOMENT = "partial-moment"
MONTE_CARLO = "monte-carlo"
CLOSED_FORM = "closed-form"

MC_BLOCK = 100_000
MIN_RELATIVE_SCALE = 1e-6
DEFAULT_SAMPLES = 10_000_000


@dataclass(frozen=True)
class Normal:
    mu_bar: float
    sigma_bar: float

    def __post_init__(self):
        if not self.sigma_bar > 0:
            raise ValidationError(f"sigma_bar must be positive, got {self.sigma_bar!r}")

    @property
    def mean(self) -> float:
        return self.mu_bar

    @property
    def std(self) -> float:
        return self.sigma_bar

    def bounds(self) -> tuple[float, float]:
        return self.mu_bar - TRUNCATION * self.sigma_bar, self.mu_bar + TRUNCATION * self.sigma_bar

    def pdf(self, r):
        return std_normal_pdf((np.asarray(r, dtype=float) - self.mu_bar) / self.sigma_bar) / self.sigma_bar

    def cdf(self, r):
        return std_normal_cdf((np.asarray(r, dtype=float) - self.mu_bar) / self.sigma_bar)

    def sample(self, n: int, rng: RngStream) -> np.ndarray:
        return self.mu_bar + self.sigma_bar * rng.standard_normal(n)


ReturnDistribution = Union[Normal, SkewNormalParams]


@dataclass(frozen=True)
class OmegaEstimate:
    value: float
    method: str
    error_estimate: float
    threshold: float

    @property
    def paper_value(self) -> float:
        """``Omega - 2``: the quantity whose range matches the published skewness plot."""
        return self.value - 2.0


def _cdf_tol(tol: float, width: float) -> float:
    return 0.1 * tol / max(width, 1.0)


def upper_area(dist: ReturnDistribution, L: float, tol: float = 1e-10) -> tuple[float, float]:
    """``int_L^inf (1 - F)`` over the truncated support, with its error estimate."""
    lo, hi = dist.bounds()
    if L >= hi:
        return 0.0, 0.0
    a = max(L, lo)
    if isinstance(dist, SkewNormalParams):
        ctol = _cdf_tol(tol, hi - lo)
        f = lambda x: dist.sf(x, ctol)  # noqa: E731
    else:
        f = lambda x: std_normal_cdf(-(x - dist.mu_bar) / dist.sigma_bar)  # noqa: E731
    val, err = integrate_with_error(f, a, hi, tol)
    # below the window 1 - F is 1 up to the truncated mass
    return val + (a - L), err


def lower_area(dist: ReturnDistribution, L: float, tol: float = 1e-10) -> tuple[float, float]:
    """``int_-inf^L F`` over the truncated support, with its error estimate."""
    lo, hi = dist.bounds()
    if L <= lo:
        return 0.0, 0.0
    b = min(L, hi)
    if isinstance(dist, SkewNormalParams):
        ctol = _cdf_tol(tol, hi - lo)
        f = lambda x: dist.cdf(x, ctol)  # noqa: E731
    else:
        f = dist.cdf
    val, err = integrate_with_error(f, lo, b, tol)
    return val + (L - b), err


def upper_partial_moment(dist: ReturnDistribution, L: float, tol: float = 1e-10) -> float:
    """``E[(R - L)+]`` by quadrature of ``(r - L) f(r)``."""
    lo, hi = dist.bounds()
    if L >= hi:
        return 0.0
    return integrate_with_error(lambda r: (r - L) * dist.pdf(r), max(L, lo), hi, tol)[0] \
        + max(lo - L, 0.0)


def lower_partial_moment(dist: ReturnDistribution, L: float, tol: float = 1e-10) -> tuple[float, float]:
    """``E[(L - R)+]`` by quadrature of ``(L - r) f(r)``."""
    lo, hi = dist.bounds()
    if L <= lo:
        return 0.0, 0.0
    val, err = integrate_with_error(lambda r: (L - r) * dist.pdf(r), lo, min(L, hi), tol)
    return val + max(L - hi, 0.0), err


def _relative(fn, dist: ReturnDistribution, L: float, tol: float) -> tuple[float, float]:
    """Run ``fn`` again with a proportionally tighter tolerance when its value is below one.

    A thin lower tail makes Omega large, and an absolute error on a small
    denominator turns into a large error on the ratio.
    """
    val, err = fn(dist, L, tol)
    if tol < val < 1.0:
        val, err = fn(dist, L, tol * max(val, MIN_RELATIVE_SCALE))
    return val, err


def omega_cdf_ratio(dist: ReturnDistribution, L: float, tol: float = 1e-10) -> OmegaEstimate:
    """Omega as the ratio of the area above ``F`` right of ``L`` to the area under ``F`` left of it."""
    num, num_err = _relative(upper_area, dist, L, tol)
    den, den_err = _relative(lower_area, dist, L, tol)
    if den <= tol:
        raise DegenerateDenominator(f"area under the CDF below L={L} is {den:.3e} <= tol")
    value = num / den
    err = (num_err + tol) / den + value * (den_err + tol) / den
    return OmegaEstimate(value, QUADRATURE, err, L)


def omega_partial_moment(dist: ReturnDistribution, L: float, tol: float = 1e-10) -> OmegaEstimate:
    """Omega as ``1 + (mean - L) / E[(L - R)+]``."""
    lpm, lpm_err = _relative(lower_partial_moment, dist, L, tol)
    if lpm <= tol:
        raise DegenerateDenominator(f"lower partial moment at L={L} is {lpm:.3e} <= tol")
    excess = dist.mean - L
    value = 1.0 + excess / lpm
    err = abs(excess) * (lpm_err + tol) / (lpm * lpm)
    return OmegaEstimate(value, PARTIAL_MOMENT, err, L)


def omega_monte_carlo(dist: ReturnDistribution, L: float, n_samples: int = DEFAULT_SAMPLES,
                      seed: int = 0) -> OmegaEstimate:
    """Partial-moment identity with ``E[(L - R)+]`` replaced by a sample mean.

    Samples are drawn in blocks of 100k, block ``b`` from stream ``(seed, b)``,
    and reduced in block order, so the result depends only on ``(seed, n)``.
    ``error_estimate`` is the delta-method standard error of Omega.
    """
    if n_samples < 1000:
        raise ValidationError("need at least 1000 samples")
    s1 = 0.0
    s2 = 0.0
    for b, start in enumerate(range(0, n_samples, MC_BLOCK)):
        size = min(MC_BLOCK, n_samples - start)
        shortfall = np.maximum(L - dist.sample(size, RngStream(seed, b)), 0.0)
        s1 += float(shortfall.sum())
        s2 += float(shortfall @ shortfall)
    mean = s1 / n_samples
    if not mean > 0:
        raise DegenerateDenominator(f"no sample fell below L={L}")
    var = max(s2 / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    se_mean = math.sqrt(var / n_samples)
    excess = dist.mean - L
    value = 1.0 + excess / mean
    return OmegaEstimate(value, MONTE_CARLO, abs(excess) * se_mean / (mean * mean), L)


# Gaussian generator g(u) = exp(-u / 2) / sqrt(2 pi) of the elliptical family.
def _gauss_H1(x: float) -> float:
    """Antiderivative of g; the constant is chosen so that ``H1(z^2) / 2 == -phi(z)``."""
    return -2.0 * math.exp(-0.5 * x) / math.sqrt(2.0 * math.pi)


def _gauss_H2(x: float) -> float:
    """Antiderivative of ``g(x^2)``, i.e. the normal CDF."""
    return float(std_normal_cdf(x))


_GAUSS_K = 1.0  # integral of g(x^2) over the real line


def omega_from_z(z: float) -> float:
    """``G(z) = 1 - K z / (z H2(z) - H1(z^2) / 2)`` for the Gaussian generator."""
    return 1.0 - _GAUSS_K * z / (z * _gauss_H2(z) - 0.5 * _gauss_H1(z * z))


def omega_elliptical_normal(mu_bar: float, sigma_bar: float, L: float) -> OmegaEstimate:
    if not sigma_bar > 0:
        raise ValidationError(f"sigma_bar must be positive, got {sigma_bar!r}")
    z = (L - mu_bar) / sigma_bar
    return OmegaEstimate(omega_from_z(z), CLOSED_FORM, 0.0, L)


def normal_lower_partial_moment(mu_bar: float, sigma_bar: float, L: float) -> float:
    """``E[(L - R)+] = sigma (z Phi(z) + phi(z))`` for ``R ~ N(mu, sigma^2)``."""
    z = (L - mu_bar) / sigma_bar
    return sigma_bar * (z * float(std_normal_cdf(z)) + float(std_normal_pdf(z)))


def omega(dist: ReturnDistribution, L: float, method: str = QUADRATURE, *, tol: float = 1e-10,
          n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> OmegaEstimate:
    if method == QUADRATURE:
        return omega_cdf_ratio(dist, L, tol)
    if method == PARTIAL_MOMENT:
        return omega_partial_moment(dist, L, tol)
    if method == MONTE_CARLO:
        return omega_monte_carlo(dist, L, n_samples, seed)
    if method == CLOSED_FORM:
        if not isinstance(dist, Normal):
            raise ValidationError("the closed form is only available for normal returns")
        return omega_elliptical_normal(dist.mu_bar, dist.sigma_bar, L)
    raise ValidationError(f"unknown Omega method {method!r}")


@dataclass(frozen=True)
class EquivalenceReport:
    sharpe_argmax: np.ndarray
    omega_argmax: np.ndarray
    best_sharpe: float
    best_omega: float
    coincide: bool
    flat: bool
    cell: float
    points: int


def _scores(points: np.ndarray, model: ExcessModel, method: str, tol: float):
    excess = points @ model.e
    sd = np.sqrt(np.einsum("ij,jk,ik->i", points, model.sigma, points))
    S = excess / sd
    L = model.benchmark
    if method == CLOSED_FORM:
        Om = np.array([omega_from_z(-s) for s in S])
    else:
        Om = np.array([omega(Normal(x + L, s), L, method, tol=tol).value
                       for x, s in zip(excess, sd)])
    return S, Om


def argmax_equivalence_probe(model: ExcessModel, grid_step: float = 0.01, *,
                             refine_step: float | None = None, method: str = CLOSED_FORM,
                             tol: float = 1e-10) -> EquivalenceReport:
    """Compare the simplex-grid maximizers of Omega and Sharpe under normal returns.

    With ``refine_step`` both maximizers are re-searched on a finer grid
    restricted to one coarse cell around the coarse maximizers. The two
    agree when they are at most one (final) grid cell apart in sup norm.
    """
    if model.n > 3:
        raise DimensionTooLarge(f"equivalence probe supports n <= 3, got {model.n}")
    pts = simplex_grid(model.n, grid_step)
    S, Om = _scores(pts, model, method, tol)
    cell = grid_step
    if np.ptp(S) <= 1e-12 * max(1.0, np.max(np.abs(S))):
        i = int(np.argmax(S))
        return EquivalenceReport(pts[i], pts[int(np.argmax(Om))], float(S[i]), float(np.max(Om)),
                                 True, True, cell, len(pts))
    i_s, i_o = int(np.argmax(S)), int(np.argmax(Om))
    if refine_step is not None:
        fine = simplex_grid(model.n, refine_step)
        near = ((np.max(np.abs(fine - pts[i_s]), axis=1) <= grid_step + 1e-12)
                | (np.max(np.abs(fine - pts[i_o]), axis=1) <= grid_step + 1e-12))
        pts = fine[near]
        S, Om = _scores(pts, model, method, tol)
        i_s, i_o = int(np.argmax(S)), int(np.argmax(Om))
        cell = refine_step
    gap = float(np.max(np.abs(pts[i_s] - pts[i_o])))
    return EquivalenceReport(pts[i_s], pts[i_o], float(S[i_s]), float(Om[i_o]),
                             gap <= cell + 1e-12, False, cell, len(pts))
