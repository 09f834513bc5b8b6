import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from omegaopt.errors import SkewnessOutOfRange, ValidationError
from omegaopt.numerics import RngStream, integrate
from omegaopt.skewnorm import SkewNormalParams, cdf, delta_from_skewness, from_moments, pdf, sample, sf

GAMMAS = [-0.9, -0.5, 0.0, 0.5, 0.9]


class TestFromMoments:
    def test_symmetric(self):
        p = from_moments(0.1, 0.3, 0.0)
        assert (p.delta, p.alpha, p.omega, p.epsilon) == (0.0, 0.0, 0.3, 0.1)

    def test_half(self):
        # mpmath at 30 digits: delta = 0.9084791207827221, alpha = 2.1737577942043691
        p = from_moments(0.1, 0.3, 0.5)
        assert p.delta == pytest.approx(0.9084791207827221, abs=1e-14)
        assert p.alpha == pytest.approx(2.1737577942043691, abs=1e-13)

    def test_sign_symmetry(self):
        a, b = from_moments(0.1, 0.3, 0.5), from_moments(0.1, 0.3, -0.5)
        assert b.delta == -a.delta and b.alpha == -a.alpha and b.omega == a.omega

    @pytest.mark.parametrize("g", GAMMAS)
    def test_moment_fidelity(self, g):
        p = from_moments(0.1, 0.3, g)
        assert abs(p.mean - 0.1) <= 1e-12
        assert abs(p.variance - 0.09) <= 1e-12

    @pytest.mark.parametrize("g", GAMMAS + [-0.99, 0.99, 0.01])
    def test_skewness_round_trip(self, g):
        assert abs(from_moments(0.1, 0.3, g).skewness - g) <= 1e-10

    @pytest.mark.parametrize("g", [-0.9, 0.5])
    def test_half_denominator_scale_breaks_variance(self, g):
        # the variant scale sigma / sqrt(1 - delta^2) misses the target variance
        d = delta_from_skewness(g)
        wrong = SkewNormalParams(0.0, 0.3 / math.sqrt(1.0 - 2.0 * d * d / 2.0), d / math.sqrt(1 - d * d))
        assert abs(wrong.variance - 0.09) > 1e-3

    def test_against_scipy_moments(self):
        p = from_moments(-0.02, 0.15, 0.7)
        m, v, s = stats.skewnorm.stats(p.alpha, loc=p.epsilon, scale=p.omega, moments="mvs")
        assert (float(m), float(v), float(s)) == pytest.approx((-0.02, 0.0225, 0.7), abs=1e-10)

    @pytest.mark.parametrize("g", [1.0, -0.995, 2.0])
    def test_out_of_range(self, g):
        with pytest.raises(SkewnessOutOfRange):
            from_moments(0.1, 0.3, g)

    def test_bad_sigma(self):
        with pytest.raises(ValidationError):
            from_moments(0.1, 0.0, 0.2)

    @settings(max_examples=200, deadline=None)
    @given(g=st.floats(-0.99, 0.99), mu=st.floats(-1, 1), sigma=st.floats(1e-3, 5))
    def test_round_trip_property(self, g, mu, sigma):
        p = from_moments(mu, sigma, g)
        assert p.mean == pytest.approx(mu, abs=1e-12 * max(1.0, sigma))
        assert p.std == pytest.approx(sigma, rel=1e-12)
        assert p.skewness == pytest.approx(g, abs=1e-10)
        assert math.copysign(1, p.alpha) == math.copysign(1, p.delta)


class TestPdf:
    def test_standard_normal(self):
        assert pdf(SkewNormalParams(0.0, 1.0, 0.0), 0.0) == pytest.approx(0.3989422804014327, rel=1e-15)

    @pytest.mark.parametrize("alpha", [-5.0, 0.3, 12.0])
    def test_at_location(self, alpha):
        p = SkewNormalParams(0.2, 0.7, alpha)
        assert p.pdf(0.2) == pytest.approx(0.3989422804014327 / 0.7, rel=1e-15)

    @pytest.mark.parametrize("g", GAMMAS + [0.99])
    def test_normalized(self, g):
        p = from_moments(0.1, 0.3, g)
        lo, hi = p.bounds()
        assert abs(integrate(p.pdf, lo, hi, 1e-12) - 1.0) <= 1e-9

    def test_matches_scipy(self):
        p = SkewNormalParams(-0.1, 0.4, 3.5)
        x = np.linspace(-2, 2, 101)
        np.testing.assert_allclose(p.pdf(x), stats.skewnorm.pdf(x, 3.5, loc=-0.1, scale=0.4),
                                   rtol=1e-12, atol=1e-300)

    def test_nonnegative(self):
        p = from_moments(0.0, 1.0, -0.95)
        assert np.all(p.pdf(np.linspace(-20, 20, 4001)) >= 0)


class TestCdf:
    def test_symmetric_median(self):
        assert cdf(SkewNormalParams(0.4, 2.0, 0.0), 0.4) == pytest.approx(0.5, abs=1e-12)

    def test_lower_tail(self):
        p = from_moments(0.1, 0.3, -0.9)
        assert cdf(p, p.bounds()[0]) <= 1e-12

    @pytest.mark.parametrize("g", [-0.95, 0.2, 0.9])
    def test_matches_scipy(self, g):
        p = from_moments(0.1, 0.3, g)
        x = np.linspace(-1.0, 1.2, 57)
        ref = stats.skewnorm.cdf(x, p.alpha, loc=p.epsilon, scale=p.omega)
        np.testing.assert_allclose(cdf(p, x), ref, atol=1e-11)

    def test_shape_and_scalar(self):
        p = from_moments(0.0, 1.0, 0.3)
        assert isinstance(cdf(p, 0.1), float)
        grid = np.linspace(-1, 1, 6).reshape(2, 3)
        out = cdf(p, grid)
        assert out.shape == (2, 3)
        np.testing.assert_allclose(out.ravel(), [cdf(p, v) for v in grid.ravel()], atol=1e-13)

    def test_monotone(self):
        p = from_moments(0.1, 0.3, 0.8)
        lo, hi = p.bounds()
        F = cdf(p, np.linspace(lo, hi, 1000))
        assert np.all(np.diff(F) >= 0)
        assert F[0] <= 1e-12 and F[-1] >= 1 - 1e-12

    def test_survival_complements_cdf(self):
        p = from_moments(0.1, 0.3, -0.6)
        x = np.linspace(-1.5, 1.0, 40)
        np.testing.assert_allclose(cdf(p, x) + sf(p, x), 1.0, atol=1e-12)

    def test_survival_upper_tail_relative(self):
        p = from_moments(0.1, 0.3, -0.6)
        ref = stats.skewnorm.sf(0.6, p.alpha, loc=p.epsilon, scale=p.omega)
        assert sf(p, 0.6) == pytest.approx(ref, rel=1e-8)

    def test_dkw_band(self):
        # at 99% the DKW band is sqrt(ln(2 / 0.01) / (2 n))
        n = 1_000_000
        p = from_moments(0.1, 0.3, 0.7)
        x = np.sort(sample(p, n, RngStream(2024, 0)))
        idx = np.linspace(0, n - 1, 2001).astype(int)
        F = cdf(p, x[idx])
        upper = (idx + 1) / n
        lower = idx / n
        dev = max(np.max(upper - F), np.max(F - lower))
        assert dev <= math.sqrt(math.log(2 / 0.01) / (2 * n))


def _batch_se(values, batches=100):
    m = values.reshape(batches, -1).mean(axis=1)
    return m.mean(), m.std(ddof=1) / math.sqrt(batches)


class TestSample:
    def test_deterministic(self):
        p = from_moments(0.1, 0.3, 0.5)
        np.testing.assert_array_equal(sample(p, 1000, RngStream(9)), sample(p, 1000, RngStream(9)))

    def test_symmetric_skewness(self):
        n = 1_000_000
        x = sample(SkewNormalParams(0.0, 1.0, 0.0), n, RngStream(1, 4))
        assert abs(stats.skew(x)) <= 4 * math.sqrt(6 / n)

    @pytest.mark.slow
    def test_moments_within_four_standard_errors(self):
        n = 10_000_000
        p = from_moments(0.1, 0.3, 0.5)
        x = sample(p, n, RngStream(77, 0))
        d = x - 0.1
        for stat, target in ((x, 0.1), (d * d, 0.09), (d ** 3 / 0.3 ** 3, 0.5)):
            mean, se = _batch_se(stat)
            assert abs(mean - target) <= 4 * se

    def test_affine_closure(self):
        n = 2_000_000
        p = from_moments(0.0, 1.0, 0.6)
        a, b = 0.3, 2.5
        y = a + b * sample(p, n, RngStream(5, 1))
        q = SkewNormalParams(a + b * p.epsilon, b * p.omega, p.alpha)
        for stat, target in ((y, q.mean), ((y - q.mean) ** 2, q.variance)):
            mean, se = _batch_se(stat)
            assert abs(mean - target) <= 4 * se

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sample(from_moments(0.0, 1.0, 0.1), 0, RngStream())
