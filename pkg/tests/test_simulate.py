import math

import numpy as np
import pytest
from scipy.special import ndtri

from quantspec import (ContaminationSpec, FrequencyGrid, InvalidInputError, PositivityRejectionError,
                       ProcessSpec, cm_statistic, contaminate, gen_ar2, gen_iid, gen_qar2,
                       gen_stochastic_volatility, simulate, smoothed_quantile_periodogram)
from quantspec.rng import normal, substream, uniform
from quantspec.series import autocov, crossing_indicators
from quantspec.simulate import AR2_BETA1, AR2_BETA2, _qar_path, normal_quantile


def test_coefficients():
    assert AR2_BETA2 == -0.9025
    # 1.9 cos(2 pi 0.22) = 0.35602449771287678... (30-digit evaluation)
    assert AR2_BETA1 == pytest.approx(0.356024497712876781, rel=1e-15)
    assert AR2_BETA1 == pytest.approx(0.356029, abs=1e-5)


class TestRng:
    def test_open_interval(self):
        u = uniform(substream(0, "t", 0), 100_000)
        assert u.min() > 0 and u.max() < 1

    def test_streams_independent_of_order(self):
        a = [uniform(substream(3, "x", i), 5) for i in range(4)]
        b = [uniform(substream(3, "x", i), 5) for i in reversed(range(4))][::-1]
        np.testing.assert_array_equal(np.array(a), np.array(b))
        assert not np.array_equal(uniform(substream(3, "x", 0), 5), uniform(substream(3, "y", 0), 5))
        assert not np.array_equal(uniform(substream(3, "x", 0), 5), uniform(substream(4, "x", 0), 5))

    def test_normal_by_inversion(self):
        g1, g2 = substream(5, "n", 2), substream(5, "n", 2)
        np.testing.assert_array_equal(normal(g1, 10), ndtri(uniform(g2, 10)))

    def test_negative_index(self):
        with pytest.raises(ValueError):
            substream(0, "a", -1)


class TestAr2:
    def test_deterministic(self):
        np.testing.assert_array_equal(gen_ar2(300, 7).values, gen_ar2(300, 7).values)
        assert not np.array_equal(gen_ar2(300, 7).values, gen_ar2(300, 7, index=1).values)

    def test_recursion(self):
        x = gen_ar2(50, 1, burn_in=0)
        z = normal(substream(1, "ar2", 0), 52)
        y = [z[1], z[0]]  # y_{-1}, y_{-2}
        for t in range(50):
            yt = AR2_BETA1 * y[0] + AR2_BETA2 * y[1] + z[t + 2]
            assert x.values[t] == pytest.approx(yt, abs=1e-12)
            y = [yt, y[0]]

    def test_variance(self):
        b1, b2 = AR2_BETA1, AR2_BETA2
        gamma0 = (1 - b2) / ((1 + b2) * ((1 - b2) ** 2 - b1**2))
        x = np.concatenate([gen_ar2(2000, 3, index=i).values for i in range(50)])
        assert np.var(x) == pytest.approx(gamma0, rel=0.05)


class TestStochasticVolatility:
    def test_recursion(self):
        x = gen_stochastic_volatility(30, 0.7, 2, burn_in=0)
        e = normal(substream(2, "sv", 0), 31) * 0.7
        u1 = u2 = 0.0
        for t in range(30):
            u = AR2_BETA1 * u1 + AR2_BETA2 * u2 + e[t]
            assert x.values[t] == pytest.approx(e[t + 1] * math.exp(u), rel=1e-12)
            u1, u2 = u, u1

    def test_median_zero(self):
        # the sign of X_t is the sign of an iid symmetric innovation
        n = 10**5
        x = gen_stochastic_volatility(n, 1.0, 4).values
        assert abs(np.count_nonzero(x > 0) - n / 2) < 3 * math.sqrt(n) / 2
        assert abs(np.median(x)) < 3 * (0.5 / math.sqrt(n)) / 0.05  # loose density bound at 0

    def test_median_crossings_uncorrelated(self):
        n = 10**5
        v = crossing_indicators(gen_stochastic_volatility(n, 1.0, 5), 0.5).values
        r = autocov(v, 5)
        assert np.all(np.abs(r[1:]) < 3 * 0.25 / math.sqrt(n))

    def test_lower_quantile_peak(self):
        x = gen_stochastic_volatility(10**6, 1.0, 2)
        g = smoothed_quantile_periodogram(x, 0.25, grid=FrequencyGrid.explicit([2.0, 2 * math.pi * 0.22]))
        peak, far = g.values  # grid is sorted: 2 pi 0.22 < 2
        assert peak > 1.5 * far

    def test_theta_positive(self):
        with pytest.raises(InvalidInputError):
            gen_stochastic_volatility(10, 0.0, 1)


class TestQar:
    def test_forced_stream(self):
        eps = np.array([0.1, 0.05, 0.2, 0.15, 0.01])
        np.testing.assert_allclose(_qar_path(eps), 4 + ndtri(eps), rtol=1e-15)

    def test_recursion(self):
        eps = np.array([0.5, 0.7, 0.3, 0.9, 0.1])
        x1 = x2 = 0.0
        for t, e in enumerate(eps):
            xt = 4 + ndtri(e) + (0.8 * x1 if e > 0.2 else 0) + (0.6 * x2 if e > 0.6 else 0)
            assert _qar_path(eps)[t] == pytest.approx(xt, rel=1e-14)
            x1, x2 = xt, x1

    def test_positive_and_deterministic(self):
        x = gen_qar2(300, 11)
        assert np.all(x.values > 0)
        np.testing.assert_array_equal(x.values, gen_qar2(300, 11).values)

    def test_rejection_budget(self):
        # with a huge sample some value drops below zero in every attempt
        with pytest.raises(PositivityRejectionError):
            gen_qar2(200_000, 0, max_attempts=1)


class TestIid:
    def test_chi2_mean(self):
        n = 10**6
        x = gen_iid(n, "chi2_3", 1).values
        assert abs(x.mean() - 3) < 3 * math.sqrt(6 / n)

    def test_normal_quantile(self):
        assert normal_quantile(0.5) == 0.0
        assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)

    @pytest.mark.parametrize("dist, nu", [("normal", None), ("uniform", None), ("student_t", 3.0),
                                          ("cauchy", None), ("chi2_3", None)])
    def test_laws(self, dist, nu):
        from scipy import stats
        law = {"normal": stats.norm(), "uniform": stats.uniform(), "student_t": stats.t(3.0),
               "cauchy": stats.cauchy(), "chi2_3": stats.chi2(3)}[dist]
        x = gen_iid(5000, dist, 2, nu=nu).values
        assert stats.kstest(x, law.cdf).pvalue > 0.001

    def test_unknown(self):
        with pytest.raises(InvalidInputError):
            gen_iid(10, "gamma", 0)
        with pytest.raises(InvalidInputError):
            gen_iid(10, "student_t", 0)


class TestContamination:
    def test_zero_probability(self):
        x = gen_ar2(200, 1)
        y = contaminate(x, ContaminationSpec(0.0, "cauchy", seed=3))
        np.testing.assert_array_equal(x.values, y.values)

    def test_cauchy_increments(self):
        n = 10**5
        x = gen_iid(n, "normal", 1)
        d = contaminate(x, ContaminationSpec(1.0, "cauchy", seed=2)).values - x.values
        assert abs(np.median(d)) < 3 * math.pi / (2 * math.sqrt(n))

    def test_rate(self):
        n = 20_000
        x = gen_iid(n, "normal", 1)
        hit = contaminate(x, ContaminationSpec(0.15, "student_t", 2.001, seed=2)).values != x.values
        assert abs(hit.mean() - 0.15) < 3 * math.sqrt(0.15 * 0.85 / n)

    def test_median_statistic_robust(self):
        for i in range(10):
            x = gen_ar2(600, 1, index=i)
            y = contaminate(x, ContaminationSpec(0.15, "student_t", 2.001, seed=9), index=i)
            a, b = cm_statistic(x, 0.5), cm_statistic(y, 0.5)
            assert abs(b - a) < 0.5 * a

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            ContaminationSpec(1.5)
        with pytest.raises(InvalidInputError):
            ContaminationSpec(0.1, "student_t")


class TestProcessSpec:
    def test_dispatch(self):
        np.testing.assert_array_equal(simulate(ProcessSpec("ar2", 100, seed=4)).values, gen_ar2(100, 4).values)
        np.testing.assert_array_equal(simulate(ProcessSpec("iid", 100, seed=4, dist="uniform"), index=3).values,
                                      gen_iid(100, "uniform", 4, index=3).values)

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            ProcessSpec("garch", 100)
        with pytest.raises(InvalidInputError):
            ProcessSpec("ar2", 0)
        with pytest.raises(InvalidInputError):
            simulate(ProcessSpec("ar2", 1))  # a series needs two observations
