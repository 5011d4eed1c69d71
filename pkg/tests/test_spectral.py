import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import brute_autocov
from quantspec import (FrequencyGrid, InvalidInputError, LagWindowSpec, UnsupportedKernelError,
                       classical_periodogram, crossing_indicators, gen_iid, quantile_periodogram,
                       smoothed_classical_periodogram, smoothed_quantile_periodogram, split_sample_estimator,
                       split_sample_variance)
from quantspec.series import autocov
from quantspec.spectral import _h, cosine_sum

series_st = arrays(np.float64, st.integers(4, 64), elements=st.floats(-100, 100), unique=True)
NULL = 1.0 / (8.0 * math.pi)


def dft_periodogram(v, lam):
    """Literal ``|sum_t v_t e^{-i t lam}|^2 / (2 pi n)``."""
    t = np.arange(1, len(v) + 1)
    return np.abs(np.sum(v * np.exp(-1j * t * lam))) ** 2 / (2 * np.pi * len(v))


class TestGrid:
    def test_natural(self):
        g = FrequencyGrid.natural(8)
        np.testing.assert_allclose(g.freqs, 2 * np.pi * np.arange(5) / 8)
        assert g.kind == "natural" and g.is_natural_for(8) and not g.is_natural_for(9)

    def test_full(self):
        g = FrequencyGrid.natural(5, full=True)
        np.testing.assert_allclose(g.freqs, 2 * np.pi * np.arange(-2, 3) / 5)
        assert len(FrequencyGrid.natural(6, full=True)) == 6
        assert np.all((g.freqs > -np.pi) & (g.freqs <= np.pi))

    @pytest.mark.parametrize("bad", [[4.0], [-np.pi], [1.0, 0.5], []])
    def test_invalid(self, bad):
        with pytest.raises(InvalidInputError):
            FrequencyGrid(np.array(bad))


class TestQuantilePeriodogram:
    def test_alternating(self):
        x = np.array([0.0, 1.0, 0.0, 1.0])
        v = crossing_indicators(x, 0.5, 0.5).values
        np.testing.assert_array_equal(v, [-0.5, 0.5, -0.5, 0.5])
        q = quantile_periodogram(x, 0.5, FrequencyGrid.explicit([np.pi / 2, np.pi]), xi=0.5)
        assert q.values[0] == pytest.approx(0.0, abs=1e-15)
        assert q.values[1] == pytest.approx(1.0 / (2 * np.pi), rel=1e-14)

    @given(series_st, st.floats(0.05, 0.95))
    def test_paths_and_parseval(self, x, tau):
        n = x.size
        grid = FrequencyGrid.natural(n, full=True)
        fft = quantile_periodogram(x, tau, grid, method="fft").values
        cos = quantile_periodogram(x, tau, grid, method="cosine").values
        v = crossing_indicators(x, tau).values
        np.testing.assert_allclose(fft, cos, atol=1e-10)
        np.testing.assert_allclose(fft, [dft_periodogram(v, lam) for lam in grid.freqs], atol=1e-10)
        assert np.mean(fft) == pytest.approx(brute_autocov(v, 0) / (2 * np.pi), abs=1e-10)

    @given(series_st)
    def test_monotone_invariance(self, x):
        g = FrequencyGrid.natural(x.size)
        a = quantile_periodogram(x, 0.4, g).values
        b = quantile_periodogram(x**3 if np.all(np.diff(np.sort(x**3)) > 0) else x, 0.4, g).values
        np.testing.assert_allclose(a, b, atol=1e-15)

    def test_flat_mean_known_quantile(self):
        reps, n = 1000, 128
        grid = FrequencyGrid.natural(n, full=True)
        nonzero = grid.indices != 0
        means = [quantile_periodogram(gen_iid(n, "uniform", 3, index=i), 0.5, grid, xi=0.5).values[nonzero].mean()
                 for i in range(reps)]
        se = np.std(means, ddof=1) / math.sqrt(reps)
        assert abs(np.mean(means) - NULL) < 3 * se

    def test_flat_mean_estimated_quantile_is_fixed_by_parseval(self):
        # with the sample median and even n: r(0) = 1/4 and sum V = 1, so the
        # average over the n-1 nonzero natural frequencies is deterministic
        n = 128
        grid = FrequencyGrid.natural(n, full=True)
        nonzero = grid.indices != 0
        exact = (n / (8 * np.pi) - 1 / (2 * np.pi * n)) / (n - 1)
        for i in range(20):
            q = quantile_periodogram(gen_iid(n, "uniform", 3, index=i), 0.5, grid).values
            assert q[nonzero].mean() == pytest.approx(exact, rel=1e-12)


class TestClassical:
    def test_constant(self):
        p = classical_periodogram(np.full(16, 3.2), FrequencyGrid.natural(16, include_zero=False))
        np.testing.assert_allclose(p.values, 0.0, atol=1e-28)

    def test_cosine(self):
        n = 32
        x = np.cos(2 * np.pi * np.arange(1, n + 1) / n)
        g = FrequencyGrid.natural(n, full=True)
        p = classical_periodogram(x, g).values
        hot = np.isclose(np.abs(g.freqs), 2 * np.pi / n)
        assert np.all(p[hot] > 1.0)
        np.testing.assert_allclose(p[~hot], 0.0, atol=1e-25)
        assert p[hot][0] == pytest.approx((n / 2) ** 2 / (2 * np.pi * n))

    def test_paths_n128(self, rng):
        x = rng.standard_normal(128)
        g = FrequencyGrid.natural(128, full=True)
        a = classical_periodogram(x, g, method="fft")
        b = classical_periodogram(x, g, method="cosine")
        np.testing.assert_allclose(a.values, b.values, atol=1e-10)
        assert np.mean(a.values) == pytest.approx(a.meta["gamma0"] / (2 * np.pi), abs=1e-10)
        assert a.null_value == pytest.approx(np.var(x) / (2 * np.pi))


class TestSmoothed:
    def test_bartlett_unit_bandwidth(self, rng):
        x = rng.standard_normal(50)
        est = smoothed_quantile_periodogram(x, 0.3, LagWindowSpec("bartlett", 1.0),
                                            FrequencyGrid.explicit([-1.0, 0.0, 0.7, np.pi]))
        r0 = np.mean(crossing_indicators(x, 0.3).values ** 2)
        np.testing.assert_allclose(est.values, r0 / (2 * np.pi), rtol=1e-13)

    @pytest.mark.parametrize("kernel", ["bartlett", "parzen", "tukey_hanning", "qs", "daniell"])
    def test_matches_lag_sum(self, kernel, rng):
        x = rng.standard_normal(90)
        spec = LagWindowSpec(kernel, 4.3)
        lam = np.array([0.0, 0.3, 1.9, np.pi])
        v = crossing_indicators(x, 0.6).values
        expect = [(brute_autocov(v, 0) + 2 * sum(float(spec(j / 4.3)) * brute_autocov(v, j) * math.cos(j * l)
                                                   for j in range(1, spec.max_lag(90) + 1))) / (2 * np.pi)
                  for l in lam]
        got = smoothed_quantile_periodogram(x, 0.6, spec, FrequencyGrid.explicit(lam)).values
        np.testing.assert_allclose(got, expect, atol=1e-13)

    @given(series_st)
    def test_fft_cosine_paths_and_symmetry(self, x):
        n = x.size
        spec = LagWindowSpec("qs", 2.5)
        g = FrequencyGrid.natural(n, full=True)
        a = smoothed_quantile_periodogram(x, 0.5, spec, g, method="fft").values
        b = smoothed_quantile_periodogram(x, 0.5, spec, g, method="cosine").values
        np.testing.assert_allclose(a, b, atol=1e-12)
        assert np.all(a >= -1e-12)
        # value at -lambda equals value at lambda
        j = g.indices
        for i in np.flatnonzero(j > 0):
            k = np.flatnonzero(j == -j[i])
            if k.size:
                assert a[k[0]] == pytest.approx(a[i], abs=1e-14)

    def test_classical_constant(self):
        est = smoothed_classical_periodogram(np.full(40, -1.5), LagWindowSpec("parzen", 3.0))
        np.testing.assert_allclose(est.values, 0.0, atol=1e-28)

    def test_null_value(self, rng):
        est = smoothed_quantile_periodogram(rng.standard_normal(64), 0.25)
        assert est.null_value == pytest.approx(0.25 * 0.75 / (2 * np.pi))
        assert est.meta["bandwidth"] == pytest.approx(13 * 64**0.2)

    def test_flat_pointwise_scale(self):
        # at n=10^4 the estimate at a few fixed frequencies stays within 4 sd of the flat level,
        # sd = level * sqrt(2 pi B / n * int W^2) with the QS window
        n = 10_000
        x = gen_iid(n, "uniform", 21)
        est = smoothed_quantile_periodogram(x, 0.5, grid=FrequencyGrid.explicit([0.5, 1.5, 2.5]))
        B = 13 * n**0.2
        sd = NULL * math.sqrt(B / n)
        assert np.all(np.abs(est.values - NULL) < 4 * sd)

    def test_small_bandwidth_rejected(self):
        with pytest.raises(InvalidInputError):
            smoothed_quantile_periodogram(np.arange(10.0), 0.5, LagWindowSpec("bartlett", 0.5))


class TestSplitSample:
    def test_h(self):
        assert _h(2 * math.pi) == 1.0
        assert _h(2 * math.pi / 3) == 0.0
        assert _h(0.0) == 1.0

    def test_variance(self):
        spec = LagWindowSpec("bartlett", 3.0)
        assert split_sample_variance(spec, NULL, math.pi) == pytest.approx(2 * NULL**2 * 2 / 3)
        assert split_sample_variance(spec, NULL, math.pi / 3) == pytest.approx(NULL**2 * 2 / 3)

    def test_matches_definition(self, rng):
        x = rng.standard_normal(300)
        n, m = 300, 150
        l = math.ceil(math.log(n) ** 1.1)
        spec = LagWindowSpec("bartlett", n**0.2)
        xs = np.sort(x[: m - l])
        xi = xs[math.ceil(0.5 * (m - l)) - 1]
        v = np.where(x < xi, -0.5, 0.5)  # index t-1 holds V_t
        lam = 1.1
        total = 0.0
        for j in range(-(m - 1), m):
            wj = float(spec(j / spec.bandwidth))
            if wj == 0.0:
                continue
            s = sum(v[t - 1] * v[t - 1 - abs(j)] for t in range(abs(j) + m + 1, n + 1))
            total += wj * math.cos(j * lam) * s
        expect = total / (2 * math.pi * m)
        est = split_sample_estimator(x, 0.5, spec, 1.1, lam, full=True)
        assert est.value == pytest.approx(expect, abs=1e-14)
        assert (est.m_n, est.l_n, est.xi) == (m, l, xi)

    @pytest.mark.parametrize("kernel", ["qs", "daniell"])
    def test_unbounded_support_rejected(self, kernel):
        with pytest.raises(UnsupportedKernelError):
            split_sample_estimator(np.arange(100.0), 0.5, LagWindowSpec(kernel, 2.0))

    def test_mean(self):
        n, reps = 4096, 500
        vals = np.array([split_sample_estimator(gen_iid(n, "uniform", 11, index=i), 0.5, None, 1.1, math.pi / 2)
                         for i in range(reps)])
        assert abs(vals.mean() - NULL) < 3 * vals.std(ddof=1) / math.sqrt(reps)

    def test_finite_bandwidth_variance(self):
        # with B = n^(1/5) ~ 5.3 only even lags survive at pi/2 and lag 0 is constant at tau = 1/2,
        # so the variance follows the finite lag sum rather than the integral of w^2
        n = 4096
        B, m = n**0.2, n // 2
        spec = LagWindowSpec("bartlett", B)
        j = np.arange(1, int(B) + 1)
        exact = 4 * np.sum(spec(j / B) ** 2 * np.cos(j * np.pi / 2) ** 2 * (n - m - j) / 16) / (2 * np.pi * m) ** 2
        vals = np.array([split_sample_estimator(gen_iid(n, "uniform", 12, index=i), 0.5, spec, 1.1, np.pi / 2)
                         for i in range(2000)])
        assert vals.var(ddof=1) == pytest.approx(exact, rel=0.1)


def test_cosine_sum_against_loop(rng):
    c = rng.standard_normal(7)
    lam = rng.uniform(-3, 3, 5)
    expect = [c[0] + 2 * sum(c[j] * math.cos(j * l) for j in range(1, 7)) for l in lam]
    np.testing.assert_allclose(cosine_sum(c, lam), expect, atol=1e-13)
