"""Chi-squared confidence intervals from averaged periodogram ordinates."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import stats

from .exceptions import BoundaryError, InvalidInputError
from .series import SeriesLike, as_series, check_tau, crossing_indicators
from .spectral import FrequencyGrid

__all__ = [
    "chi2_quantile",
    "snap_to_natural",
    "averaged_ordinates",
    "chi2_interval",
    "ConfidenceBand",
    "confidence_band",
    "PointwiseTestReport",
    "flatness_test_at_frequency",
    "ordinates",
]


@lru_cache(maxsize=1024)
def chi2_quantile(df: int, p: float) -> float:
    """Quantile of the chi-squared distribution with ``df`` degrees of freedom."""
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p must lie in (0, 1), got {p}")
    if int(df) != df or df < 1:
        raise InvalidInputError(f"df must be a positive integer, got {df}")
    return float(stats.chi2.ppf(p, int(df)))


def snap_to_natural(n: int, lam: float) -> int:
    """Index ``j`` of the natural frequency nearest to ``lam`` (halves round up)."""
    return int(math.floor(n * lam / (2.0 * math.pi) + 0.5))


def ordinates(series: SeriesLike, tau: Optional[float] = None) -> np.ndarray:
    """Raw periodogram ordinates at ``2*pi*j/n`` for ``j = 0..n-1``.

    Uses crossing indicators at the sample quantile when ``tau`` is given and
    the mean-centered series otherwise.
    """
    s = as_series(series)
    if tau is None:
        v = s.values - s.values.mean()
    else:
        v = crossing_indicators(s, check_tau(tau)).values
    dft = np.fft.fft(v)
    return (dft.real**2 + dft.imag**2) / (2.0 * np.pi * s.n)


def _window_indices(n: int, lam: float, k: int) -> np.ndarray:
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    j = snap_to_natural(n, lam)
    lo, hi = j - k, j + k
    # strictly inside (0, pi): 1 <= lo and 2*hi < n
    if lo < 1 or 2 * hi >= n:
        raise BoundaryError(
            f"ordinates {lo}..{hi} (times 2pi/{n}) around lambda={lam:.6g} leave the open interval (0, pi)")
    return np.arange(lo, hi + 1)


def averaged_ordinates(series: SeriesLike, tau: Optional[float], lam: float, k: int,
                       periodogram: Optional[np.ndarray] = None) -> float:
    """Mean of the ``2k+1`` periodogram ordinates centred at the natural frequency nearest ``lam``.

    ``tau=None`` averages the classical periodogram instead. A precomputed
    ordinate vector from :func:`ordinates` may be passed to avoid repeated
    transforms.
    """
    n = periodogram.size if periodogram is not None else as_series(series).n
    idx = _window_indices(n, lam, k)
    q = ordinates(series, tau) if periodogram is None else periodogram
    return float(np.mean(q[idx]))


def chi2_interval(qbar: float, k: int, alpha: float = 0.05) -> tuple[float, float]:
    """Interval ``(nu*qbar/chi2_{nu,1-alpha/2}, nu*qbar/chi2_{nu,alpha/2})`` with ``nu = 4k+2``."""
    if qbar < 0:
        raise InvalidInputError("qbar must be nonnegative")
    nu = 4 * k + 2
    return (nu * qbar / chi2_quantile(nu, 1.0 - alpha / 2.0), nu * qbar / chi2_quantile(nu, alpha / 2.0))


@dataclass(frozen=True)
class ConfidenceBand:
    """Pointwise bands over a grid. Points without a valid window hold NaN."""

    grid: FrequencyGrid
    center: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    level: float
    k: int


def confidence_band(series: SeriesLike, tau: Optional[float], grid: FrequencyGrid, k: int = 4,
                    alpha: float = 0.05) -> ConfidenceBand:
    s = as_series(series)
    q = ordinates(s, tau)
    m = len(grid)
    center = np.full(m, np.nan)
    lower = np.full(m, np.nan)
    upper = np.full(m, np.nan)
    for i, lam in enumerate(grid.freqs):
        try:
            qbar = averaged_ordinates(s, tau, abs(lam), k, periodogram=q)
        except BoundaryError:
            continue
        center[i] = qbar
        lower[i], upper[i] = chi2_interval(qbar, k, alpha)
    return ConfidenceBand(grid, center, lower, upper, 1.0 - alpha, k)


@dataclass(frozen=True)
class PointwiseTestReport:
    statistic: float
    null_value: float
    lower: float
    upper: float
    critical_value: tuple
    p_value: float
    alpha: float
    decision: str
    procedure: str = "pointwise"
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["critical_value"] = list(self.critical_value)
        return d


def flatness_test_at_frequency(series: SeriesLike, tau: float, lam: float, k: int = 4,
                               alpha: float = 0.05) -> PointwiseTestReport:
    """Test ``g_tau(lambda) = tau(1-tau)/(2pi)`` with the chi-squared interval.

    Rejects when the null level falls outside the interval. The p-value is
    the two-sided tail probability of ``(4k+2) * qbar / null`` under the
    chi-squared law with ``4k+2`` degrees of freedom.
    """
    s = as_series(series)
    tau = check_tau(tau)
    qbar = averaged_ordinates(s, tau, lam, k)
    lower, upper = chi2_interval(qbar, k, alpha)
    null = tau * (1.0 - tau) / (2.0 * np.pi)
    nu = 4 * k + 2
    t = nu * qbar / null
    cdf = float(stats.chi2.cdf(t, nu))
    p = min(1.0, 2.0 * min(cdf, 1.0 - cdf))
    reject = not (lower < null < upper)
    j = snap_to_natural(s.n, lam)
    params = {"tau": tau, "lambda": float(lam), "lambda_n": 2.0 * np.pi * j / s.n, "k": k, "n": s.n}
    crit = (chi2_quantile(nu, alpha / 2.0), chi2_quantile(nu, 1.0 - alpha / 2.0))
    return PointwiseTestReport(qbar, null, lower, upper, crit, p, alpha,
                               "reject" if reject else "accept", "pointwise", params)
