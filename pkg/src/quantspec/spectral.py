"""Classical and quantile periodograms and their lag-window smoothed versions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidInputError, UnsupportedKernelError
from .series import SeriesLike, as_series, autocov, check_tau, crossing_indicators, sample_quantile
from .windows import LagWindowSpec, default_bandwidth

__all__ = [
    "FrequencyGrid",
    "SpectralEstimate",
    "quantile_periodogram",
    "classical_periodogram",
    "smoothed_quantile_periodogram",
    "smoothed_classical_periodogram",
    "split_sample_estimator",
    "split_sample_variance",
    "SplitSampleEstimate",
    "cosine_sum",
]

_CHUNK = 1 << 22  # entries per cos-matrix block in direct sums


@dataclass(frozen=True)
class FrequencyGrid:
    """Sorted frequencies in ``(-pi, pi]``.

    Natural grids remember their sample size and the integer indices ``j`` of
    the points ``2*pi*j/n`` so that FFT-based paths can be used on them.
    """

    freqs: np.ndarray
    n: Optional[int] = None
    indices: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        f = np.array(self.freqs, dtype=np.float64).ravel()
        if f.size == 0:
            raise InvalidInputError("a frequency grid needs at least one point")
        if np.any(f <= -np.pi) or np.any(f > np.pi) or not np.all(np.isfinite(f)):
            raise InvalidInputError("grid frequencies must lie in (-pi, pi]")
        if np.any(np.diff(f) < 0):
            raise InvalidInputError("grid frequencies must be sorted")
        f.flags.writeable = False
        object.__setattr__(self, "freqs", f)
        if self.indices is not None:
            idx = np.array(self.indices, dtype=np.int64)
            idx.flags.writeable = False
            object.__setattr__(self, "indices", idx)

    @property
    def kind(self) -> str:
        return "natural" if self.n is not None else "explicit"

    def __len__(self):
        return self.freqs.size

    @classmethod
    def natural(cls, n: int, full: bool = False, include_zero: bool = True) -> "FrequencyGrid":
        """Natural frequencies ``2*pi*j/n``.

        By default ``j = 0..floor(n/2)``, i.e. the points in ``[0, pi]``. With
        ``full=True`` all ``n`` points in ``(-pi, pi]`` are returned.
        """
        if n < 1:
            raise InvalidInputError("n must be positive")
        if full:
            j = np.arange(-((n - 1) // 2), n // 2 + 1)
        else:
            j = np.arange(0 if include_zero else 1, n // 2 + 1)
        if j.size == 0:
            raise InvalidInputError(f"no natural frequencies for n={n}")
        freqs = 2.0 * np.pi * j / n
        freqs[2 * j == n] = np.pi  # 2*pi*(n/2)/n may round above pi
        return cls(freqs=freqs, n=n, indices=j)

    @classmethod
    def explicit(cls, freqs) -> "FrequencyGrid":
        return cls(freqs=np.sort(np.asarray(freqs, dtype=np.float64)))

    @classmethod
    def uniform(cls, count: int) -> "FrequencyGrid":
        """``count`` equally spaced points covering ``[0, pi]``."""
        if count < 1:
            raise InvalidInputError("count must be positive")
        return cls.explicit(np.linspace(0.0, np.pi, count) if count > 1 else [0.0])

    def is_natural_for(self, n: int) -> bool:
        return self.n == n and self.indices is not None


@dataclass(frozen=True)
class SpectralEstimate:
    """Estimated spectrum on a frequency grid.

    ``meta`` records the estimator name and smoothing parameters. ``tau`` is
    ``None`` for classical estimates.
    """

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)
    tau: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def freqs(self) -> np.ndarray:
        return self.grid.freqs

    @property
    def null_value(self) -> Optional[float]:
        """Flat-spectrum level: ``tau(1-tau)/(2pi)`` or ``gamma(0)/(2pi)``."""
        if self.tau is not None:
            return self.tau * (1.0 - self.tau) / (2.0 * np.pi)
        gamma0 = self.meta.get("gamma0")
        return None if gamma0 is None else gamma0 / (2.0 * np.pi)


def cosine_sum(coefs: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """``c_0 + 2 * sum_{j>=1} c_j cos(j*lambda)`` evaluated lag by lag.

    Each frequency is handled independently and summed in lag order, so the
    result at a frequency does not depend on how the grid is split.
    """
    coefs = np.asarray(coefs, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    m = coefs.size
    out = np.empty(freqs.size)
    lags = np.arange(1, m, dtype=np.float64)
    step = max(1, _CHUNK // max(m, 1))
    for start in range(0, freqs.size, step):
        lam = freqs[start : start + step]
        if m > 1:
            c = np.cos(np.multiply.outer(lam, lags))
            out[start : start + step] = coefs[0] + 2.0 * (c @ coefs[1:])
        else:
            out[start : start + step] = coefs[0]
    return out


def _natural_cosine_sum(coefs: np.ndarray, n: int, indices: np.ndarray) -> np.ndarray:
    """FFT evaluation of :func:`cosine_sum` at ``2*pi*j/n`` for lags below n."""
    if coefs.size > n:
        raise InvalidInputError("more lags than natural frequencies")
    spec = np.fft.rfft(coefs, n)  # sum_j c_j exp(-i 2 pi j k / n)
    k = np.mod(indices, n)
    kk = np.where(k > n // 2, n - k, k)
    return 2.0 * spec.real[kk] - coefs[0]


def _choose_path(grid: FrequencyGrid, n: int, method: str) -> str:
    if method == "auto":
        return "fft" if grid.is_natural_for(n) else "cosine"
    if method == "fft" and not grid.is_natural_for(n):
        raise InvalidInputError("the FFT path needs the natural grid of the same sample size")
    if method not in ("fft", "cosine"):
        raise InvalidInputError(f"unknown method {method!r}")
    return method


def _raw_periodogram(v: np.ndarray, grid: FrequencyGrid, method: str) -> np.ndarray:
    n = v.size
    path = _choose_path(grid, n, method)
    if path == "fft":
        dft = np.fft.fft(v)[np.mod(grid.indices, n)]
        return (dft.real**2 + dft.imag**2) / (2.0 * np.pi * n)
    r = autocov(v)
    return cosine_sum(r, grid.freqs) / (2.0 * np.pi)


def _resolve_grid(grid: Optional[FrequencyGrid], n: int) -> FrequencyGrid:
    return FrequencyGrid.natural(n) if grid is None else grid


def quantile_periodogram(series: SeriesLike, tau: float, grid: Optional[FrequencyGrid] = None,
                         method: str = "auto", xi: Optional[float] = None) -> SpectralEstimate:
    """Quantile periodogram ``(2 pi n)^-1 |sum_t V_t exp(-i t lambda)|^2``.

    Parameters
    ----------
    series : Series or array_like
    tau : float
        Probability level in (0, 1).
    grid : FrequencyGrid, optional
        Defaults to the natural frequencies in ``[0, pi]``.
    method : {'auto', 'fft', 'cosine'}
        ``'fft'`` takes squared moduli of the discrete Fourier transform and
        requires the natural grid; ``'cosine'`` sums autocovariances against
        cosines and works on any grid.
    xi : float, optional
        Known threshold to use instead of the sample quantile.
    """
    s = as_series(series)
    tau = check_tau(tau)
    cs = crossing_indicators(s, tau, xi)
    grid = _resolve_grid(grid, s.n)
    vals = _raw_periodogram(cs.values, grid, method)
    return SpectralEstimate(grid, vals, tau, {"estimator": "quantile_periodogram", "xi": cs.xi_hat})


def classical_periodogram(series: SeriesLike, grid: Optional[FrequencyGrid] = None,
                          method: str = "auto") -> SpectralEstimate:
    """Periodogram of the mean-centered series."""
    s = as_series(series)
    x = s.values - s.values.mean()
    grid = _resolve_grid(grid, s.n)
    vals = _raw_periodogram(x, grid, method)
    gamma0 = float(np.dot(x, x) / s.n)
    return SpectralEstimate(grid, vals, None, {"estimator": "classical_periodogram", "gamma0": gamma0})


def _smooth(v: np.ndarray, spec: LagWindowSpec, grid: FrequencyGrid, method: str) -> np.ndarray:
    n = v.size
    w = spec.lag_weights(n)
    r = autocov(v, w.size - 1)
    coefs = w * r
    path = _choose_path(grid, n, method)
    if path == "fft":
        return _natural_cosine_sum(coefs, n, grid.indices) / (2.0 * np.pi)
    return cosine_sum(coefs, grid.freqs) / (2.0 * np.pi)


def _default_spec(spec: Optional[LagWindowSpec], n: int) -> LagWindowSpec:
    return LagWindowSpec("quadratic_spectral", default_bandwidth(n)) if spec is None else spec


def smoothed_quantile_periodogram(series: SeriesLike, tau: float, spec: Optional[LagWindowSpec] = None,
                                  grid: Optional[FrequencyGrid] = None, method: str = "auto",
                                  xi: Optional[float] = None) -> SpectralEstimate:
    """Lag-window estimate ``(2 pi)^-1 sum_{|j|<n} w(j/B_n) r_tau(j) cos(j lambda)``.

    Only lags with possibly nonzero weight enter the sum: ``|j| <= B_n`` for
    windows supported on ``[-1, 1]`` and ``|j| <= 50 B_n`` otherwise. The
    default window is quadratic-spectral with ``B_n = 13 n^(1/5)``.
    """
    s = as_series(series)
    tau = check_tau(tau)
    spec = _default_spec(spec, s.n)
    if spec.bandwidth < 1:
        raise InvalidInputError("smoothing needs bandwidth >= 1")
    cs = crossing_indicators(s, tau, xi)
    grid = _resolve_grid(grid, s.n)
    vals = _smooth(cs.values, spec, grid, method)
    meta = {"estimator": "smoothed_quantile_periodogram", "kernel": spec.name,
            "bandwidth": spec.bandwidth, "xi": cs.xi_hat}
    return SpectralEstimate(grid, vals, tau, meta)


def smoothed_classical_periodogram(series: SeriesLike, spec: Optional[LagWindowSpec] = None,
                                   grid: Optional[FrequencyGrid] = None,
                                   method: str = "auto") -> SpectralEstimate:
    """Lag-window estimate built from mean-centered autocovariances."""
    s = as_series(series)
    spec = _default_spec(spec, s.n)
    if spec.bandwidth < 1:
        raise InvalidInputError("smoothing needs bandwidth >= 1")
    x = s.values - s.values.mean()
    grid = _resolve_grid(grid, s.n)
    vals = _smooth(x, spec, grid, method)
    meta = {"estimator": "smoothed_classical_periodogram", "kernel": spec.name,
            "bandwidth": spec.bandwidth, "gamma0": float(np.dot(x, x) / s.n)}
    return SpectralEstimate(grid, vals, None, meta)


@dataclass(frozen=True)
class SplitSampleEstimate:
    value: float
    m_n: int
    l_n: int
    xi: float
    bandwidth: float
    lam: float

    def variance(self, g: Optional[float] = None, spec: Optional[LagWindowSpec] = None) -> float:
        """Asymptotic variance of ``sqrt(m_n/B_n) * (estimate - g)``."""
        g = self.value if g is None else g
        if spec is None:
            raise InvalidInputError("the lag window is needed for the variance")
        return split_sample_variance(spec, g, self.lam)


def _h(x: float) -> float:
    """1 if x is an integer multiple of 2*pi, else 0."""
    k = x / (2.0 * np.pi)
    return 1.0 if abs(k - round(k)) < 1e-12 else 0.0


def split_sample_variance(spec: LagWindowSpec, g: float, lam: float) -> float:
    """``(1 + h(2 lambda)) g^2 int_{-1}^{1} w^2``, with h the indicator of ``2 pi Z``."""
    return (1.0 + _h(2.0 * lam)) * g * g * spec.squared_integral()


def _check_split_kernel(spec: LagWindowSpec):
    if spec.support is None or spec.support > 1.0:
        raise UnsupportedKernelError(
            f"the split-sample estimator needs a Lipschitz window supported on [-1, 1]; got {spec.name}")


def split_sample_estimator(series: SeriesLike, tau: float, spec: Optional[LagWindowSpec] = None,
                           p_exponent: float = 1.1, lam: float = 0.0,
                           full: bool = False):
    """Split-sample smoothed quantile periodogram at one frequency.

    The quantile is estimated from observations ``1..m_n - l_n`` and the
    crossing products from observations ``m_n + 1..n``, where
    ``m_n = floor(n/2)`` and ``l_n = ceil((log n)^p)``. The remaining ``l_n``
    observations are dropped.

    Returns the estimate, or a :class:`SplitSampleEstimate` with
    ``full=True``. The default window is Bartlett with ``B_n = n^(1/5)``.
    """
    s = as_series(series)
    tau = check_tau(tau)
    n = s.n
    if spec is None:
        spec = LagWindowSpec("bartlett", n ** 0.2)
    _check_split_kernel(spec)
    if p_exponent <= 1.0:
        raise InvalidInputError("p_exponent must exceed 1")
    m = n // 2
    l = int(math.ceil(math.log(n) ** p_exponent)) if n > 1 else 0
    if m - l < 2:
        raise InvalidInputError(f"series too short for the split-sample estimator (n={n})")
    x = s.values
    xi = sample_quantile(x[: m - l], tau)
    v = np.where(x[m:] < xi, tau - 1.0, tau)  # observations m+1..n
    w = spec.lag_weights(m)  # |j| < m_n
    sums = autocov(v, min(w.size - 1, v.size - 1)) * v.size
    coefs = w[: sums.size] * sums / m
    val = float(cosine_sum(coefs, np.array([lam]))[0] / (2.0 * np.pi))
    if not full:
        return val
    return SplitSampleEstimate(val, m, l, xi, spec.bandwidth, float(lam))
