"""Series container, sample quantiles, crossing indicators and their autocovariances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidInputError

__all__ = [
    "Series",
    "CrossingSequence",
    "AutoCovSequence",
    "as_series",
    "check_tau",
    "sample_quantile",
    "crossing_indicators",
    "crossing_autocov",
    "autocov",
]


@dataclass(frozen=True)
class Series:
    """An ordered sample of finite real observations.

    Parameters
    ----------
    values : array_like
        One-dimensional sequence with at least two finite entries.
    label : str, optional
        Free-form name carried through to reports.
    """

    values: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidInputError("a series must be one-dimensional")
        if arr.size < 2:
            raise InvalidInputError(f"a series needs at least 2 observations, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InvalidInputError(f"non-finite value at position {bad + 1}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def n(self) -> int:
        return self.values.size


SeriesLike = Union[Series, np.ndarray, list, tuple]


def as_series(x: SeriesLike) -> Series:
    if isinstance(x, Series):
        return x
    return Series(x)


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise InvalidInputError(f"tau must lie strictly between 0 and 1, got {tau}")
    return tau


@dataclass(frozen=True)
class CrossingSequence:
    """Crossing indicators ``tau - 1{X_t < xi}`` for one probability level."""

    tau: float
    xi_hat: float
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class AutoCovSequence:
    """Autocovariances of a crossing sequence for lags ``0..max_lag``."""

    tau: float
    r: np.ndarray = field(repr=False)

    def __getitem__(self, j):
        return self.r[abs(j)] if isinstance(j, (int, np.integer)) else self.r[j]

    def __len__(self):
        return self.r.size

    @property
    def max_lag(self) -> int:
        return self.r.size - 1


def sample_quantile(series: SeriesLike, tau: float) -> float:
    """Smallest minimizer of the check loss ``sum(rho_tau(X_t - x))``.

    The minimizer set is an interval between two order statistics; the left
    end is the order statistic ``X_(ceil(n*tau))``. ``n*tau`` is evaluated in
    exact rational arithmetic on the shortest decimal form of ``tau``, so
    that, e.g., ``n=40, tau=0.4`` gives index 16 even though the binary
    double nearest 0.4 is slightly larger than 2/5.
    """
    if not isinstance(series, Series) and np.size(series) == 0:
        raise InvalidInputError("cannot take the quantile of an empty series")
    tau = check_tau(tau)
    x = np.asarray(as_series(series).values)
    n = x.size
    k = math.ceil(Fraction(repr(tau)) * n)
    return float(np.partition(x, k - 1)[k - 1])


def crossing_indicators(series: SeriesLike, tau: float, xi: Optional[float] = None) -> CrossingSequence:
    """Crossing indicators ``V_t = tau - 1{X_t < xi}``.

    When ``xi`` is omitted the sample quantile is used. Ties ``X_t == xi``
    count as not below the threshold.
    """
    tau = check_tau(tau)
    x = as_series(series).values
    if xi is None:
        xi = sample_quantile(x, tau)
    v = np.where(x < xi, tau - 1.0, tau)
    v.flags.writeable = False
    return CrossingSequence(tau=tau, xi_hat=float(xi), values=v)


def autocov(v: np.ndarray, max_lag: Optional[int] = None, method: str = "auto") -> np.ndarray:
    """Raw autocovariances ``n^-1 sum_{t>j} v_t v_{t-j}`` (no centering, divisor n).

    ``v`` may be two-dimensional, in which case each row is treated as a
    separate sequence.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    if max_lag is None:
        max_lag = n - 1
    if not 0 <= max_lag < n:
        raise InvalidInputError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    if method == "auto":
        method = "fft" if n * (max_lag + 1) > 32768 or v.ndim > 1 else "direct"
    if method == "fft":
        nfft = 1 << int(math.ceil(math.log2(2 * n - 1))) if n > 1 else 2
        f = np.fft.rfft(v, nfft, axis=-1)
        acf = np.fft.irfft(f.real**2 + f.imag**2, nfft, axis=-1)[..., : max_lag + 1]
        return acf / n
    if method == "direct":
        if v.ndim > 1:
            return np.stack([autocov(row, max_lag, "direct") for row in v])
        return np.array([np.dot(v[j:], v[: n - j]) for j in range(max_lag + 1)]) / n
    raise InvalidInputError(f"unknown autocovariance method {method!r}")


def crossing_autocov(crossings: CrossingSequence, max_lag: Optional[int] = None, method: str = "auto") -> AutoCovSequence:
    """Plug-in autocovariances of a crossing sequence.

    Parameters
    ----------
    crossings : CrossingSequence
    max_lag : int, optional
        Largest lag, ``0 <= max_lag < n``. Defaults to ``n - 1``.
    method : {'auto', 'fft', 'direct'}
        ``'direct'`` sums the products lag by lag; ``'fft'`` uses a
        zero-padded transform. Both use divisor ``n`` at every lag.
    """
    r = autocov(crossings.values, max_lag, method)
    r.flags.writeable = False
    return AutoCovSequence(tau=crossings.tau, r=r)
