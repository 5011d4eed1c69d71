"""Lag windows for smoothed periodograms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from .exceptions import InvalidInputError

__all__ = [
    "KERNELS",
    "LagWindowSpec",
    "window_value",
    "default_bandwidth",
    "QS_TRUNCATION",
]

# Lags beyond QS_TRUNCATION * B_n are dropped for kernels without compact
# support. |w_QS(x)| <= 25 / (12 pi^2 x^2) * (1 + 5 / (6 pi |x|)), so the
# discarded weights sum to at most about 25 B_n / (12 pi^2 * 50) ~ 0.0043 B_n
# in absolute value, and each multiplies an autocovariance that is itself
# small at such lags.
QS_TRUNCATION = 50.0


def _bartlett(x):
    ax = np.abs(x)
    return np.where(ax <= 1.0, 1.0 - ax, 0.0)


def _parzen(x):
    ax = np.abs(x)
    inner = 1.0 - 6.0 * ax**2 + 6.0 * ax**3
    outer = 2.0 * (1.0 - ax) ** 3
    return np.where(ax <= 0.5, inner, np.where(ax <= 1.0, outer, 0.0))


def _tukey_hanning(x):
    ax = np.abs(x)
    return np.where(ax <= 1.0, 0.5 * (1.0 + np.cos(np.pi * ax)), 0.0)


def _daniell(x):
    return np.sinc(x)


# sin(a)/a - cos(a) = sum_k (-1)^(k+1) 2k a^(2k) / (2k+1)!, so
# QS(x) = sum_k (-1)^(k+1) 6k a^(2k-2) / (2k+1)!  with a = 6 pi x / 5
_QS_SERIES = np.array([(-1.0) ** (k + 1) * 6.0 * k / math.factorial(2 * k + 1) for k in range(1, 9)])
_QS_SERIES_CUT = 0.5  # |a| below which the series replaces the cancelling closed form


def _quadratic_spectral(x):
    x = np.asarray(x, dtype=np.float64)
    a = 6.0 * np.pi * x / 5.0
    out = np.empty_like(x)
    small = np.abs(a) < _QS_SERIES_CUT
    a2 = a[small] ** 2
    out[small] = np.polynomial.polynomial.polyval(a2, _QS_SERIES)
    big = ~small
    ab = a[big]
    out[big] = 3.0 / ab**2 * (np.sin(ab) / ab - np.cos(ab))
    return out


KERNELS: dict = {
    "bartlett": (_bartlett, 1.0),
    "parzen": (_parzen, 1.0),
    "tukey_hanning": (_tukey_hanning, 1.0),
    "daniell": (_daniell, None),
    "quadratic_spectral": (_quadratic_spectral, None),
}

_ALIASES = {"qs": "quadratic_spectral", "tukey": "tukey_hanning", "triangular": "bartlett"}


@dataclass(frozen=True)
class LagWindowSpec:
    """A lag window ``w`` together with a bandwidth ``B_n``.

    ``kernel`` is either one of the names in :data:`KERNELS` or a callable
    ``w(x)`` accepting arrays. For a callable, pass ``support=1.0`` if it
    vanishes outside ``[-1, 1]`` and ``name`` for reporting.
    """

    kernel: Union[str, Callable] = "quadratic_spectral"
    bandwidth: float = 1.0
    support: Optional[float] = None
    name: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.kernel, str):
            key = _ALIASES.get(self.kernel, self.kernel)
            if key not in KERNELS:
                raise InvalidInputError(f"unknown kernel {self.kernel!r}")
            object.__setattr__(self, "kernel", key)
            object.__setattr__(self, "support", KERNELS[key][1])
            object.__setattr__(self, "name", key)
        elif callable(self.kernel):
            if self.name is None:
                object.__setattr__(self, "name", getattr(self.kernel, "__name__", "custom"))
        else:
            raise InvalidInputError("kernel must be a name or a callable")
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise InvalidInputError(f"bandwidth must be positive, got {self.bandwidth}")

    @property
    def func(self) -> Callable:
        return KERNELS[self.kernel][0] if isinstance(self.kernel, str) else self.kernel

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def max_lag(self, n: int) -> int:
        """Largest lag that can carry nonzero weight for a sample of size n."""
        if self.support is not None:
            m = int(math.floor(self.support * self.bandwidth))
        else:
            m = int(math.floor(QS_TRUNCATION * self.bandwidth))
        return max(0, min(n - 1, m))

    def lag_weights(self, n: int) -> np.ndarray:
        """``w(j / B_n)`` for ``j = 0..max_lag(n)``."""
        j = np.arange(self.max_lag(n) + 1, dtype=np.float64)
        return self(j / self.bandwidth)

    def squared_integral(self) -> float:
        """``int_{-1}^{1} w(x)^2 dx`` for compactly supported windows."""
        if self.kernel == "bartlett":
            return 2.0 / 3.0
        val, _ = integrate.quad(lambda x: float(self(x)) ** 2, -1.0, 1.0, limit=200, points=[0.0])
        return val


def window_value(spec: LagWindowSpec, x: float) -> float:
    """Evaluate the lag window at a single point."""
    return float(spec(np.asarray([x]))[0])


def default_bandwidth(n: int, c: float = 13.0) -> float:
    """Bandwidth rule ``B_n = c * n**(1/5)``."""
    if c <= 0:
        raise InvalidInputError("bandwidth constant must be positive")
    return c * float(n) ** 0.2
