"""Seeded generators for the AR(2), stochastic volatility, QAR(2) and iid designs.

All randomness is drawn by inversion from the counter-based uniforms in
:mod:`quantspec.rng`, so a given ``(spec, seed)`` reproduces the same path
on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import signal, stats
from scipy.special import ndtri

from . import rng as _rng
from .exceptions import InvalidInputError, PositivityRejectionError
from .series import Series, SeriesLike, as_series

__all__ = [
    "AR2_BETA1",
    "AR2_BETA2",
    "ProcessSpec",
    "ContaminationSpec",
    "gen_ar2",
    "gen_stochastic_volatility",
    "gen_qar2",
    "gen_iid",
    "contaminate",
    "simulate",
    "normal_quantile",
    "IID_DISTRIBUTIONS",
]

AR2_BETA1 = 2.0 * 0.95 * math.cos(2.0 * math.pi * 0.22)
AR2_BETA2 = -(0.95**2)
BURN_IN = 400

IID_DISTRIBUTIONS = ("normal", "chi2_3", "uniform", "student_t", "cauchy")


def normal_quantile(p):
    """Inverse standard normal CDF."""
    return ndtri(p)


def _check_n(n: int, burn_in: int):
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n}")
    if int(burn_in) != burn_in or burn_in < 0:
        raise InvalidInputError(f"burn_in must be a nonnegative integer, got {burn_in}")


def _ar2_filter(innov: np.ndarray, init: tuple[float, float], b1: float, b2: float) -> np.ndarray:
    # init = (y_{-1}, y_{-2})
    a = [1.0, -b1, -b2]
    zi = signal.lfiltic([1.0], a, y=list(init))
    out, _ = signal.lfilter([1.0], a, innov, zi=zi)
    return out


def gen_ar2(n: int, seed: int, burn_in: int = BURN_IN, index: int = 0) -> Series:
    """AR(2) path ``X_t = b1 X_{t-1} + b2 X_{t-2} + e_t`` with a peak at ``2 pi 0.22``.

    Two standard normal starting values and ``n + burn_in`` standard normal
    innovations are drawn; the first ``burn_in`` values are discarded.
    """
    _check_n(n, burn_in)
    gen = _rng.substream(seed, "ar2", index)
    z = _rng.normal(gen, n + burn_in + 2)
    x = _ar2_filter(z[2:], (z[1], z[0]), AR2_BETA1, AR2_BETA2)
    return Series(x[burn_in:], label="ar2")


def gen_stochastic_volatility(n: int, theta: float, seed: int, burn_in: int = BURN_IN,
                              index: int = 0) -> Series:
    """Stochastic volatility path ``X_t = e_t exp(u_t)``.

    ``u_t = b1 u_{t-1} + b2 u_{t-2} + e_{t-1}`` with the AR(2) coefficients
    and ``e_t ~ N(0, theta^2)``. The log-volatility recursion starts at zero;
    the volatility shock is the previous period's innovation, so ``e_t`` is
    independent of ``u_t``.
    """
    _check_n(n, burn_in)
    if not theta > 0:
        raise InvalidInputError("theta must be positive")
    gen = _rng.substream(seed, "sv", index)
    total = n + burn_in
    e = _rng.normal(gen, total + 1, scale=float(theta))  # e_0 .. e_total
    u = _ar2_filter(e[:-1], (0.0, 0.0), AR2_BETA1, AR2_BETA2)  # u_1 .. u_total
    x = e[1:] * np.exp(u)
    return Series(x[burn_in:], label="sv")


def _qar_path(eps: np.ndarray) -> np.ndarray:
    z = ndtri(eps)
    b0 = 4.0 + z
    b1 = np.where(eps > 0.2, 0.8, 0.0)
    b2 = np.where(eps > 0.6, 0.6, 0.0)
    x = np.empty(eps.size)
    x1 = x2 = 0.0
    for t in range(eps.size):
        xt = b0[t] + b1[t] * x1 + b2[t] * x2
        x[t] = xt
        x2, x1 = x1, xt
    return x


def gen_qar2(n: int, seed: int, max_attempts: int = 100, burn_in: int = BURN_IN,
             index: int = 0) -> Series:
    """QAR(2) path ``X_t = 4 + Phi^-1(e_t) + 0.8*1{e_t>0.2} X_{t-1} + 0.6*1{e_t>0.6} X_{t-2}``.

    ``e_t`` are iid Uniform(0, 1). Paths with a nonpositive value after the
    burn-in are discarded and redrawn from a fresh substream.

    Raises
    ------
    PositivityRejectionError
        If ``max_attempts`` consecutive paths all contain a nonpositive value.
    """
    _check_n(n, burn_in)
    if max_attempts < 1:
        raise InvalidInputError("max_attempts must be at least 1")
    for attempt in range(max_attempts):
        gen = _rng.substream(seed, f"qar:{attempt}", index)
        x = _qar_path(_rng.uniform(gen, n + burn_in))[burn_in:]
        if np.all(x > 0):
            return Series(x, label="qar2")
    raise PositivityRejectionError(f"no positive QAR path in {max_attempts} attempts")


def _iid_from_uniform(u: np.ndarray, dist: str, nu: Optional[float]) -> np.ndarray:
    if dist == "normal":
        return ndtri(u)
    if dist == "chi2_3":
        return stats.chi2.ppf(u, 3)
    if dist == "uniform":
        return u.copy()
    if dist == "student_t":
        if nu is None or not nu > 0:
            raise InvalidInputError("student_t needs positive degrees of freedom nu")
        return stats.t.ppf(u, nu)
    if dist == "cauchy":
        return np.tan(np.pi * (u - 0.5))
    raise InvalidInputError(f"unknown distribution {dist!r}; choose from {IID_DISTRIBUTIONS}")


def gen_iid(n: int, dist: str, seed: int, nu: Optional[float] = None, index: int = 0) -> Series:
    """iid sample by inversion; ``dist`` is one of :data:`IID_DISTRIBUTIONS`."""
    _check_n(n, 0)
    if n < 2:
        raise InvalidInputError("a series needs at least 2 observations")
    gen = _rng.substream(seed, f"iid:{dist}", index)
    return Series(_iid_from_uniform(_rng.uniform(gen, n), dist, nu), label=f"iid:{dist}")


@dataclass(frozen=True)
class ContaminationSpec:
    """Additive outliers ``J_t * Z_t`` with ``J_t ~ Bernoulli(p)``.

    ``noise`` is ``'cauchy'`` or ``'student_t'`` (the latter with ``nu``).
    """

    p: float
    noise: str = "cauchy"
    nu: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidInputError("contamination probability must lie in [0, 1]")
        if self.noise not in ("cauchy", "student_t"):
            raise InvalidInputError(f"unknown contamination noise {self.noise!r}")
        if self.noise == "student_t" and (self.nu is None or not self.nu > 0):
            raise InvalidInputError("student_t contamination needs nu > 0")


def contaminate(series: SeriesLike, spec: ContaminationSpec, index: int = 0) -> Series:
    """Add ``J_t * Z_t`` to each observation, independently of the series."""
    s = as_series(series)
    gen = _rng.substream(spec.seed, f"contam:{spec.noise}", index)
    u = _rng.uniform(gen, (2, s.n))
    hit = u[0] < spec.p
    z = _iid_from_uniform(u[1], spec.noise, spec.nu)
    return Series(np.where(hit, s.values + z, s.values), label=s.label)


@dataclass(frozen=True)
class ProcessSpec:
    """A data-generating process.

    ``kind`` is ``'ar2'``, ``'sv'``, ``'qar'`` or ``'iid'``. ``theta`` is the
    innovation scale of ``'sv'``; ``dist`` and ``nu`` select the law for
    ``'iid'``.
    """

    kind: str
    n: int
    seed: int = 0
    burn_in: int = BURN_IN
    theta: float = 1.0
    dist: str = "normal"
    nu: Optional[float] = None
    max_attempts: int = 100

    def __post_init__(self):
        if self.kind not in ("ar2", "sv", "qar", "iid"):
            raise InvalidInputError(f"unknown process kind {self.kind!r}")
        _check_n(self.n, self.burn_in)


def simulate(spec: ProcessSpec, contamination: Optional[ContaminationSpec] = None,
             index: int = 0) -> Series:
    """Draw path ``index`` of ``spec``, optionally contaminated."""
    if spec.kind == "ar2":
        x = gen_ar2(spec.n, spec.seed, spec.burn_in, index)
    elif spec.kind == "sv":
        x = gen_stochastic_volatility(spec.n, spec.theta, spec.seed, spec.burn_in, index)
    elif spec.kind == "qar":
        x = gen_qar2(spec.n, spec.seed, spec.max_attempts, spec.burn_in, index)
    else:
        x = gen_iid(spec.n, spec.dist, spec.seed, spec.nu, index)
    if contamination is not None:
        x = contaminate(x, contamination, index)
    return x
