"""Cramér-von Mises tests for a flat quantile spectrum.

Two ways of obtaining critical values are provided. The Monte Carlo test
simulates the statistic from iid Bernoulli crossings, which is exact for iid
data with a known quantile. The block-wise wild bootstrap perturbs blocks of
centered crossing products with external multipliers and remains valid under
serial dependence.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import rng as _rng
from .exceptions import InvalidInputError
from .series import SeriesLike, as_series, autocov, check_tau, crossing_indicators

__all__ = [
    "CvmResult",
    "psi_norm_sq",
    "cm_from_crossings",
    "cm_statistic",
    "cm_statistic_known_quantile",
    "mc_null_statistics",
    "mc_flatness_test",
    "block_multipliers",
    "bootstrap_statistics",
    "bootstrap_flatness_test",
    "default_block_size",
    "empirical_critical_value",
    "mc_p_value",
]

_NULL_BATCH = 512


@dataclass(frozen=True)
class CvmResult:
    statistic: float
    critical_value: float
    p_value: float
    alpha: float
    decision: str
    procedure: str
    replications: int
    seed: int
    tau: float
    n: int
    block_size: Optional[int] = None
    multiplier: Optional[str] = None
    known_quantile: Optional[float] = None
    replicates: np.ndarray = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("replicates")
        return d


def psi_norm_sq(j: int) -> float:
    """Squared L2 norm on ``[0, pi]`` of ``sin(j*lambda)/(pi*j)``, i.e. ``1/(2 pi j^2)``."""
    if int(j) != j or j < 1:
        raise InvalidInputError(f"j must be a positive integer, got {j}")
    return 1.0 / (2.0 * math.pi * j * j)


def _cm_from_acov(r: np.ndarray, n: int) -> np.ndarray:
    lags = np.arange(1, n, dtype=np.float64)
    return n / (2.0 * math.pi) * np.sum((r[..., 1:n] / lags) ** 2, axis=-1)


def cm_from_crossings(v: np.ndarray) -> Union[float, np.ndarray]:
    """``(n/2pi) sum_{j=1}^{n-1} (r(j)/j)^2`` for one sequence or each row of a matrix."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    out = _cm_from_acov(autocov(v, n - 1, method="fft" if n > 32 or v.ndim > 1 else "direct"), n)
    return float(out) if v.ndim == 1 else out


def cm_statistic(series: SeriesLike, tau: float) -> float:
    """Cramér-von Mises statistic with crossings at the sample quantile."""
    s = as_series(series)
    return cm_from_crossings(crossing_indicators(s, check_tau(tau)).values)


def cm_statistic_known_quantile(series: SeriesLike, tau: float, xi0: float) -> float:
    """Same statistic with crossings taken at a known threshold ``xi0``."""
    s = as_series(series)
    return cm_from_crossings(crossing_indicators(s, check_tau(tau), float(xi0)).values)


def mc_null_statistics(n: int, tau: float, replications: int, seed: int,
                       start: int = 0) -> np.ndarray:
    """Draws of the statistic from iid Bernoulli(tau) crossings.

    Replicate ``i`` uses substream ``(seed, 'mc-null', i)``; any contiguous
    slice of replicates can therefore be generated independently and
    concatenated.
    """
    tau = check_tau(tau)
    out = np.empty(replications)
    for b0 in range(0, replications, _NULL_BATCH):
        b1 = min(replications, b0 + _NULL_BATCH)
        v = np.empty((b1 - b0, n))
        for i in range(b0, b1):
            u = _rng.uniform(_rng.substream(seed, f"mc-null:{n}:{tau!r}", start + i), n)
            v[i - b0] = tau - (u < tau)
        out[b0:b1] = cm_from_crossings(v)
    return out


def empirical_critical_value(draws: np.ndarray, alpha: float) -> float:
    """``inf{x : F_R(x) >= 1 - alpha}`` for the empirical law of the draws."""
    return float(np.quantile(draws, 1.0 - alpha, method="inverted_cdf"))


def mc_p_value(statistic: float, draws: np.ndarray) -> float:
    return (int(np.count_nonzero(draws >= statistic)) + 1) / (draws.size + 1)


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def mc_flatness_test(series: SeriesLike, tau: float, alpha: float = 0.05, replications: int = 999,
                     seed: int = 0, known_xi0: Optional[float] = None,
                     null_draws: Optional[np.ndarray] = None) -> CvmResult:
    """Monte Carlo Cramér-von Mises test for flatness.

    Parameters
    ----------
    series : Series or array_like
    tau : float
    alpha : float
        Nominal level.
    replications : int
        Number of simulated null statistics, at least 99.
    seed : int
    known_xi0 : float, optional
        If given, crossings are taken at this threshold, which makes the test
        exact for iid data.
    null_draws : ndarray, optional
        Precomputed output of :func:`mc_null_statistics` for the same ``n``
        and ``tau``; overrides ``replications`` and ``seed``.
    """
    s = as_series(series)
    tau = check_tau(tau)
    alpha = _check_alpha(alpha)
    if null_draws is None:
        if replications < 99:
            raise InvalidInputError("use at least 99 Monte Carlo replications")
        null_draws = mc_null_statistics(s.n, tau, replications, seed)
    null_draws = np.asarray(null_draws, dtype=np.float64)
    if known_xi0 is None:
        stat = cm_statistic(s, tau)
    else:
        stat = cm_statistic_known_quantile(s, tau, known_xi0)
    crit = empirical_critical_value(null_draws, alpha)
    return CvmResult(stat, crit, mc_p_value(stat, null_draws), alpha,
                     "reject" if stat > crit else "accept", "monte_carlo", int(null_draws.size),
                     int(seed), tau, s.n, known_quantile=known_xi0, replicates=null_draws)


def default_block_size(n: int) -> int:
    """Block length ``round(sqrt(n)/2)``, at least 1."""
    return max(1, int(math.floor(math.sqrt(n) / 2.0 + 0.5)))


MultiplierLike = Union[str, Callable[[np.random.Generator, int], np.ndarray]]


def _draw_multipliers(gen: np.random.Generator, size: int, multiplier: MultiplierLike) -> np.ndarray:
    if callable(multiplier):
        return np.asarray(multiplier(gen, size), dtype=np.float64)
    if multiplier == "rademacher":
        return _rng.rademacher(gen, size)
    if multiplier == "normal":
        return _rng.normal(gen, size)
    if multiplier == "mammen":
        s5 = math.sqrt(5.0)
        p = (s5 + 1.0) / (2.0 * s5)
        return np.where(_rng.uniform(gen, size) < p, -(s5 - 1.0) / 2.0, (s5 + 1.0) / 2.0)
    raise InvalidInputError(f"unknown multiplier {multiplier!r}")


def _n_blocks(n: int, b_n: int) -> int:
    if not 1 <= b_n <= n:
        raise InvalidInputError(f"block size must satisfy 1 <= b_n <= n={n}, got {b_n}")
    return -(-n // b_n)


def block_multipliers(eta: np.ndarray, n: int, b_n: int) -> np.ndarray:
    """Expand one multiplier per block to ``omega_t`` for ``t = 1..n``.

    A trailing partial block (when ``b_n`` does not divide ``n``) keeps its
    own multiplier.
    """
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape[-1] != _n_blocks(n, b_n):
        raise InvalidInputError("one multiplier per block is required")
    return np.repeat(eta, b_n, axis=-1)[..., :n]


def _block_design(v: np.ndarray, b_n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-block sums of centered crossing products.

    Returns ``A`` of shape ``(n, L)`` with
    ``A[j, s] = sum_{t in block s, t > j} (v_t v_{t-j} - r(j))`` and the
    autocovariances ``r``.
    """
    n = v.size
    L = _n_blocks(n, b_n)
    r = autocov(v, n - 1, method="fft" if n > 32 else "direct")
    nfft = 1 << int(math.ceil(math.log2(2 * n)))
    fv = np.fft.rfft(v, nfft)
    masked = np.zeros((L, n))
    starts = np.arange(L) * b_n
    for s in range(L):
        masked[s, starts[s] : starts[s] + b_n] = v[starts[s] : starts[s] + b_n]
    # sum_{t in block} v_t v_{t-j}: cross-correlation of the masked copy with v
    c = np.fft.irfft(np.fft.rfft(masked, nfft, axis=1) * np.conj(fv), nfft, axis=1)[:, :n]
    # count of t in block s with t > j (0-based: t >= j)
    t_hi = np.minimum(starts + b_n, n)
    j = np.arange(n)[:, None]
    counts = np.clip(t_hi[None, :] - np.maximum(starts[None, :], j), 0, None)
    A = c.T - r[:, None] * counts
    return A, r


def bootstrap_statistics(v: np.ndarray, b_n: int, etas: np.ndarray) -> np.ndarray:
    """Bootstrap statistics for each row of block multipliers ``etas``.

    ``etas`` has shape ``(R, L)`` with ``L = ceil(n / b_n)``.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    A, _ = _block_design(v, b_n)
    etas = np.atleast_2d(np.asarray(etas, dtype=np.float64))
    if etas.shape[1] != A.shape[1]:
        raise InvalidInputError("one multiplier per block is required")
    rstar = (etas @ A.T) / n  # (R, n)
    return _cm_from_acov(rstar, n)


def bootstrap_flatness_test(series: SeriesLike, tau: float, alpha: float = 0.05,
                            replications: int = 999, b_n: Optional[int] = None, seed: int = 0,
                            multiplier: MultiplierLike = "rademacher") -> CvmResult:
    """Block-wise wild bootstrap Cramér-von Mises test.

    ``b_n`` defaults to ``round(sqrt(n)/2)``. ``multiplier`` is
    ``'rademacher'`` (default), ``'normal'``, ``'mammen'`` or a callable
    ``f(generator, size)`` returning mean-zero, unit-variance draws.
    """
    s = as_series(series)
    tau = check_tau(tau)
    alpha = _check_alpha(alpha)
    n = s.n
    b_n = default_block_size(n) if b_n is None else int(b_n)
    L = _n_blocks(n, b_n)
    if replications < 1:
        raise InvalidInputError("replications must be positive")
    v = crossing_indicators(s, tau).values
    stat = cm_from_crossings(v)
    etas = np.empty((replications, L))
    for i in range(replications):
        etas[i] = _draw_multipliers(_rng.substream(seed, "bootstrap", i), L, multiplier)
    draws = bootstrap_statistics(v, b_n, etas)
    crit = empirical_critical_value(draws, alpha)
    mname = multiplier if isinstance(multiplier, str) else getattr(multiplier, "__name__", "custom")
    return CvmResult(stat, crit, mc_p_value(stat, draws), alpha, "reject" if stat > crit else "accept",
                     "bootstrap", replications, int(seed), tau, n, block_size=b_n,
                     multiplier=mname, replicates=draws)
