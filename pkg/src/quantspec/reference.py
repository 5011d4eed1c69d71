"""Population spectra used as targets in the simulation studies."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import ndtri

from .simulate import AR2_BETA1, AR2_BETA2
from .spectral import cosine_sum

__all__ = [
    "ar2_spectrum",
    "ar2_autocorrelation",
    "gaussian_crossing_autocov",
    "gaussian_quantile_spectrum",
    "ar2_quantile_spectrum",
    "contaminated_ar2_spectrum",
]


def ar2_spectrum(lam, beta1: float = AR2_BETA1, beta2: float = AR2_BETA2, sigma2: float = 1.0):
    """``sigma^2 / (2 pi) |1 - b1 e^{-i lam} - b2 e^{-2 i lam}|^-2``."""
    lam = np.asarray(lam, dtype=np.float64)
    z = np.exp(-1j * lam)
    return sigma2 / (2.0 * np.pi) / np.abs(1.0 - beta1 * z - beta2 * z * z) ** 2


def contaminated_ar2_spectrum(lam, p: float, nu: float):
    """AR(2) spectrum plus the white-noise level ``(p/2pi) nu/(nu-2)`` of t(nu) outliers."""
    return ar2_spectrum(lam) + p / (2.0 * np.pi) * nu / (nu - 2.0)


def ar2_autocorrelation(max_lag: int, beta1: float = AR2_BETA1, beta2: float = AR2_BETA2) -> np.ndarray:
    """Autocorrelations ``rho(0..max_lag)`` from the Yule-Walker recursion."""
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    if max_lag >= 1:
        rho[1] = beta1 / (1.0 - beta2)
    for j in range(2, max_lag + 1):
        rho[j] = beta1 * rho[j - 1] + beta2 * rho[j - 2]
    return rho


def gaussian_crossing_autocov(rho: np.ndarray, tau: float) -> np.ndarray:
    """``Cov(1{X_0 < q}, 1{X_j < q})`` for a stationary Gaussian process at its tau-quantile q.

    Uses ``d/dr Phi_2(h, h; r) = exp(-h^2/(1+r)) / (2 pi sqrt(1 - r^2))``,
    which for ``tau = 0.5`` reduces to ``arcsin(rho)/(2 pi)``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if tau == 0.5:
        return np.arcsin(rho) / (2.0 * np.pi)
    h = float(ndtri(tau))
    out = np.empty(rho.size)
    for i, r in enumerate(rho):
        if r >= 1.0:
            out[i] = tau * (1.0 - tau)
            continue
        val, _ = integrate.quad(lambda s: math.exp(-h * h / (1.0 + s)) / math.sqrt(1.0 - s * s),
                                0.0, float(r), limit=200)
        out[i] = val / (2.0 * np.pi)
    return out


def gaussian_quantile_spectrum(lam, rho: np.ndarray, tau: float = 0.5):
    """Quantile spectrum of a Gaussian process with autocorrelations ``rho``."""
    r = gaussian_crossing_autocov(rho, tau)
    r[0] = tau * (1.0 - tau)
    return cosine_sum(r, np.atleast_1d(np.asarray(lam, dtype=np.float64))) / (2.0 * np.pi)


def ar2_quantile_spectrum(lam, tau: float = 0.5, max_lag: int = 2000):
    """Quantile spectrum of the Gaussian AR(2) design.

    Autocorrelations decay like ``0.95^j``; 2000 lags leave a truncation
    error far below double precision.
    """
    return gaussian_quantile_spectrum(lam, ar2_autocorrelation(max_lag), tau)
