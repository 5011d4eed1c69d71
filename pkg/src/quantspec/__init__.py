"""Quantile spectral analysis of time series.

Quantile periodograms and their lag-window smoothed versions, chi-squared
pointwise intervals, Cramér-von Mises flatness tests, and seeded simulators
for Monte Carlo studies.
"""

from .cvm import (CvmResult, bootstrap_flatness_test, cm_statistic, cm_statistic_known_quantile,
                  mc_flatness_test, psi_norm_sq)
from .exceptions import (BoundaryError, CsvParseError, InvalidInputError, PositivityRejectionError,
                         QuantspecError, SchemaError, UnsupportedKernelError)
from .pointwise import (ConfidenceBand, PointwiseTestReport, averaged_ordinates, chi2_interval, chi2_quantile,
                        confidence_band, flatness_test_at_frequency)
from .series import (AutoCovSequence, CrossingSequence, Series, crossing_autocov, crossing_indicators,
                     sample_quantile)
from .simulate import (ContaminationSpec, ProcessSpec, contaminate, gen_ar2, gen_iid, gen_qar2,
                       gen_stochastic_volatility, simulate)
from .spectral import (FrequencyGrid, SpectralEstimate, classical_periodogram, quantile_periodogram,
                       smoothed_classical_periodogram, smoothed_quantile_periodogram, split_sample_estimator,
                       split_sample_variance)
from .windows import LagWindowSpec, default_bandwidth, window_value

__version__ = "0.1.0"
