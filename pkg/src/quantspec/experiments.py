"""Monte Carlo drivers for coverage, MISE, and size/power studies.

Every replication ``i`` draws its data from substream ``(seed, ..., i)`` and
returns a row of per-cell outcomes. Rows are produced in fixed-size chunks,
optionally on several worker processes, and stacked in replication order, so
the aggregated result does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from typing import Callable, Optional

import numpy as np
from scipy import integrate, stats
from scipy.special import ndtri

from . import rng as _rng
from .cvm import (bootstrap_statistics, cm_from_crossings, default_block_size, empirical_critical_value,
                  mc_null_statistics, _draw_multipliers, _n_blocks, bootstrap_flatness_test)
from .exceptions import BoundaryError, InvalidInputError
from .pointwise import averaged_ordinates, chi2_interval, ordinates
from .reference import ar2_quantile_spectrum, ar2_spectrum, contaminated_ar2_spectrum
from .series import crossing_indicators
from .simulate import ContaminationSpec, ProcessSpec, simulate
from .spectral import FrequencyGrid, smoothed_classical_periodogram, smoothed_quantile_periodogram
from .windows import LagWindowSpec

__all__ = [
    "ExperimentConfig",
    "Cell",
    "ExperimentResult",
    "run_coverage",
    "run_mise",
    "run_size_power",
    "run_experiment",
    "block_size_rule",
    "population_quantile",
]

CHUNK = 100
PAPER_BLOCK_SIZES = {100: 5, 200: 8, 300: 10}


def block_size_rule(n: int) -> int:
    """Block lengths 5, 8 and 10 for n = 100, 200, 300; ``round(sqrt(n)/2)`` otherwise."""
    return PAPER_BLOCK_SIZES.get(n, default_block_size(n))


@dataclass
class ExperimentConfig:
    """Settings for one Monte Carlo study.

    ``taus`` lists quantile levels; ``classical=True`` adds the classical
    estimator where the experiment supports it. ``test`` selects
    ``'monte_carlo'``, ``'bootstrap'`` or ``'pointwise'`` for size/power runs.
    """

    experiment: str = "coverage"
    process: str = "ar2"
    theta: float = 1.0
    dist: str = "normal"
    nu: Optional[float] = None
    burn_in: int = 400
    contamination_p: float = 0.0
    contamination_noise: Optional[str] = None
    contamination_nu: Optional[float] = None
    n: list = field(default_factory=lambda: [600])
    taus: list = field(default_factory=lambda: [0.5])
    classical: bool = False
    ks: list = field(default_factory=lambda: [4])
    lambdas: list = field(default_factory=lambda: [2 * math.pi * 0.22])
    bandwidth_cs: list = field(default_factory=lambda: [13.0])
    kernel: str = "quadratic_spectral"
    test: str = "monte_carlo"
    block_sizes: Optional[dict] = None
    multiplier: str = "rademacher"
    known_quantile: bool = False
    alpha: float = 0.05
    replications: int = 2000
    null_replications: int = 100_000
    bootstrap_replications: int = 999
    warp_speed: bool = True
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in ("coverage", "mise", "size_power"):
            raise InvalidInputError(f"unknown experiment {self.experiment!r}")
        if self.replications < 1:
            raise InvalidInputError("replications must be at least 1")
        if self.test not in ("monte_carlo", "bootstrap", "pointwise"):
            raise InvalidInputError(f"unknown test {self.test!r}")
        self.n = [int(v) for v in self.n]
        self.taus = [float(t) for t in self.taus]
        self.ks = [int(k) for k in self.ks]
        self.lambdas = [float(v) for v in self.lambdas]
        if self.experiment == "coverage":
            for lam in self.lambdas:
                if not 0.0 < lam < math.pi:
                    raise InvalidInputError("coverage frequencies must lie in (0, pi)")
        for t in self.taus:
            if not 0.0 < t < 1.0:
                raise InvalidInputError(f"tau must lie in (0, 1), got {t}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def process_spec(self, n: int) -> ProcessSpec:
        return ProcessSpec(self.process, n, seed=self.seed, burn_in=self.burn_in, theta=self.theta,
                           dist=self.dist, nu=self.nu)

    def contamination(self) -> Optional[ContaminationSpec]:
        if self.contamination_noise is None:
            return None
        return ContaminationSpec(self.contamination_p, self.contamination_noise, self.contamination_nu,
                                 seed=self.seed + 1)

    def block_size(self, n: int) -> int:
        if self.block_sizes and str(n) in {str(k) for k in self.block_sizes}:
            return int({str(k): v for k, v in self.block_sizes.items()}[str(n)])
        return block_size_rule(n)


@dataclass
class Cell:
    """One entry of a results table."""

    n: int
    estimate: float
    mc_se: float
    replications: int
    tau: Optional[float] = None
    k: Optional[int] = None
    b_n: Optional[int] = None
    lam: Optional[float] = None
    c: Optional[float] = None
    estimator: str = ""
    note: str = ""

    def key(self) -> tuple:
        return (self.n, self.tau, self.k if self.b_n is None else self.b_n, self.lam, self.c, self.estimator)


CSV_FIELDS = ["experiment", "process", "estimator", "n", "tau", "k", "b_n", "lambda", "c",
              "estimate", "mc_se", "replications", "note"]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list
    runtime: dict = field(default_factory=dict)

    def find(self, **keys) -> Cell:
        """The unique cell whose attributes match ``keys`` (``lam`` compared to 1e-9)."""
        hits = []
        for c in self.cells:
            ok = True
            for k, v in keys.items():
                cv = getattr(c, k)
                if isinstance(v, float) and cv is not None:
                    ok = ok and abs(cv - v) < 1e-9
                else:
                    ok = ok and cv == v
            if ok:
                hits.append(c)
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {keys}")
        return hits[0]

    def rows(self) -> list:
        out = []
        for c in self.cells:
            out.append({
                "experiment": self.config.experiment, "process": self.config.process,
                "estimator": c.estimator, "n": c.n, "tau": c.tau, "k": c.k, "b_n": c.b_n,
                "lambda": c.lam, "c": c.c, "estimate": c.estimate, "mc_se": c.mc_se,
                "replications": c.replications, "note": c.note,
            })
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: _fmt(v) for k, v in row.items()})
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, path=None) -> str:
        doc = {"config": asdict(self.config), "runtime": self.runtime,
               "cells": [{k: _json_num(v) for k, v in r.items()} for r in self.rows()]}
        text = json.dumps(doc, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else format(v, ".17g")
    return v


def _json_num(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _proportion_se(p: float, r: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / r)


def _collect(fn: Callable[[int], np.ndarray], replications: int, workers: int) -> np.ndarray:
    """Rows ``fn(i)`` for ``i = 0..replications-1`` stacked in index order."""
    chunks = [range(s, min(replications, s + CHUNK)) for s in range(0, replications, CHUNK)]
    if workers <= 1 or len(chunks) == 1:
        parts = [_run_chunk(fn, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(partial(_run_chunk, fn), chunks))
    return np.concatenate(parts, axis=0)


def _run_chunk(fn, idx) -> np.ndarray:
    return np.stack([np.atleast_1d(np.asarray(fn(i), dtype=np.float64)) for i in idx])


def population_quantile(cfg: ExperimentConfig, tau: float) -> float:
    """Known marginal quantile for designs where it is available in closed form."""
    if cfg.contamination_noise is None:
        if cfg.process == "iid":
            if cfg.dist == "normal":
                return float(ndtri(tau))
            if cfg.dist == "chi2_3":
                return float(stats.chi2.ppf(tau, 3))
            if cfg.dist == "uniform":
                return float(tau)
            if cfg.dist == "student_t":
                return float(stats.t.ppf(tau, cfg.nu))
            if cfg.dist == "cauchy":
                return float(np.tan(np.pi * (tau - 0.5)))
        if cfg.process == "sv" and tau == 0.5:
            return 0.0
        if cfg.process == "ar2":
            sd = math.sqrt(float(ar2_variance()))
            return float(ndtri(tau)) * sd
    raise InvalidInputError("the population quantile is not available for this design")


def ar2_variance() -> float:
    from .simulate import AR2_BETA1 as b1, AR2_BETA2 as b2
    return (1.0 - b2) / ((1.0 + b2) * ((1.0 - b2) ** 2 - b1 * b1))


# --- coverage ---------------------------------------------------------------

def _coverage_cells(cfg: ExperimentConfig, n: int) -> list:
    cells = []
    if cfg.classical:
        for k in cfg.ks:
            for lam in cfg.lambdas:
                cells.append(("classical", None, k, lam))
    for tau in cfg.taus:
        for k in cfg.ks:
            for lam in cfg.lambdas:
                cells.append(("quantile", tau, k, lam))
    return cells


def _coverage_targets(cfg: ExperimentConfig, cells: list) -> list:
    if cfg.process != "ar2":
        raise InvalidInputError("coverage runs are defined for the AR(2) design and its contaminated variants")
    out = []
    for est, tau, k, lam in cells:
        if est == "classical":
            if cfg.contamination_noise == "cauchy":
                out.append(math.nan)  # spectrum does not exist
            elif cfg.contamination_noise == "student_t":
                out.append(float(contaminated_ar2_spectrum(lam, cfg.contamination_p, cfg.contamination_nu)))
            else:
                out.append(float(ar2_spectrum(lam)))
        else:
            # quantile spectra are taken from the uncontaminated process
            out.append(float(ar2_quantile_spectrum(lam, tau)[0]))
    return out


def _coverage_rep(cfg: ExperimentConfig, n: int, cells: list, targets: list, i: int) -> np.ndarray:
    x = simulate(cfg.process_spec(n), cfg.contamination(), index=i)
    pgrams = {}
    row = np.empty(len(cells))
    for c, ((est, tau, k, lam), target) in enumerate(zip(cells, targets)):
        if math.isnan(target):
            row[c] = math.nan
            continue
        key = None if est == "classical" else tau
        if key not in pgrams:
            pgrams[key] = ordinates(x, key)
        qbar = averaged_ordinates(None, key, lam, k, periodogram=pgrams[key])
        lo, hi = chi2_interval(qbar, k, cfg.alpha)
        row[c] = 1.0 if lo < target < hi else 0.0
    return row


def run_coverage(cfg: ExperimentConfig) -> ExperimentResult:
    """Coverage frequencies of pointwise chi-squared intervals.

    Classical intervals target the AR(2) spectrum (plus the outlier level
    for t contamination; not applicable under Cauchy contamination).
    Quantile intervals target the quantile spectrum of the clean Gaussian
    AR(2), computed from its autocorrelations.
    """
    t0 = time.perf_counter()
    out = []
    for n in cfg.n:
        cells = _coverage_cells(cfg, n)
        targets = _coverage_targets(cfg, cells)
        for _, _, k, lam in cells:
            # fail early instead of inside the workers
            j = math.floor(n * lam / (2 * math.pi) + 0.5)
            if j - k < 1 or 2 * (j + k) >= n:
                raise BoundaryError(f"window of half-width {k} at lambda={lam} leaves (0, pi) for n={n}")
        rows = _collect(partial(_coverage_rep, cfg, n, cells, targets), cfg.replications, cfg.workers)
        for c, (est, tau, k, lam) in enumerate(cells):
            if math.isnan(targets[c]):
                out.append(Cell(n, math.nan, math.nan, cfg.replications, tau, k, None, lam, None, est,
                                "not-applicable"))
                continue
            p = float(np.mean(rows[:, c]))
            out.append(Cell(n, p, _proportion_se(p, cfg.replications), cfg.replications, tau, k, None, lam,
                            None, est))
    return ExperimentResult(cfg, out, {"seconds": time.perf_counter() - t0, "workers": cfg.workers})


# --- MISE ----------------------------------------------------------------------

def _mise_rep(cfg: ExperimentConfig, n: int, refs: dict, i: int) -> np.ndarray:
    x = simulate(cfg.process_spec(n), cfg.contamination(), index=i)
    grid = FrequencyGrid.natural(n, include_zero=False)
    row = []
    for est, ref in refs.items():
        for c in cfg.bandwidth_cs:
            spec = LagWindowSpec(cfg.kernel, c * n ** 0.2)
            if est is None:
                g = smoothed_classical_periodogram(x, spec, grid).values
            else:
                g = smoothed_quantile_periodogram(x, est, spec, grid).values
            row.append(integrate.trapezoid((g - ref) ** 2, grid.freqs))
    return np.array(row)


def run_mise(cfg: ExperimentConfig) -> ExperimentResult:
    """Mean integrated squared error of smoothed estimates over ``(0, pi]``.

    Integration uses the trapezoid rule on the natural frequencies
    ``2 pi j / n``, ``j = 1..floor(n/2)``.
    """
    if cfg.process != "ar2" or cfg.contamination_noise is not None:
        raise InvalidInputError("MISE runs are defined for the uncontaminated AR(2) design")
    t0 = time.perf_counter()
    out = []
    for n in cfg.n:
        freqs = FrequencyGrid.natural(n, include_zero=False).freqs
        refs = {}
        if cfg.classical:
            refs[None] = ar2_spectrum(freqs)
        for tau in cfg.taus:
            refs[tau] = ar2_quantile_spectrum(freqs, tau)
        rows = _collect(partial(_mise_rep, cfg, n, refs), cfg.replications, cfg.workers)
        col = 0
        for est in refs:
            for c in cfg.bandwidth_cs:
                vals = rows[:, col]
                se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else math.nan
                out.append(Cell(n, float(np.mean(vals)), se, cfg.replications, est, None, None, None,
                                float(c), "classical" if est is None else "quantile"))
                col += 1
    return ExperimentResult(cfg, out, {"seconds": time.perf_counter() - t0, "workers": cfg.workers})


# --- size and power ---------------------------------------------------------------

def _cm_rep(cfg: ExperimentConfig, n: int, xis: dict, i: int) -> np.ndarray:
    x = simulate(cfg.process_spec(n), cfg.contamination(), index=i)
    row = []
    for tau in cfg.taus:
        v = crossing_indicators(x, tau, xis.get(tau)).values
        row.append(cm_from_crossings(v))
    return np.array(row)


def _warp_rep(cfg: ExperimentConfig, n: int, b_n: int, i: int) -> np.ndarray:
    x = simulate(cfg.process_spec(n), cfg.contamination(), index=i)
    L = _n_blocks(n, b_n)
    row = []
    for tau in cfg.taus:
        v = crossing_indicators(x, tau).values
        eta = _draw_multipliers(_rng.substream(cfg.seed, f"warp:{tau!r}", i), L, cfg.multiplier)
        row.append(cm_from_crossings(v))
        row.append(float(bootstrap_statistics(v, b_n, eta[None, :])[0]))
    return np.array(row)


def _boot_rep(cfg: ExperimentConfig, n: int, b_n: int, i: int) -> np.ndarray:
    x = simulate(cfg.process_spec(n), cfg.contamination(), index=i)
    row = []
    for tau in cfg.taus:
        res = bootstrap_flatness_test(x, tau, cfg.alpha, cfg.bootstrap_replications, b_n,
                                      seed=cfg.seed * 1_000_003 + i, multiplier=cfg.multiplier)
        row.append(1.0 if res.decision == "reject" else 0.0)
    return np.array(row)


def _pointwise_rep(cfg: ExperimentConfig, n: int, i: int) -> np.ndarray:
    x = simulate(cfg.process_spec(n), cfg.contamination(), index=i)
    row = []
    for tau in cfg.taus:
        q = ordinates(x, tau)
        null = tau * (1.0 - tau) / (2.0 * math.pi)
        for k in cfg.ks:
            for lam in cfg.lambdas:
                lo, hi = chi2_interval(averaged_ordinates(None, tau, lam, k, periodogram=q), k, cfg.alpha)
                row.append(0.0 if lo < null < hi else 1.0)
    return np.array(row)


def run_size_power(cfg: ExperimentConfig) -> ExperimentResult:
    """Rejection frequencies of the flatness tests at level ``alpha``.

    ``monte_carlo``: one set of ``null_replications`` simulated statistics
    per ``(n, tau)`` supplies the critical value for every replication.
    ``bootstrap`` with ``warp_speed``: each replication contributes one
    statistic and one bootstrap draw; the critical value is the empirical
    ``1 - alpha`` quantile of the pooled bootstrap draws. Without
    ``warp_speed`` every replication runs a full bootstrap test.
    ``pointwise``: the chi-squared interval test at each ``(k, lambda)``.
    """
    t0 = time.perf_counter()
    out = []
    R = cfg.replications
    for n in cfg.n:
        if cfg.test == "monte_carlo":
            xis = {t: population_quantile(cfg, t) for t in cfg.taus} if cfg.known_quantile else {}
            stats_ = _collect(partial(_cm_rep, cfg, n, xis), R, cfg.workers)
            for c, tau in enumerate(cfg.taus):
                null = mc_null_statistics(n, tau, cfg.null_replications, cfg.seed)
                crit = empirical_critical_value(null, cfg.alpha)
                p = float(np.mean(stats_[:, c] > crit))
                note = "known-quantile" if cfg.known_quantile else ""
                out.append(Cell(n, p, _proportion_se(p, R), R, tau, None, None, None, None, "monte_carlo", note))
        elif cfg.test == "bootstrap":
            b_n = cfg.block_size(n)
            if cfg.warp_speed:
                rows = _collect(partial(_warp_rep, cfg, n, b_n), R, cfg.workers)
                for c, tau in enumerate(cfg.taus):
                    crit = empirical_critical_value(rows[:, 2 * c + 1], cfg.alpha)
                    p = float(np.mean(rows[:, 2 * c] > crit))
                    out.append(Cell(n, p, _proportion_se(p, R), R, tau, None, b_n, None, None, "bootstrap",
                                    "warp-speed"))
            else:
                rows = _collect(partial(_boot_rep, cfg, n, b_n), R, cfg.workers)
                for c, tau in enumerate(cfg.taus):
                    p = float(np.mean(rows[:, c]))
                    out.append(Cell(n, p, _proportion_se(p, R), R, tau, None, b_n, None, None, "bootstrap"))
        else:
            rows = _collect(partial(_pointwise_rep, cfg, n), R, cfg.workers)
            col = 0
            for tau in cfg.taus:
                for k in cfg.ks:
                    for lam in cfg.lambdas:
                        p = float(np.mean(rows[:, col]))
                        out.append(Cell(n, p, _proportion_se(p, R), R, tau, k, None, lam, None, "pointwise"))
                        col += 1
    return ExperimentResult(cfg, out, {"seconds": time.perf_counter() - t0, "workers": cfg.workers})


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return {"coverage": run_coverage, "mise": run_mise, "size_power": run_size_power}[cfg.experiment](cfg)
