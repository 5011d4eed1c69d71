"""Command-line interface: ``quantspec {estimate,test,simulate,experiment}``.

Exit status is 0 on success, 2 for usage errors (bad or conflicting flags)
and 1 when the computation itself fails, for example when an ordinate
window reaches frequency 0 or pi. Test decisions are data: a rejection
still exits with 0.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .cvm import bootstrap_flatness_test, default_block_size, mc_flatness_test
from .exceptions import QuantspecError
from .experiments import run_experiment
from .io import (SpectrumRecord, format_float, load_config, read_series_csv, spectrum_records_to_csv,
                 spectrum_records_to_json)
from .pointwise import confidence_band, flatness_test_at_frequency
from .simulate import IID_DISTRIBUTIONS, ContaminationSpec, ProcessSpec, simulate
from .spectral import FrequencyGrid, smoothed_classical_periodogram, smoothed_quantile_periodogram
from .windows import KERNELS, LagWindowSpec, default_bandwidth

__all__ = ["main", "build_parser"]


class _UsageError(Exception):
    pass


def _column(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def _add_input(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="CSV file holding the series")
    p.add_argument("--column", type=_column, default=0, help="column name or zero-based index (default 0)")
    hdr = p.add_mutually_exclusive_group()
    hdr.add_argument("--header", dest="has_header", action="store_true", default=None,
                     help="first row holds column names")
    hdr.add_argument("--no-header", dest="has_header", action="store_false",
                     help="first row is data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantspec", description="Quantile spectral analysis of time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="smoothed quantile or classical periodogram")
    _add_input(est)
    est.add_argument("--tau", type=float, action="append",
                     help="quantile level; repeat for several; omit for the classical periodogram")
    est.add_argument("--kernel", default="quadratic_spectral", help=f"lag window: {', '.join(KERNELS)}")
    est.add_argument("--bandwidth-c", type=float, default=13.0, help="B_n = c * n^(1/5) (default 13)")
    est.add_argument("--grid", default="natural", help="'natural' or 'count:N' equally spaced points")
    est.add_argument("--band-k", type=int, help="add chi-squared bands from 2k+1 averaged ordinates")
    est.add_argument("--alpha", type=float, help="band level 1-alpha (requires --band-k; default 0.05)")
    est.add_argument("--normalize", choices=["none", "null-value"], default="none")
    est.add_argument("--output", help="output path (default stdout)")
    est.add_argument("--format", choices=["csv", "json"], default="csv")

    tst = sub.add_parser("test", help="test for a flat quantile spectrum")
    _add_input(tst)
    tst.add_argument("--tau", type=float, required=True)
    tst.add_argument("--method", choices=["pointwise", "cvm-mc", "cvm-bootstrap"], required=True)
    tst.add_argument("--lambda", dest="lam", type=float, help="frequency in (0, pi) (pointwise only)")
    tst.add_argument("--k", type=int, default=4, help="half-width of the ordinate window (pointwise)")
    tst.add_argument("--alpha", type=float, default=0.05)
    tst.add_argument("--replications", type=int, default=999)
    tst.add_argument("--block-size", type=int, help="bootstrap block length (default round(sqrt(n)/2))")
    tst.add_argument("--multiplier", choices=["rademacher", "normal", "mammen"], help="bootstrap multipliers")
    tst.add_argument("--seed", type=int, default=0)
    tst.add_argument("--known-quantile", type=float, help="threshold for crossings (cvm-mc only)")
    tst.add_argument("--output", help="output path (default stdout)")

    sim = sub.add_parser("simulate", help="draw a series from a built-in process")
    sim.add_argument("--process", required=True, help="ar2, sv, qar or iid:<dist>[:nu]")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--theta", type=float, help="innovation scale of the sv process (default 1)")
    sim.add_argument("--burn-in", type=int, default=400)
    sim.add_argument("--contaminate", help="p:cauchy or p:t:nu additive outliers")
    sim.add_argument("--index", type=int, default=0, help="replication index within the seed")
    sim.add_argument("--output", help="output path (default stdout)")

    exp = sub.add_parser("experiment", help="run a Monte Carlo study from a TOML config")
    exp.add_argument("--config", required=True)
    exp.add_argument("--output", required=True, help="prefix; writes <prefix>.csv and <prefix>.json")
    exp.add_argument("--workers", type=int, help="override the number of worker processes")
    exp.add_argument("--replications", type=int, help="override the replication count")
    return parser


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _grid(spec: str, n: int) -> FrequencyGrid:
    if spec == "natural":
        return FrequencyGrid.natural(n)
    if spec.startswith("count:"):
        try:
            count = int(spec[6:])
        except ValueError:
            raise _UsageError(f"bad grid {spec!r}") from None
        if count < 1:
            raise _UsageError("grid count must be positive")
        return FrequencyGrid.uniform(count)
    raise _UsageError(f"grid must be 'natural' or 'count:N', got {spec!r}")


def _estimate_block(series, tau, args, spec) -> list:
    n = series.n
    grid = _grid(args.grid, n)
    pi_extra = args.grid == "natural" and n % 2 == 1
    if tau is None:
        est = smoothed_classical_periodogram(series, spec, grid)
        values = est.values
        if pi_extra:
            values = np.append(values, smoothed_classical_periodogram(series, spec,
                                                                       FrequencyGrid.explicit([math.pi])).values)
    else:
        est = smoothed_quantile_periodogram(series, tau, spec, grid)
        values = est.values
        if pi_extra:
            values = np.append(values, smoothed_quantile_periodogram(series, tau, spec,
                                                                      FrequencyGrid.explicit([math.pi])).values)
    freqs = np.append(grid.freqs, math.pi) if pi_extra else grid.freqs
    null = est.null_value
    lower = upper = None
    if args.band_k is not None:
        band = confidence_band(series, tau, FrequencyGrid.explicit(freqs), args.band_k,
                               0.05 if args.alpha is None else args.alpha)
        ok = ~np.isnan(band.center)
        values = np.where(ok, band.center, values)
        lower, upper = band.lower, band.upper
    scale = null if args.normalize == "null-value" else 1.0
    if scale == 0:
        raise QuantspecError("cannot normalize by a zero null value")
    records = []
    for i, lam in enumerate(freqs):
        lo = up = None
        if lower is not None and not math.isnan(lower[i]):
            lo, up = float(lower[i]) / scale, float(upper[i]) / scale
        records.append(SpectrumRecord(float(min(max(lam, 0.0), math.pi)), float(values[i]) / scale,
                                      lo, up, null, tau))
    return records


def _cmd_estimate(args) -> int:
    if args.alpha is not None and args.band_k is None:
        raise _UsageError("--alpha sets the band level and requires --band-k")
    if args.alpha is not None and not 0.0 < args.alpha < 1.0:
        raise _UsageError("--alpha must lie in (0, 1)")
    if args.band_k is not None and args.band_k < 0:
        raise _UsageError("--band-k must be nonnegative")
    if args.bandwidth_c <= 0:
        raise _UsageError("--bandwidth-c must be positive")
    if args.kernel not in KERNELS and args.kernel not in ("qs", "tukey", "triangular"):
        raise _UsageError(f"unknown kernel {args.kernel!r}")
    taus = args.tau or [None]
    if len(set(taus)) != len(taus):
        raise _UsageError("--tau values must be distinct")
    series = read_series_csv(args.input, args.column, args.has_header)
    spec = LagWindowSpec(args.kernel, default_bandwidth(series.n, args.bandwidth_c))
    blocks = [(tau, _estimate_block(series, tau, args, spec)) for tau in taus]
    if args.format == "json":
        text = spectrum_records_to_json(blocks) + "\n"
    else:
        header, *_ = spectrum_records_to_csv([]).splitlines()
        body = [line for _, recs in blocks for line in spectrum_records_to_csv(recs).splitlines()[1:]]
        text = "\n".join([header] + body) + "\n"
    _emit(text, args.output)
    return 0


def _cmd_test(args) -> int:
    cvm = args.method != "pointwise"
    if cvm and args.lam is not None:
        raise _UsageError("--lambda applies to the pointwise method only")
    if not cvm and args.lam is None:
        raise _UsageError("the pointwise method needs --lambda")
    if args.known_quantile is not None and args.method != "cvm-mc":
        raise _UsageError("--known-quantile applies to cvm-mc only")
    if (args.block_size is not None or args.multiplier is not None) and args.method != "cvm-bootstrap":
        raise _UsageError("--block-size and --multiplier apply to cvm-bootstrap only")
    if not 0.0 < args.alpha < 1.0:
        raise _UsageError("--alpha must lie in (0, 1)")
    series = read_series_csv(args.input, args.column, args.has_header)
    if args.method == "pointwise":
        report = flatness_test_at_frequency(series, args.tau, args.lam, args.k, args.alpha).to_dict()
    elif args.method == "cvm-mc":
        report = mc_flatness_test(series, args.tau, args.alpha, args.replications, args.seed,
                                  known_xi0=args.known_quantile).to_dict()
    else:
        b_n = default_block_size(series.n) if args.block_size is None else args.block_size
        report = bootstrap_flatness_test(series, args.tau, args.alpha, args.replications, b_n, args.seed,
                                         args.multiplier or "rademacher").to_dict()
    report = {"method": args.method, **report}
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def _process_spec(args) -> ProcessSpec:
    parts = args.process.split(":")
    kind = parts[0]
    if kind in ("ar2", "sv", "qar") and len(parts) == 1:
        if args.theta is not None and kind != "sv":
            raise _UsageError("--theta applies to the sv process only")
        theta = 1.0 if args.theta is None else args.theta
        return ProcessSpec(kind, args.n, seed=args.seed, burn_in=args.burn_in, theta=theta)
    if kind == "iid" and len(parts) in (2, 3):
        dist = {"t": "student_t", "chi2": "chi2_3"}.get(parts[1], parts[1])
        if dist not in IID_DISTRIBUTIONS:
            raise _UsageError(f"unknown distribution {parts[1]!r}; choose from {IID_DISTRIBUTIONS}")
        nu = None
        if len(parts) == 3:
            try:
                nu = float(parts[2])
            except ValueError:
                raise _UsageError(f"bad degrees of freedom in {args.process!r}") from None
        if dist == "student_t" and nu is None:
            raise _UsageError("student_t needs degrees of freedom, e.g. iid:student_t:3")
        if args.theta is not None:
            raise _UsageError("--theta applies to the sv process only")
        return ProcessSpec("iid", args.n, seed=args.seed, dist=dist, nu=nu)
    raise _UsageError(f"unknown process {args.process!r}; use ar2, sv, qar or iid:<dist>")


def _contamination(text: Optional[str], seed: int) -> Optional[ContaminationSpec]:
    if text is None:
        return None
    parts = text.split(":")
    try:
        p = float(parts[0])
        if len(parts) == 2 and parts[1] == "cauchy":
            return ContaminationSpec(p, "cauchy", seed=seed + 1)
        if len(parts) == 3 and parts[1] in ("t", "student_t"):
            return ContaminationSpec(p, "student_t", float(parts[2]), seed=seed + 1)
    except ValueError:
        pass
    raise _UsageError(f"--contaminate must be p:cauchy or p:t:nu, got {text!r}")


def _cmd_simulate(args) -> int:
    if args.n < 2:
        raise _UsageError("--n must be at least 2")
    spec = _process_spec(args)
    x = simulate(spec, _contamination(args.contaminate, args.seed), index=args.index)
    _emit("value\n" + "".join(format_float(v) + "\n" for v in x.values), args.output)
    return 0


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.replications is not None:
        cfg.replications = args.replications
    result = run_experiment(cfg)
    result.to_csv(args.output + ".csv")
    result.to_json(args.output + ".json")
    return 0


_COMMANDS = {"estimate": _cmd_estimate, "test": _cmd_test, "simulate": _cmd_simulate,
             "experiment": _cmd_experiment}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (QuantspecError, OSError) as exc:
        print(f"quantspec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
