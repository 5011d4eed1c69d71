"""CSV ingestion, spectrum serialization and experiment configuration files.

Numbers are written with 17 significant digits, which round-trips every
IEEE double exactly.

Spectrum files have the columns ``lambda, estimate, lower, upper,
null_value, tau``; empty cells stand for absent values (no band, or the
classical estimator's missing ``tau``).

Experiment configurations are TOML documents whose top-level keys are the
fields of :class:`~quantspec.experiments.ExperimentConfig`, for example::

    experiment = "size_power"
    process = "iid"
    dist = "chi2_3"
    n = [100, 200, 300]
    taus = [0.1, 0.5, 0.9]
    test = "monte_carlo"
    replications = 2000
    seed = 1

Frequencies in ``lambdas`` may be numbers or products such as
``"2*pi*0.22"`` (factors are numbers or ``pi``).
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import CsvParseError, InvalidInputError, SchemaError
from .experiments import ExperimentConfig
from .series import Series, SeriesLike, as_series

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

__all__ = [
    "SpectrumRecord",
    "read_series_csv",
    "write_series_csv",
    "format_float",
    "spectrum_records_to_csv",
    "spectrum_records_to_json",
    "parse_frequency",
    "load_config",
    "config_from_toml",
    "SPECTRUM_FIELDS",
]

SPECTRUM_FIELDS = ["lambda", "estimate", "lower", "upper", "null_value", "tau"]

PathLike = Union[str, Path]


def format_float(v: Optional[float]) -> str:
    """Round-trip exact decimal text; ``None`` and NaN become the empty string."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return ""
    return format(v, ".17g")


def _parse_cell(cell: str, row: int, column) -> float:
    text = cell.strip()
    try:
        val = float(text)
    except ValueError:
        raise CsvParseError(row, column, cell) from None
    if not math.isfinite(val):
        raise CsvParseError(row, column, cell)
    return val


def _looks_numeric(cell: str) -> bool:
    try:
        float(cell.strip())
    except ValueError:
        return False
    return True


def read_series_csv(path: PathLike, column: Union[int, str] = 0,
                    has_header: Optional[bool] = None) -> Series:
    """Read one column of a CSV file as a :class:`Series`.

    Parameters
    ----------
    path : str or Path
    column : int or str
        Zero-based column index, or a column name (requires a header).
    has_header : bool, optional
        Whether the first row holds column names. ``None`` treats the first
        row as a header when its selected cell is not a number.

    Raises
    ------
    CsvParseError
        A selected cell is empty or not a finite number; the message names
        the 1-based file row and the column.
    SchemaError
        The column does not exist.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)]
    # blank lines carry no observation
    numbered = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not numbered:
        raise SchemaError(f"{path}: no rows")
    first_line, first = numbered[0]
    if isinstance(column, str) and has_header is False:
        raise SchemaError("a column name requires a header row")
    if has_header is None:
        if isinstance(column, str):
            has_header = True
        else:
            has_header = not (column < len(first) and _looks_numeric(first[column]))
    if has_header:
        header = [h.strip() for h in first]
        numbered = numbered[1:]
        if isinstance(column, str):
            if column not in header:
                raise SchemaError(f"column {column!r} not found; available: {header}")
            idx, label = header.index(column), column
        else:
            idx = int(column)
            if not 0 <= idx < len(header):
                raise SchemaError(f"column index {idx} out of range for {len(header)} columns")
            label = header[idx]
    else:
        idx, label = int(column), None
    values = []
    for line, r in numbered:
        if idx >= len(r):
            raise CsvParseError(line, column, "")
        values.append(_parse_cell(r[idx], line, column))
    if len(values) < 2:
        raise SchemaError(f"{path}: need at least 2 observations, found {len(values)}")
    return Series(np.array(values), label=label)


def write_series_csv(path: PathLike, series: SeriesLike, header: str = "value") -> None:
    """Write a one-column CSV with a header row and 17-digit values."""
    s = as_series(series)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for v in s.values:
            fh.write(format_float(v) + "\n")


@dataclass(frozen=True)
class SpectrumRecord:
    """One output row of a spectral estimate.

    ``lambda`` lies in ``[0, pi]``; when both bounds are present they
    bracket ``estimate``.
    """

    lam: float
    estimate: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    null_value: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.lam <= math.pi:
            raise InvalidInputError(f"lambda must lie in [0, pi], got {self.lam}")
        if self.lower is not None and self.upper is not None:
            if not self.lower <= self.estimate <= self.upper:
                raise InvalidInputError("band must bracket the estimate")

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "estimate": self.estimate, "lower": self.lower,
                "upper": self.upper, "null_value": self.null_value, "tau": self.tau}


def spectrum_records_to_csv(records: Sequence[SpectrumRecord]) -> str:
    lines = [",".join(SPECTRUM_FIELDS)]
    for r in records:
        d = r.to_dict()
        lines.append(",".join(format_float(d[k]) for k in SPECTRUM_FIELDS))
    return "\n".join(lines) + "\n"


def spectrum_records_to_json(blocks: Sequence[tuple]) -> str:
    """JSON document ``{"blocks": [{"tau": ..., "records": [...]}, ...]}``.

    ``blocks`` holds ``(tau, records)`` pairs; ``tau`` is ``None`` for the
    classical estimator.
    """
    doc = {"blocks": [{"tau": tau, "records": [r.to_dict() for r in recs]} for tau, recs in blocks]}
    return json.dumps(doc, indent=2, allow_nan=False)


def parse_frequency(value: Union[int, float, str]) -> float:
    """A number, or a ``*``-separated product of numbers and ``pi``."""
    if isinstance(value, bool):
        raise InvalidInputError(f"not a frequency: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    out = 1.0
    for factor in str(value).split("*"):
        f = factor.strip().lower()
        if f == "pi":
            out *= math.pi
            continue
        try:
            out *= float(f)
        except ValueError:
            raise InvalidInputError(f"cannot parse frequency {value!r}") from None
    return out


def config_from_toml(text: str) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"invalid config: {exc}") from None
    if "lambdas" in doc:
        doc["lambdas"] = [parse_frequency(v) for v in doc["lambdas"]]
    return ExperimentConfig.from_dict(doc)


def load_config(path: PathLike) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from a TOML file."""
    return config_from_toml(Path(path).read_text())
