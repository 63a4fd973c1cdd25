"""Return-series container and CSV ingestion."""

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .exceptions import DegenerateSeries, ParseError

__all__ = ["Source", "ReturnSeries", "prices_to_returns", "load_returns", "write_returns"]


class Source(str, Enum):
    RETURNS = "returns"
    PRICES_CONVERTED = "prices_converted"
    SIMULATED = "simulated"


@dataclass
class ReturnSeries:
    values: np.ndarray
    source: Source = Source.RETURNS
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        self.source = Source(self.source)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size


def prices_to_returns(prices, scale_percent=True) -> np.ndarray:
    """Log-differences of a price series, optionally in percent."""
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise ValueError("prices must be positive")
    r = np.diff(np.log(prices))
    return 100.0 * r if scale_percent else r


def load_returns(path, prices=False, scale_percent=True, min_rows=3) -> ReturnSeries:
    """Read a one-column CSV of returns or prices.

    A header cell ``return`` or ``price`` is optional; ``price`` switches on
    price conversion even when ``prices`` is False.  Rows that are empty or
    non-numeric raise :class:`ParseError` naming the 1-based row.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    values = []
    with path.open(newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if row_no == 1 and row and row[0].strip().lower() in ("return", "returns", "price", "prices"):
                prices = prices or row[0].strip().lower().startswith("price")
                continue
            if not row or all(not cell.strip() for cell in row):
                raise ParseError(f"{path}: row {row_no} is empty", row=row_no, column=1)
            if len(row) != 1:
                raise ParseError(f"{path}: row {row_no} has {len(row)} columns, expected 1",
                                 row=row_no, column=2)
            cell = row[0].strip()
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"{path}: row {row_no}, column 1: {cell!r} is not numeric",
                                 row=row_no, column=1) from None
            if not np.isfinite(value):
                raise ParseError(f"{path}: row {row_no}, column 1: missing value {cell!r}",
                                 row=row_no, column=1)
            values.append(value)
    if len(values) < min_rows:
        raise DegenerateSeries(f"{path}: need at least {min_rows} usable rows, got {len(values)}")
    if prices:
        return ReturnSeries(prices_to_returns(values, scale_percent),
                            Source.PRICES_CONVERTED, path.stem)
    return ReturnSeries(np.array(values), Source.RETURNS, path.stem)


def write_returns(path, series, header=True):
    values = np.asarray(series, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if header:
            fh.write("return\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")
