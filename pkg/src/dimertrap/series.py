"""Time-series container and its CSV wire format.

CSV schema: header ``t,value`` or ``t,value,stderr``, one row per time,
12 significant digits. This is the exchange format between all subcommands.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

_FMT = "{:.11e}"


@dataclass(frozen=True)
class TimeSeries:
    """Values on a strictly increasing, non-negative time grid (units 1/V)."""

    times: np.ndarray
    values: np.ndarray
    errors: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or v.shape != t.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size and t[0] < 0:
            raise ValueError("times must be non-negative")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.errors is not None:
            e = np.asarray(self.errors, dtype=float)
            if e.shape != t.shape:
                raise ValueError("errors must match times in length")
            if np.any(e < 0):
                raise ValueError("errors must be non-negative")
            object.__setattr__(self, "errors", e)

    def __len__(self) -> int:
        return self.times.size

    def window(self, t_a: float, t_b: float) -> "TimeSeries":
        """Restrict to times t_a <= t <= t_b."""
        mask = (self.times >= t_a) & (self.times <= t_b)
        err = self.errors[mask] if self.errors is not None else None
        return TimeSeries(self.times[mask], self.values[mask], err)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            if self.errors is None:
                fh.write("t,value\n")
                for t, v in zip(self.times, self.values):
                    fh.write(f"{_FMT.format(t)},{_FMT.format(v)}\n")
            else:
                fh.write("t,value,stderr\n")
                for t, v, e in zip(self.times, self.values, self.errors):
                    fh.write(f"{_FMT.format(t)},{_FMT.format(v)},{_FMT.format(e)}\n")


def read_csv(path: str | Path) -> TimeSeries:
    """Parse a time-series CSV written by :meth:`TimeSeries.write_csv`."""
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty CSV")
    header = lines[0].strip().split(",")
    if header not in (["t", "value"], ["t", "value", "stderr"]):
        raise ConfigError(f"{path}: unexpected CSV header {lines[0]!r}")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.strip().split(",")
        if len(parts) != len(header):
            raise ConfigError(f"{path}: malformed row at line {i}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ConfigError(f"{path}: unparsable number at line {i}") from exc
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    data = np.asarray(rows)
    errors = data[:, 2] if len(header) == 3 else None
    return TimeSeries(data[:, 0], data[:, 1], errors)
