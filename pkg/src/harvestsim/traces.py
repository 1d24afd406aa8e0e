"""Time-series ingestion, validation, resampling and alignment.

Traces carry the environmental and electrical measurements (temperatures,
irradiance, voltages, powers) that drive the simulator and calibrate the
harvester models. All traces are immutable after construction and safe to
share across parallel sweep workers.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import GapWarning, OverlapError, TraceError

CELSIUS_OFFSET = 273.15

# Gaps longer than this multiple of the median sample interval are flagged
# (and rejected in strict mode); otherwise they are linearly bridged.
GAP_FACTOR = 10.0


class Quantity(str, Enum):
    TEMPERATURE_K = "temperature_K"
    TEMPERATURE_DELTA_K = "temperature_delta_K"
    IRRADIANCE_W_PER_M2 = "irradiance_W_per_m2"
    VOLTAGE_V = "voltage_V"
    POWER_W = "power_W"


# Quantities whose values must be non-negative / strictly positive.
_NONNEGATIVE = {Quantity.IRRADIANCE_W_PER_M2, Quantity.POWER_W}
_POSITIVE = {Quantity.TEMPERATURE_K}


@dataclass(frozen=True)
class EnvTrace:
    """Timestamped samples of one physical quantity.

    timestamps are seconds since epoch, strictly increasing; values are in
    the SI unit declared by ``quantity``.
    """

    quantity: Quantity
    t: np.ndarray
    v: np.ndarray
    site_label: str = ""

    def __post_init__(self):
        t = np.ascontiguousarray(self.t, dtype=float)
        v = np.ascontiguousarray(self.v, dtype=float)
        if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
            raise TraceError("timestamps and values must be 1-D arrays of equal length")
        if t.size < 2:
            raise TraceError("a trace needs at least 2 samples")
        if not (np.isfinite(t).all() and np.isfinite(v).all()):
            raise TraceError("trace contains non-finite samples")
        if not np.all(np.diff(t) > 0):
            bad = int(np.argmax(np.diff(t) <= 0))
            raise TraceError(f"timestamps not strictly increasing at sample {bad + 1}")
        quantity = Quantity(self.quantity)
        if quantity in _NONNEGATIVE and np.any(v < 0):
            raise TraceError(f"{quantity.value} values must be >= 0")
        if quantity in _POSITIVE and np.any(v <= 0):
            raise TraceError(f"{quantity.value} values must be > 0 K")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "quantity", quantity)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def span(self) -> float:
        return self.t_end - self.t_start

    def median_interval(self) -> float:
        return float(np.median(np.diff(self.t)))

    def value_at(self, times) -> np.ndarray:
        """Linear interpolation at ``times``; times must lie within the span."""
        times = np.asarray(times, dtype=float)
        if np.any(times < self.t[0]) or np.any(times > self.t[-1]):
            raise TraceError("interpolation outside trace span")
        return np.interp(times, self.t, self.v)


@dataclass(frozen=True)
class AlignedPair:
    """Two traces resampled onto one shared grid inside their overlap."""

    a: EnvTrace
    b: EnvTrace
    overlap: tuple[float, float]
    step: float

    def __post_init__(self):
        if not np.array_equal(self.a.t, self.b.t):
            raise TraceError("aligned traces must share identical timestamps")

    @property
    def overlap_seconds(self) -> float:
        return self.overlap[1] - self.overlap[0]


def _parse_timestamp(text: str) -> float:
    """Epoch seconds from a numeric or ISO-8601 string (naive times are UTC)."""
    s = text.strip()
    try:
        return float(s)
    except ValueError:
        pass
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def check_gaps(trace: EnvTrace, strict: bool = False, factor: float = GAP_FACTOR) -> int:
    """Count gaps longer than ``factor`` x the median interval.

    Warns by default; raises in strict mode. Interpolation bridges flagged
    gaps linearly either way.
    """
    dt = np.diff(trace.t)
    limit = factor * float(np.median(dt))
    n_gaps = int(np.sum(dt > limit))
    if n_gaps:
        longest = float(dt.max())
        msg = (f"trace '{trace.site_label or trace.quantity.value}' has {n_gaps} gap(s) "
               f"longer than {factor:g}x the median interval (longest {longest:g} s)")
        if strict:
            raise TraceError(msg)
        warnings.warn(msg, GapWarning, stacklevel=2)
    return n_gaps


def parse_trace(path, quantity: Quantity | str, column_map=None, *,
                celsius: bool = False, strict_gaps: bool = False,
                site_label: str | None = None) -> EnvTrace:
    """Read one trace from a CSV file.

    The file needs a header row naming the timestamp and value columns
    (default names ``timestamp`` and ``value``; remap via ``column_map``).
    Timestamps may be epoch seconds or ISO-8601. Lines starting with '#'
    are ignored. Rows whose timestamp or value does not parse are skipped
    with a warning listing their line numbers. With ``celsius=True`` an
    absolute-temperature trace is converted to kelvin at parse time.
    """
    path = Path(path)
    quantity = Quantity(quantity)
    names = {"timestamp": "timestamp", "value": "value"}
    if column_map:
        names.update(column_map)

    if not path.exists():
        raise FileNotFoundError(f"trace file not found: {path}")

    header_idx = None
    t_list: list[float] = []
    v_list: list[float] = []
    bad_lines: list[int] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header_idx is None:
                header = [c.strip() for c in row]
                try:
                    header_idx = (header.index(names["timestamp"]),
                                  header.index(names["value"]))
                except ValueError:
                    raise TraceError(
                        f"{path}: no header row with columns "
                        f"'{names['timestamp']}' and '{names['value']}'") from None
                continue
            try:
                ti = _parse_timestamp(row[header_idx[0]])
                vi = float(row[header_idx[1]].strip())
            except (ValueError, IndexError):
                bad_lines.append(lineno)
                continue
            t_list.append(ti)
            v_list.append(vi)

    if header_idx is None:
        raise TraceError(f"{path}: no header row")
    if bad_lines:
        shown = ", ".join(str(n) for n in bad_lines[:20])
        more = "" if len(bad_lines) <= 20 else f" (+{len(bad_lines) - 20} more)"
        warnings.warn(f"{path}: skipped {len(bad_lines)} unparseable row(s) "
                      f"at line(s) {shown}{more}", UserWarning, stacklevel=2)
    if len(t_list) < 2:
        raise TraceError(f"{path}: trace is empty or has fewer than 2 valid samples")

    v = np.asarray(v_list, dtype=float)
    if celsius and quantity is Quantity.TEMPERATURE_K:
        v = v + CELSIUS_OFFSET
    trace = EnvTrace(quantity, np.asarray(t_list, dtype=float), v,
                     site_label=site_label if site_label is not None else path.stem)
    check_gaps(trace, strict=strict_gaps)
    return trace


def write_trace(trace: EnvTrace, path) -> None:
    """Write a trace as CSV mirroring the ingestion schema (exact round-trip)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# quantity: {trace.quantity.value}\n")
        if trace.site_label:
            fh.write(f"# site: {trace.site_label}\n")
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for ti, vi in zip(trace.t, trace.v):
            writer.writerow([repr(float(ti)), repr(float(vi))])


def _grid(t0: float, t1: float, step: float) -> np.ndarray:
    # +1e-9 absorbs float noise so an exact multiple keeps its last point
    n = int(math.floor((t1 - t0) / step + 1e-9))
    return t0 + step * np.arange(n + 1)


def resample(trace: EnvTrace, step: float, method: str = "linear") -> EnvTrace:
    """Resample onto a regular grid t_start, t_start+step, ... within the span.

    ``linear`` interpolates between neighbours, ``hold`` carries the last
    sample forward. Never extrapolates beyond the trace ends.
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    if step > trace.span:
        raise TraceError(f"step {step:g} s exceeds trace span {trace.span:g} s")
    grid = _grid(trace.t_start, trace.t_end, step)
    if method == "linear":
        values = np.interp(grid, trace.t, trace.v)
    elif method == "hold":
        idx = np.searchsorted(trace.t, grid, side="right") - 1
        values = trace.v[np.clip(idx, 0, len(trace) - 1)]
    else:
        raise ValueError(f"unknown resample method: {method!r}")
    return EnvTrace(trace.quantity, grid, values, site_label=trace.site_label)


def align(a: EnvTrace, b: EnvTrace, step: float) -> AlignedPair:
    """Resample both traces (linear) onto the shared grid of their overlap."""
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    t0 = max(a.t_start, b.t_start)
    t1 = min(a.t_end, b.t_end)
    if t1 <= t0:
        raise OverlapError("no temporal overlap")
    grid = _grid(t0, t1, step)
    if grid.size < 2:
        raise OverlapError(f"overlap {t1 - t0:g} s is shorter than one step ({step:g} s)")
    ga = EnvTrace(a.quantity, grid, a.value_at(grid), site_label=a.site_label)
    gb = EnvTrace(b.quantity, grid, b.value_at(grid), site_label=b.site_label)
    return AlignedPair(a=ga, b=gb, overlap=(t0, t1), step=step)
