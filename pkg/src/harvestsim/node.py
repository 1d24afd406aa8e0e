"""Consumer-side model: sleep power, active-cycle energy breakdown, and the
measurement/transmission scheduling policies."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

FIXED_INTERVAL = "fixed_interval"
ENERGY_TRIGGERED = "energy_triggered"
ADAPTIVE = "adaptive"

# Uplink energy per transmission for what-if analyses (J). The tuned values
# assume optimised radio parameters and minimal payloads.
TRANSMISSION_ENERGY_J = {
    "lorawan_default": 40e-3,
    "nbiot": 64e-3,
    "lora_tuned": 1.2e-3,
    "lorawan_tuned": 1.9e-3,
}


@dataclass(frozen=True)
class SchedulePolicy:
    """When the node wakes for a measurement-and-transmission cycle.

    fixed_interval fires on every multiple of ``interval``. energy_triggered
    fires whenever the usable stored energy covers one active cycle.
    adaptive fires on multiples of ``wet_interval`` inside the given rain
    windows and on multiples of ``dry_interval`` outside them; with equal
    intervals it degenerates to fixed_interval.
    """

    mode: str
    interval: float | None = None
    dry_interval: float | None = None
    wet_interval: float | None = None
    wet_windows: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.mode == FIXED_INTERVAL:
            if self.interval is None or self.interval <= 0:
                raise ValueError("fixed_interval needs interval > 0 s")
        elif self.mode == ENERGY_TRIGGERED:
            pass
        elif self.mode == ADAPTIVE:
            if (self.dry_interval is None or self.dry_interval <= 0
                    or self.wet_interval is None or self.wet_interval <= 0):
                raise ValueError("adaptive needs dry_interval and wet_interval > 0 s")
            windows = tuple((float(a), float(b)) for a, b in self.wet_windows)
            for a, b in windows:
                if b <= a:
                    raise ValueError(f"wet window ({a}, {b}) is empty or inverted")
            for (_, b0), (a1, _) in zip(windows, windows[1:]):
                if a1 < b0:
                    raise ValueError("wet windows must be sorted and non-overlapping")
            object.__setattr__(self, "wet_windows", windows)
        else:
            raise ValueError(f"unknown schedule mode: {self.mode!r}")

    @classmethod
    def fixed(cls, interval: float) -> "SchedulePolicy":
        return cls(mode=FIXED_INTERVAL, interval=interval)

    @classmethod
    def energy_triggered(cls) -> "SchedulePolicy":
        return cls(mode=ENERGY_TRIGGERED)

    @classmethod
    def adaptive(cls, dry_interval: float, wet_interval: float,
                 wet_windows) -> "SchedulePolicy":
        return cls(mode=ADAPTIVE, dry_interval=dry_interval,
                   wet_interval=wet_interval, wet_windows=tuple(wet_windows))


@dataclass(frozen=True)
class NodeSpec:
    """Sleep power plus the energy split of one active cycle.

    The breakdown lists (task, energy-in-J) pairs, e.g. MCU wake plus
    non-volatile memory traffic, the sensor reading, and the radio uplink.
    Only the sum matters to the energy balance; the split supports
    per-task what-if scaling.
    """

    sleep_power: float
    active_breakdown: tuple[tuple[str, float], ...]
    schedule: SchedulePolicy = field(default_factory=SchedulePolicy.energy_triggered)
    label: str = "node"

    def __post_init__(self):
        if self.sleep_power < 0:
            raise ValueError(f"sleep_power must be >= 0 W, got {self.sleep_power}")
        breakdown = tuple((str(task), float(e)) for task, e in self.active_breakdown)
        if not breakdown:
            raise ValueError("active_breakdown must not be empty")
        for task, e in breakdown:
            if e <= 0:
                raise ValueError(f"task '{task}' energy must be > 0 J, got {e}")
        object.__setattr__(self, "active_breakdown", breakdown)

    def with_transmission(self, preset: str, task: str = "radio") -> "NodeSpec":
        """Copy of this node with the radio task swapped to a named preset."""
        energy = TRANSMISSION_ENERGY_J[preset]
        breakdown = tuple((name, energy if name == task else e)
                          for name, e in self.active_breakdown)
        if all(name != task for name, _ in self.active_breakdown):
            breakdown = breakdown + ((task, energy),)
        return NodeSpec(self.sleep_power, breakdown, self.schedule,
                        label=f"{self.label}/{preset}")


def active_cycle_energy(spec: NodeSpec) -> float:
    """Total energy of one wake-measure-store-transmit cycle (J)."""
    return sum(e for _, e in spec.active_breakdown)


def sleep_energy(spec: NodeSpec, duration: float) -> float:
    """Inactive-phase energy over a duration (J)."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0 s, got {duration}")
    return spec.sleep_power * duration


def _next_multiple(interval: float, now: float) -> float:
    """Smallest multiple of ``interval`` strictly after ``now``."""
    return interval * (math.floor(now / interval) + 1.0)


def _window_at(windows, t: float):
    for a, b in windows:
        if a <= t <= b:
            return (a, b)
    return None


def next_fire(policy: SchedulePolicy, now: float, usable: float,
              active_energy: float) -> float | None:
    """Next fire time strictly after ``now``, or None.

    energy_triggered returns ``now`` itself when the usable energy already
    covers one cycle (and None otherwise). Time-based policies place fires
    on absolute multiples of their interval, so runs are reproducible
    regardless of the query time.
    """
    if now < 0:
        raise ValueError(f"now must be >= 0 s, got {now}")
    if policy.mode == ENERGY_TRIGGERED:
        return now if usable >= active_energy else None
    if policy.mode == FIXED_INTERVAL:
        return _next_multiple(policy.interval, now)

    # adaptive: wet cadence inside rain windows, dry cadence outside
    wet = policy.wet_interval
    dry = policy.dry_interval
    candidates = []
    for a, b in policy.wet_windows:
        if b <= now:
            continue
        t = _next_multiple(wet, max(now, a - wet))
        if t < a:
            t = wet * math.ceil(a / wet)
            if t <= now:
                t = _next_multiple(wet, now)
        if now < t <= b:
            candidates.append(t)
            break  # windows are sorted; the first hit is the earliest wet fire
    t = _next_multiple(dry, now)
    window = _window_at(policy.wet_windows, t)
    while window is not None:
        t = _next_multiple(dry, window[1])
        window = _window_at(policy.wet_windows, t)
    candidates.append(t)
    return min(candidates)


def read_wet_windows(path) -> tuple[tuple[float, float], ...]:
    """Load rain intervals from a CSV with t_start,t_end columns."""
    path = Path(path)
    windows: list[tuple[float, float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(row for row in fh if not row.lstrip().startswith("#"))
        if reader.fieldnames is None or not {"t_start", "t_end"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header with t_start,t_end columns")
        for row in reader:
            windows.append((float(row["t_start"]), float(row["t_end"])))
    windows.sort()
    return tuple(windows)
