"""Lithium-ion capacitor storage with deep-discharge protection.

The protection circuit is a comparator hysteresis: the load switch opens
when the voltage falls below v_disconnect and closes again only once it
recovers past v_reconnect. Dropping below v_destroy marks the cell as
destroyed (a latched state, not an error). The comparator and the load
switch draw small parasitic currents from the cell at all times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class StorageSpec:
    """LIC parameters plus protection-circuit thresholds and parasitics.

    Parasitic draws may be given as fixed powers (``protection_power``,
    ``switch_leakage_power``) or left at None to model them as constant
    currents times the instantaneous cell voltage, which matches how the
    comparator and load switch actually load the cell. Defaults: 204.5 nA
    protection (midpoint of the comparator's two output states) and 12 nA
    switch leakage. ``self_discharge_power`` is an extra fixed drain for
    users who want to model LIC self-discharge (default 0).
    """

    capacitance: float
    v_max: float
    v_destroy: float
    v_disconnect: float
    v_reconnect: float
    protection_power: float | None = None
    switch_leakage_power: float | None = None
    protection_current: float = 204.5e-9
    switch_leakage_current: float = 12e-9
    self_discharge_power: float = 0.0
    label: str = "lic"

    def __post_init__(self):
        if self.capacitance <= 0:
            raise ValueError(f"capacitance must be > 0 F, got {self.capacitance}")
        if not self.v_destroy < self.v_disconnect < self.v_reconnect <= self.v_max:
            raise ValueError(
                "thresholds must satisfy v_destroy < v_disconnect < v_reconnect <= v_max, "
                f"got {self.v_destroy} / {self.v_disconnect} / {self.v_reconnect} / {self.v_max}")
        for name in ("protection_power", "switch_leakage_power"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0 W")
        if (self.protection_current < 0 or self.switch_leakage_current < 0
                or self.self_discharge_power < 0):
            raise ValueError("parasitic currents and powers must be >= 0")

    def parasitic_power(self, voltage: float) -> float:
        """Total always-on drain at a given cell voltage (W)."""
        prot = (self.protection_power if self.protection_power is not None
                else self.protection_current * voltage)
        leak = (self.switch_leakage_power if self.switch_leakage_power is not None
                else self.switch_leakage_current * voltage)
        return prot + leak + self.self_discharge_power

    @property
    def full_energy(self) -> float:
        return 0.5 * self.capacitance * self.v_max * self.v_max

    @property
    def disconnect_energy(self) -> float:
        return 0.5 * self.capacitance * self.v_disconnect * self.v_disconnect


@dataclass(frozen=True)
class StorageState:
    """Cell voltage plus load-switch and destruction flags."""

    voltage: float
    connected: bool
    destroyed: bool = False


@dataclass(frozen=True)
class StepReport:
    """Energy bookkeeping for one storage step (all values in joules)."""

    e_in: float
    e_load: float
    e_parasitic: float
    e_discarded: float
    disconnected: bool = False
    reconnected: bool = False
    destroyed_now: bool = False


def energy_of(spec: StorageSpec, v: float) -> float:
    """Stored energy at voltage v: C v^2 / 2."""
    if not 0 <= v <= spec.v_max:
        raise ValueError(f"voltage {v} V outside [0, {spec.v_max}] V")
    return 0.5 * spec.capacitance * v * v


def usable_energy(spec: StorageSpec, state: StorageState) -> float:
    """Energy above the disconnect threshold, floored at 0."""
    return max(0.0, energy_of(spec, state.voltage) - spec.disconnect_energy)


def advance(spec: StorageSpec, energy: float, connected: bool, destroyed: bool,
            p_in: float, p_load: float, dt: float, p_aux: float = 0.0):
    """Advance the store by one step, working in the energy domain.

    ``p_aux`` is an extra drain that ignores the load switch (converter
    quiescent consumption). The load draws only while connected, and draws
    for the whole step even if the voltage crosses v_disconnect mid-step
    (comparator acts at step boundaries). Returns the new (energy,
    connected, destroyed) triple plus the per-step energy split.

    This scalar core backs both step_storage and the simulation engine so
    the two cannot drift apart.
    """
    v = math.sqrt(2.0 * energy / spec.capacitance)
    e_in = p_in * dt
    e_par = (spec.parasitic_power(v) + p_aux) * dt
    e_load = p_load * dt if connected else 0.0
    e_out = e_par + e_load
    new_energy = energy + e_in - e_out
    if new_energy < 0.0:
        # store exhausted mid-step: scale served energy to what was available
        scale = (energy + e_in) / e_out if e_out > 0 else 0.0
        e_par *= scale
        e_load *= scale
        new_energy = 0.0
    discarded = 0.0
    if new_energy > spec.full_energy:
        discarded = new_energy - spec.full_energy
        new_energy = spec.full_energy
    new_v = math.sqrt(2.0 * new_energy / spec.capacitance)

    disconnected_now = reconnected_now = False
    if connected and new_v < spec.v_disconnect:
        connected = False
        disconnected_now = True
    elif not connected and new_v >= spec.v_reconnect:
        connected = True
        reconnected_now = True
    destroyed_now = (not destroyed) and new_v < spec.v_destroy
    destroyed = destroyed or destroyed_now
    return (new_energy, connected, destroyed, e_in, e_load, e_par, discarded,
            disconnected_now, reconnected_now, destroyed_now)


def step_storage(spec: StorageSpec, state: StorageState, p_in: float,
                 p_load_request: float, dt: float):
    """One discrete step of the storage and its protection FSM.

    Returns (new_state, delivered_load_energy, StepReport). Charging above
    v_max discards the surplus (reported, not an error); destruction is a
    latched state, not an error.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0 s, got {dt}")
    if p_in < 0 or p_load_request < 0:
        raise ValueError("p_in and p_load_request must be >= 0")
    energy = energy_of(spec, state.voltage)
    (new_energy, connected, destroyed, e_in, e_load, e_par, discarded,
     dis_now, rec_now, destr_now) = advance(
        spec, energy, state.connected, state.destroyed, p_in, p_load_request, dt)
    new_state = StorageState(voltage=math.sqrt(2.0 * new_energy / spec.capacitance),
                             connected=connected, destroyed=destroyed)
    report = StepReport(e_in=e_in, e_load=e_load, e_parasitic=e_par,
                        e_discarded=discarded, disconnected=dis_now,
                        reconnected=rec_now, destroyed_now=destr_now)
    return new_state, e_load, report
