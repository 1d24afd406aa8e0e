"""DC-DC converter and booster models: startup gating, impedance-based power
transfer into TEG boosters, measured efficiency surfaces, and quiescent load."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OverVoltageError
from .harvest import SourceOutput

MPPT = "mppt"

# Smallest power considered on the log-spaced efficiency axis; queries below
# it clamp to the low edge of the surface.
_P_FLOOR = 1e-15


@dataclass(frozen=True)
class ConverterSpec:
    """One converter/booster characterised by datasheet or bench data.

    ``input_impedance`` is the input resistance in ohm for TEG boosters, or
    the string "mppt" for converters that track the source maximum power
    point. The efficiency surface is a grid over input voltage and input
    power; power is interpolated on a log10 axis since real surfaces span
    decades of microwatts. ``provenance`` records whether the curve comes
    from published measurements ("paper"), a datasheet, or is a placeholder
    the user must override.
    """

    label: str
    v_start: float
    v_in_max: float
    input_impedance: float | str
    efficiency_v: np.ndarray
    efficiency_p: np.ndarray
    efficiency: np.ndarray
    quiescent_power: float = 0.0
    v_out_max: float = 5.3
    tracking_factor: float = 1.0
    provenance: str = "placeholder"

    def __post_init__(self):
        ev = np.ascontiguousarray(self.efficiency_v, dtype=float)
        ep = np.ascontiguousarray(self.efficiency_p, dtype=float)
        eta = np.ascontiguousarray(self.efficiency, dtype=float)
        if ev.ndim != 1 or ep.ndim != 1 or ev.size == 0 or ep.size == 0:
            raise ValueError("efficiency grid axes must be non-empty 1-D arrays")
        if np.any(np.diff(ev) <= 0) or np.any(np.diff(ep) <= 0):
            raise ValueError("efficiency grid axes must be strictly increasing")
        if np.any(ep <= 0):
            raise ValueError("efficiency power axis must be > 0 W")
        if eta.shape != (ev.size, ep.size):
            raise ValueError(f"efficiency grid must have shape {(ev.size, ep.size)}, "
                             f"got {eta.shape}")
        if np.any(eta < 0) or np.any(eta > 1):
            raise ValueError("efficiencies must lie in [0, 1]")
        if not self.v_start < self.v_in_max:
            raise ValueError(f"v_start ({self.v_start} V) must be below v_in_max "
                             f"({self.v_in_max} V)")
        if self.quiescent_power < 0:
            raise ValueError("quiescent_power must be >= 0")
        if not 0 < self.tracking_factor <= 1:
            raise ValueError(f"tracking_factor must be in (0, 1], got {self.tracking_factor}")
        if not self.is_mppt:
            r = self.input_impedance
            if not isinstance(r, (int, float)) or r <= 0:
                raise ValueError(f"input_impedance must be > 0 ohm or '{MPPT}', got {r!r}")
        for a in (ev, ep, eta):
            a.flags.writeable = False
        object.__setattr__(self, "efficiency_v", ev)
        object.__setattr__(self, "efficiency_p", ep)
        object.__setattr__(self, "efficiency", eta)

    @property
    def is_mppt(self) -> bool:
        return isinstance(self.input_impedance, str) and self.input_impedance == MPPT


def flat_efficiency_converter(label: str, v_start: float, v_in_max: float,
                              input_impedance, eta: float,
                              **kwargs) -> ConverterSpec:
    """Convenience constructor for a constant-efficiency surface."""
    return ConverterSpec(label=label, v_start=v_start, v_in_max=v_in_max,
                         input_impedance=input_impedance,
                         efficiency_v=np.array([max(v_start, 1e-3)]),
                         efficiency_p=np.array([1e-6]),
                         efficiency=np.array([[eta]]), **kwargs)


def transfer_factor(r_source: float, r_input: float) -> float:
    """Fraction of the matched-load maximum power delivered into a resistive
    converter input: 4 R_s R_i / (R_s + R_i)^2. Equals 1 at perfect matching."""
    if r_source <= 0 or r_input <= 0:
        raise ValueError("resistances must be > 0 ohm")
    return 4.0 * r_source * r_input / (r_source + r_input) ** 2


def _axis_weights(grid: np.ndarray, x):
    """Left index and fractional position on one axis, clamped to the edges."""
    x = np.clip(x, grid[0], grid[-1])
    if grid.size == 1:
        i = np.zeros(np.shape(x), dtype=int)
        return i, np.zeros(np.shape(x))
    i = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, grid.size - 2)
    frac = (x - grid[i]) / (grid[i + 1] - grid[i])
    return i, frac


def interpolate_efficiency(spec: ConverterSpec, v_in, p_in):
    """Bilinear efficiency over (v_in, log10 p_in), clamped outside the grid.

    Accepts scalars or arrays; the result always lies within [0, 1] and
    within the hull of the surrounding grid nodes.
    """
    v_in = np.asarray(v_in, dtype=float)
    p_in = np.asarray(p_in, dtype=float)
    lp_grid = np.log10(spec.efficiency_p)
    lp = np.log10(np.maximum(p_in, _P_FLOOR))
    iv, fv = _axis_weights(spec.efficiency_v, v_in)
    ip, fp = _axis_weights(lp_grid, lp)
    eta = spec.efficiency
    iv2 = np.minimum(iv + 1, eta.shape[0] - 1)
    ip2 = np.minimum(ip + 1, eta.shape[1] - 1)
    e00 = eta[iv, ip]
    e01 = eta[iv, ip2]
    e10 = eta[iv2, ip]
    e11 = eta[iv2, ip2]
    out = (e00 * (1 - fv) * (1 - fp) + e01 * (1 - fv) * fp
           + e10 * fv * (1 - fp) + e11 * fv * fp)
    return float(out) if out.ndim == 0 else out


def _operating_point(spec: ConverterSpec, source: SourceOutput):
    """Input voltage and power seen by the converter for a given source."""
    if spec.is_mppt:
        v_in = np.asarray(source.v_oc, dtype=float)
        p_in = np.asarray(source.p_available, dtype=float) * spec.tracking_factor
    else:
        if source.r_source is None:
            raise ValueError(f"converter '{spec.label}' needs a resistive source "
                             "(r_source) for impedance-based transfer")
        tf = transfer_factor(source.r_source, spec.input_impedance)
        ratio = spec.input_impedance / (source.r_source + spec.input_impedance)
        v_in = np.asarray(source.v_oc, dtype=float) * ratio
        p_in = np.asarray(source.p_available, dtype=float) * tf
    if np.any(v_in > spec.v_in_max):
        raise OverVoltageError(
            f"converter '{spec.label}': input voltage {float(np.max(v_in)):.4g} V "
            f"exceeds rated maximum {spec.v_in_max:.4g} V")
    return v_in, p_in


def converter_output(spec: ConverterSpec, source: SourceOutput) -> float:
    """Net converter output power for one source operating point.

    Sources below the startup voltage yield 0. Otherwise the input power is
    the available power scaled by the impedance transfer factor (or by the
    tracking factor for MPPT parts), times the interpolated efficiency.
    Quiescent consumption is not subtracted here; the simulation engine
    draws it from storage while the converter runs.
    """
    v_in, p_in = _operating_point(spec, source)
    if float(np.asarray(source.v_oc)) < spec.v_start:
        return 0.0
    return float(p_in * interpolate_efficiency(spec, v_in, p_in))


def converter_output_series(spec: ConverterSpec, source: SourceOutput) -> np.ndarray:
    """Vectorised converter_output over array-valued sources.

    Same math as the scalar form; used by the engine and planner to
    evaluate whole traces at once.
    """
    v_in, p_in = _operating_point(spec, source)
    out = p_in * interpolate_efficiency(spec, v_in, p_in)
    gated = np.asarray(source.v_oc, dtype=float) >= spec.v_start
    return np.where(gated, out, 0.0)
