"""Harvester models: TEG voltage/power from temperature differences, PV
maximum-power-point output from irradiance, and their calibration."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, CouplingWarning, PolarityWarning
from .traces import AlignedPair, Quantity


@dataclass(frozen=True)
class TegSpec:
    """Thermoelectric generator plus its thermal coupling to the media.

    ``seebeck`` is the open-circuit voltage per kelvin across the element
    (V/K), ``r_internal`` its electrical resistance (ohm) and
    ``quality_factor`` the fraction of the media temperature difference
    that actually appears across the element.
    """

    seebeck: float
    r_internal: float
    quality_factor: float = 1.0
    label: str = "teg"

    def __post_init__(self):
        if self.seebeck <= 0:
            raise ValueError(f"seebeck must be > 0 V/K, got {self.seebeck}")
        if self.r_internal <= 0:
            raise ValueError(f"r_internal must be > 0 ohm, got {self.r_internal}")
        if not 0 < self.quality_factor <= 1:
            raise ValueError(f"quality_factor must be in (0, 1], got {self.quality_factor}")


@dataclass(frozen=True)
class PvSpec:
    """Solar cell characterised by its per-site irradiance-to-power slope.

    ``coefficient_k`` is the cell MPP power per unit irradiance at the
    installed location (W per W/m2), obtained by co-measurement against a
    reference irradiance sensor. ``k_table`` optionally replaces the single
    slope with a piecewise-linear k(G) for users with better data.
    ``mpp_voltage`` only feeds converter input-window checks.
    """

    area: float  # mm2
    coefficient_k: float
    mpp_voltage: float = 1.0
    label: str = "pv"
    k_table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.area <= 0:
            raise ValueError(f"area must be > 0 mm2, got {self.area}")
        if self.coefficient_k < 0:
            raise ValueError(f"coefficient_k must be >= 0, got {self.coefficient_k}")
        if self.mpp_voltage <= 0:
            raise ValueError(f"mpp_voltage must be > 0 V, got {self.mpp_voltage}")
        if self.k_table is not None:
            table = tuple((float(g), float(k)) for g, k in self.k_table)
            g = np.array([row[0] for row in table])
            if len(table) < 2 or np.any(np.diff(g) <= 0):
                raise ValueError("k_table needs >= 2 rows with strictly increasing irradiance")
            if any(k < 0 for _, k in table):
                raise ValueError("k_table coefficients must be >= 0")
            object.__setattr__(self, "k_table", table)

    def k_at(self, irradiance):
        """Slope k, constant or interpolated from the k(G) table."""
        if self.k_table is None:
            return np.broadcast_to(self.coefficient_k, np.shape(irradiance)).copy() \
                if np.ndim(irradiance) else self.coefficient_k
        g = np.array([row[0] for row in self.k_table])
        k = np.array([row[1] for row in self.k_table])
        out = np.interp(irradiance, g, k)
        return float(out) if np.ndim(irradiance) == 0 else out


@dataclass(frozen=True)
class SourceOutput:
    """Open-circuit voltage and matched-load maximum power of a source.

    ``r_source`` (ohm) is carried along for impedance-matched converter
    stages; it is None for MPP-tracked sources. Scalar or array valued.
    """

    v_oc: float | np.ndarray
    p_available: float | np.ndarray
    r_source: float | None = None

    def __post_init__(self):
        if np.any(np.asarray(self.v_oc) < 0) or np.any(np.asarray(self.p_available) < 0):
            raise ValueError("v_oc and p_available must be >= 0")
        if self.r_source is not None and self.r_source <= 0:
            raise ValueError(f"r_source must be > 0 ohm, got {self.r_source}")


def teg_source(spec: TegSpec, dt_media) -> SourceOutput:
    """Source characteristics for a media temperature difference (K).

    v_oc = seebeck * quality_factor * |dT|, p_available = v_oc^2 / (4 R).
    Polarity is folded into the magnitude; a warning is raised when an
    array input changes sign, since real boosters rectify nothing.
    """
    raw = np.asarray(dt_media, dtype=float)
    if raw.ndim and np.any(raw > 0) and np.any(raw < 0):
        warnings.warn("temperature-difference input changes sign; using |dT| "
                      "(boosters assume a fixed polarity)", PolarityWarning, stacklevel=2)
    mag = np.abs(raw)
    v_oc = spec.seebeck * spec.quality_factor * mag
    p_avail = v_oc * v_oc / (4.0 * spec.r_internal)
    if np.ndim(v_oc) == 0:
        return SourceOutput(float(v_oc), float(p_avail), r_source=spec.r_internal)
    return SourceOutput(v_oc, p_avail, r_source=spec.r_internal)


def teg_power_from_load_voltage(v_load: float, r_load: float) -> float:
    """Power dissipated in a reference load resistor, v^2 / R.

    Approximates the matched available power when r_load is close to the
    TEG internal resistance.
    """
    if r_load <= 0:
        raise ValueError(f"r_load must be > 0 ohm, got {r_load}")
    return v_load * v_load / r_load


def pv_power(spec: PvSpec, irradiance) -> SourceOutput:
    """MPP output for an irradiance level (W/m2): p = k(G) * G.

    v_oc reports the configured MPP voltage while the cell is lit and 0 in
    darkness, so converters idle at night.
    """
    g = np.asarray(irradiance, dtype=float)
    if np.any(g < 0):
        raise ValueError("irradiance must be >= 0")
    p = spec.k_at(g) * g
    v = np.where(g > 0, spec.mpp_voltage, 0.0)
    if g.ndim == 0:
        return SourceOutput(float(v), float(p), r_source=None)
    return SourceOutput(v, p, r_source=None)


@dataclass(frozen=True)
class PvCalibration:
    """Through-origin least-squares slope of cell power vs irradiance."""

    k: float
    residual_rms: float
    n_samples: int
    overlap_seconds: float


def calibrate_pv(pair: AlignedPair) -> PvCalibration:
    """Fit coefficient_k from co-measured cell power and irradiance.

    ``pair.a`` must be the measured cell MPP power (power_W) and ``pair.b``
    the reference irradiance. The slope is least squares through the origin,
    k = sum(p*g) / sum(g^2), so zero irradiance maps to zero power.
    """
    if pair.a.quantity is not Quantity.POWER_W:
        raise CalibrationError(f"pair.a must be power_W, got {pair.a.quantity.value}")
    if pair.b.quantity is not Quantity.IRRADIANCE_W_PER_M2:
        raise CalibrationError(f"pair.b must be irradiance_W_per_m2, got {pair.b.quantity.value}")
    p = pair.a.v
    g = pair.b.v
    if p.size < 2:
        raise CalibrationError("overlap shorter than one sample")
    denom = float(np.dot(g, g))
    if denom == 0.0:
        raise CalibrationError("degenerate calibration: irradiance is all zero")
    k = float(np.dot(p, g)) / denom
    resid = p - k * g
    return PvCalibration(k=k,
                         residual_rms=float(np.sqrt(np.mean(resid * resid))),
                         n_samples=int(p.size),
                         overlap_seconds=pair.overlap_seconds)


def teg_quality_factor(dt_teg: float, dt_media: float) -> float:
    """Ratio of the temperature difference at the element to the media
    difference. Values above 1 are reported as-is but flagged."""
    if dt_media == 0:
        raise ValueError("dt_media must be nonzero")
    q = dt_teg / dt_media
    if q > 1.0:
        warnings.warn(f"quality factor {q:.3g} exceeds 1; check sensor placement",
                      CouplingWarning, stacklevel=2)
    return q
