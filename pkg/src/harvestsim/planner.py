"""Annual-energy extrapolation and closed-form feasibility planning.

Short reference measurements calibrate the harvester model; the calibrated
chain (harvester -> converter) is then driven by a year-long environment
trace and integrated to the annual collectable energy. The energy balance
splits that budget into the inactive-phase floor and the remainder
available for measurement-and-transmission cycles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import convert, harvest, node as node_mod
from .convert import ConverterSpec, converter_output_series
from .errors import CalibrationError
from .harvest import PvSpec, SourceOutput, TegSpec, calibrate_pv, pv_power, teg_source
from .node import NodeSpec, active_cycle_energy
from .traces import EnvTrace, Quantity, align

YEAR_SECONDS = 365 * 86400  # 31,536,000 s; annual figures use a 365-day year
WEEKS_PER_YEAR = 52
MONTH_BINS = 12

# Annual traces shorter than this are linearly scaled up to a full year
# (with a warning); longer traces are integrated as-is.
MIN_ANNUAL_SPAN = 360 * 86400


@dataclass(frozen=True)
class AnnualEstimate:
    """Feasibility numbers for one hardware combination over one year."""

    config_label: str
    e_harvest_year: float
    e_sleep_year: float
    e_available: float
    n_cycles: int
    interval: float | None
    feasible: bool
    weekly_budget: float
    weekly_buffer: float
    quality_factor: float | None = None

    def as_dict(self) -> dict:
        return {
            "config_label": self.config_label,
            "quality_factor": self.quality_factor,
            "e_harvest_year_J": self.e_harvest_year,
            "e_sleep_year_J": self.e_sleep_year,
            "e_available_J": self.e_available,
            "n_cycles": self.n_cycles,
            "interval_s": self.interval,
            "feasible": self.feasible,
            "weekly_budget_J": self.weekly_budget,
            "weekly_buffer_J": self.weekly_buffer,
        }


@dataclass(frozen=True)
class AnnualHarvest:
    """Converted-energy integral of one harvester/converter chain."""

    energy_j: float
    monthly_j: tuple[float, ...]
    span_seconds: float
    scaled_to_year: bool
    fitted_coefficient: float | None = None


@dataclass(frozen=True)
class SweepResult:
    """Cartesian design-space sweep, sorted by annual harvest (descending)."""

    rows: tuple[AnnualEstimate, ...]


def _chain_power(harvester, converter: ConverterSpec, env: EnvTrace) -> np.ndarray:
    """Converter output power at every sample of the environment trace."""
    if isinstance(harvester, TegSpec):
        if env.quantity not in (Quantity.TEMPERATURE_DELTA_K, Quantity.TEMPERATURE_K):
            raise ValueError(f"TEG extrapolation needs a temperature trace, "
                             f"got {env.quantity.value}")
        source = teg_source(harvester, env.v)
    elif isinstance(harvester, PvSpec):
        if env.quantity is not Quantity.IRRADIANCE_W_PER_M2:
            raise ValueError(f"PV extrapolation needs an irradiance trace, "
                             f"got {env.quantity.value}")
        source = pv_power(harvester, env.v)
    else:
        raise TypeError(f"unsupported harvester type: {type(harvester).__name__}")
    return converter_output_series(converter, source)


def _fit_reference(reference: EnvTrace, annual_env: EnvTrace, harvester,
                   align_step: float | None):
    """Update the harvester spec from a co-measured reference trace.

    PV: through-origin slope of measured cell power vs irradiance replaces
    coefficient_k. TEG: slope of the measured element-side signal (either a
    temperature difference at the element, or its open-circuit voltage)
    against the media difference replaces quality_factor.
    """
    if align_step is None:
        align_step = max(reference.median_interval(), annual_env.median_interval())
    pair = align(reference, annual_env, align_step)
    if isinstance(harvester, PvSpec):
        cal = calibrate_pv(pair)
        return replace(harvester, coefficient_k=cal.k), cal.k
    # TEG: least-squares through origin on |dT_media|
    media = np.abs(pair.b.v)
    ref = np.abs(pair.a.v)
    denom = float(np.dot(media, media))
    if denom == 0.0:
        raise CalibrationError("degenerate reference fit: media dT is all zero")
    slope = float(np.dot(ref, media)) / denom
    if reference.quantity is Quantity.VOLTAGE_V:
        q = slope / harvester.seebeck
    elif reference.quantity in (Quantity.TEMPERATURE_DELTA_K, Quantity.TEMPERATURE_K):
        q = slope
    else:
        raise CalibrationError(
            f"TEG reference must be a voltage or temperature-difference trace, "
            f"got {reference.quantity.value}")
    if not 0 < q <= 1:
        warnings.warn(f"fitted quality factor {q:.3g} outside (0, 1]; clamping to bounds",
                      UserWarning, stacklevel=3)
        q = min(max(q, 1e-6), 1.0)
    return replace(harvester, quality_factor=q), q


def extrapolate_annual(reference: EnvTrace | None, annual_env: EnvTrace,
                       harvester, converter: ConverterSpec, *,
                       align_step: float | None = None) -> AnnualHarvest:
    """Annual converted energy from a year-scale environment trace.

    When ``reference`` is given it recalibrates the harvester first (PV
    slope or TEG coupling quality). The converted power is integrated by
    the trapezoid rule over the trace samples; spans under 360 days are
    scaled linearly to 365 days with a warning. Also returns the integral
    split into 12 equal-length bins.
    """
    fitted = None
    if reference is not None:
        harvester, fitted = _fit_reference(reference, annual_env, harvester, align_step)

    p_out = _chain_power(harvester, converter, annual_env)
    t = annual_env.t
    energy = float(np.trapz(p_out, t))

    # cumulative integral -> exact bin split at interpolated edges
    segment = 0.5 * (p_out[1:] + p_out[:-1]) * np.diff(t)
    cumulative = np.concatenate([[0.0], np.cumsum(segment)])
    edges = np.linspace(t[0], t[-1], MONTH_BINS + 1)
    monthly = np.diff(np.interp(edges, t, cumulative))

    span = annual_env.span
    scaled = span < MIN_ANNUAL_SPAN
    if scaled:
        factor = YEAR_SECONDS / span
        warnings.warn(f"annual trace spans only {span / 86400:.1f} days; "
                      f"scaling energy linearly by {factor:.3g} to a 365-day year",
                      UserWarning, stacklevel=2)
        energy *= factor
        monthly = monthly * factor
    return AnnualHarvest(energy_j=energy, monthly_j=tuple(float(m) for m in monthly),
                         span_seconds=span, scaled_to_year=scaled,
                         fitted_coefficient=fitted)


def energy_balance(e_harvest_year: float, node: NodeSpec, *,
                   label: str = "", quality_factor: float | None = None) -> AnnualEstimate:
    """Split an annual harvest into sleep floor and active budget.

    The available energy funds n_cycles full active cycles per year; the
    sustainable interval is the year divided by that count. Weekly budget
    and buffer mirror the harvest-side planning granularity of field
    deployments that report once a week.
    """
    if e_harvest_year < 0:
        raise ValueError("e_harvest_year must be >= 0")
    e_sleep = node.sleep_power * YEAR_SECONDS
    e_available = max(0.0, e_harvest_year - e_sleep)
    cycle = active_cycle_energy(node)
    n_cycles = int(e_available / cycle)
    interval = YEAR_SECONDS / n_cycles if n_cycles > 0 else None
    weekly_budget = e_available / WEEKS_PER_YEAR
    return AnnualEstimate(
        config_label=label or node.label,
        e_harvest_year=e_harvest_year,
        e_sleep_year=e_sleep,
        e_available=e_available,
        n_cycles=n_cycles,
        interval=interval,
        feasible=e_harvest_year >= e_sleep,
        weekly_budget=weekly_budget,
        weekly_buffer=weekly_budget - cycle,
        quality_factor=quality_factor,
    )


def _legal_pair(harvester, converter: ConverterSpec) -> bool:
    if isinstance(harvester, TegSpec):
        return not converter.is_mppt
    return converter.is_mppt


def sweep(harvesters, converters, quality_grid, annual_env: EnvTrace,
          node: NodeSpec) -> SweepResult:
    """Evaluate the cartesian product of harvesters x converters.

    TEG harvesters are additionally swept across ``quality_grid`` (coupling
    quality factors), producing the data behind collectable-energy-vs-
    coupling curves. Impedance converters pair with TEGs and MPPT
    converters with PV cells; illegal pairings are skipped. Rows are sorted
    by annual harvest, descending, with a total tie-break on label and
    quality factor.
    """
    harvesters = list(harvesters)
    converters = list(converters)
    quality_grid = list(quality_grid)
    if not harvesters or not converters:
        raise ValueError("sweep needs at least one harvester and one converter")
    rows: list[AnnualEstimate] = []
    evaluated = 0
    for h in harvesters:
        for c in converters:
            if not _legal_pair(h, c):
                continue
            evaluated += 1
            label = f"{h.label}+{c.label}"
            if isinstance(h, TegSpec):
                qs = quality_grid or [h.quality_factor]
                for q in qs:
                    est = energy_balance(
                        extrapolate_annual(None, annual_env, replace(h, quality_factor=q),
                                           c).energy_j,
                        node, label=label, quality_factor=q)
                    rows.append(est)
            else:
                est = energy_balance(extrapolate_annual(None, annual_env, h, c).energy_j,
                                     node, label=label)
                rows.append(est)
    if not evaluated:
        raise ValueError("no legal harvester/converter pairing in sweep axes")
    rows.sort(key=lambda r: (-r.e_harvest_year, r.config_label,
                             r.quality_factor if r.quality_factor is not None else -1.0))
    return SweepResult(rows=tuple(rows))


def write_sweep_csv(result: SweepResult, path, manifest_digest: str | None = None) -> None:
    """Sweep rows as CSV, loadable by external plotting tools."""
    import csv
    from pathlib import Path

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        if manifest_digest:
            fh.write(f"# manifest: {manifest_digest}\n")
        writer = csv.writer(fh)
        writer.writerow(["config_label", "q", "E_harvest_J", "E_sleep_J",
                         "E_available_J", "n_cycles", "interval_s", "feasible"])
        for row in result.rows:
            writer.writerow([
                row.config_label,
                "" if row.quality_factor is None else repr(row.quality_factor),
                repr(row.e_harvest_year),
                repr(row.e_sleep_year),
                repr(row.e_available),
                row.n_cycles,
                "" if row.interval is None else repr(row.interval),
                row.feasible,
            ])
