"""Exception and warning types shared across the package."""


class HarvestSimError(Exception):
    """Base class for all domain errors."""


class TraceError(HarvestSimError):
    """Malformed or invalid time-series input."""


class OverlapError(TraceError):
    """Two traces share no usable time window."""


class CalibrationError(HarvestSimError):
    """Calibration data is degenerate or insufficient."""


class OverVoltageError(HarvestSimError):
    """Converter input voltage exceeds its rated window."""


class ConfigError(HarvestSimError):
    """Config file is missing, malformed, or carries bad units."""


class GapWarning(UserWarning):
    """A trace contains gaps much longer than its typical cadence."""


class CouplingWarning(UserWarning):
    """Thermal-coupling quality factor outside the physical range."""


class PolarityWarning(UserWarning):
    """Temperature-difference trace changes sign; harvester model uses magnitude."""
