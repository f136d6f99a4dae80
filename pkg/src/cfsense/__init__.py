"""cfsense: self-sensing carbon-fiber beam toolkit.

Forward models (transformed-section bending, residual thermal stress,
filament-bundle damage, divider readout), a break-in experiment
simulator, and the inverse analysis pipeline that extracts gauge factors
from recorded time series.
"""

from .analysis import AnalysisParams, FitResult, analyze_record, fit_gauge_factor
from .experiment import BreakinSet, Disturbance, ExperimentPlan, WaveformSpec, build_waveform, run_experiment
from .mechanics import (
    BendingState,
    FailureBand,
    LoadCase,
    Orientation,
    ThermalState,
    bend,
    residual_thermal_stress,
    total_fiber_stress,
)
from .record import TimeSeriesRecord, parse_record, write_record
from .section import BeamGeometry, MaterialSet, SectionProperties, section_properties
from .sensing import (
    DividerConfig,
    GaugeConfig,
    GaugeState,
    Matrix,
    apply_stress_peak,
    baseline_resistance,
    divider_forward,
    divider_inverse,
    gauge_factor_from_damage,
    linear_resistance,
    matrix_parallel_ratio,
    new_state,
    weibull_cdf,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisParams", "FitResult", "analyze_record", "fit_gauge_factor",
    "BreakinSet", "Disturbance", "ExperimentPlan", "WaveformSpec",
    "build_waveform", "run_experiment",
    "BendingState", "FailureBand", "LoadCase", "Orientation", "ThermalState",
    "bend", "residual_thermal_stress", "total_fiber_stress",
    "TimeSeriesRecord", "parse_record", "write_record",
    "BeamGeometry", "MaterialSet", "SectionProperties", "section_properties",
    "DividerConfig", "GaugeConfig", "GaugeState", "Matrix",
    "apply_stress_peak", "baseline_resistance", "divider_forward",
    "divider_inverse", "gauge_factor_from_damage", "linear_resistance",
    "matrix_parallel_ratio", "new_state", "weibull_cdf",
    "__version__",
]
