"""Break-in experiment: force waveform and forward simulation.

The loading protocol alternates low-amplitude measurement sets with
progressively heavier "break-in" sets, separated by constant-force holds:

    small, [hold, break-in 1, hold, small], [hold, break-in 2, hold, small], ...

Small sets oscillate between the force floor and floor + small_amplitude;
a break-in set oscillates between its offset and offset + amplitude, both
anchored at the cycle trough.  Holds sit at the force floor.  The whole
schedule is run once per sample orientation, flipping the sample (and the
sign of every per-gauge strain) between passes.

The forward simulation maps force to per-gauge strain and total fiber
stress through the beam model, drives the gauge damage state at every new
stress record, and emits the DAQ-style channels (deflection, per-gauge
resistance and divider voltage).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import sensing
from .errors import ConfigError, PhysicsError
from .mechanics import Orientation, residual_thermal_stress
from .record import CSV_HEADER, SCHEMA_VERSION, TimeSeriesRecord
from .section import BeamGeometry, MaterialSet, section_properties
from .sensing import DividerConfig, GaugeConfig, Matrix


@dataclass(frozen=True)
class BreakinSet:
    """One break-in block: trough force ``offset`` and cycle ``amplitude``."""

    offset: float
    amplitude: float


@dataclass(frozen=True)
class WaveformSpec:
    """Parameters of the alternating small/break-in force schedule (N, s, Hz)."""

    small_amplitude: float = 10.0
    small_cycles: int = 20
    breakin_cycles_per_set: int = 20
    breakin_sets: tuple[BreakinSet, ...] = ()
    hold_duration: float = 60.0
    cycle_frequency: float = 0.5
    force_floor: float = 20.0
    force_ceiling: float = 70.0

    def __post_init__(self):
        if self.cycle_frequency <= 0:
            raise ConfigError("cycle_frequency must be > 0")
        if self.hold_duration < 0:
            raise ConfigError("hold_duration must be >= 0")
        if self.small_cycles < 1 or self.breakin_cycles_per_set < 1:
            raise ConfigError("cycle counts must be >= 1")
        if not 0 <= self.force_floor < self.force_ceiling:
            raise ConfigError("need 0 <= force_floor < force_ceiling")
        if self.small_amplitude <= 0:
            raise ConfigError("small_amplitude must be > 0")
        if self.force_floor + self.small_amplitude > self.force_ceiling:
            raise ConfigError("small set exceeds force_ceiling")
        prev_off, prev_amp = -math.inf, -math.inf
        for i, s in enumerate(self.breakin_sets):
            if s.amplitude <= 0:
                raise ConfigError(f"break-in set {i}: amplitude must be > 0")
            if s.offset < self.force_floor:
                raise ConfigError(f"break-in set {i}: offset below force_floor")
            peak = s.offset + s.amplitude
            if peak > self.force_ceiling + 1e-9:
                raise ConfigError(
                    f"break-in set {i}: peak {peak:.6g} N exceeds "
                    f"force_ceiling {self.force_ceiling:.6g} N"
                )
            if s.offset < prev_off or s.amplitude < prev_amp:
                raise ConfigError("break-in offsets/amplitudes must be non-decreasing")
            prev_off, prev_amp = s.offset, s.amplitude


@dataclass(frozen=True)
class Segment:
    """One contiguous block of the sampled waveform."""

    kind: str  # "small" | "hold" | "breakin"
    set_index: int  # ordinal among segments of the same kind, per pass
    sample_start: int
    sample_end: int  # exclusive
    offset: float
    amplitude: float
    cycles: int


@dataclass(frozen=True)
class WaveformResult:
    t: np.ndarray
    force: np.ndarray
    segments: tuple[Segment, ...]


def build_waveform(spec: WaveformSpec, sample_rate: float) -> WaveformResult:
    """Sample one pass of the force schedule at ``sample_rate`` (Hz).

    Deterministic; no RNG involved.  Segment boundaries fall on exact
    sample counts so cycle counts are exact at any rate that resolves the
    cycle shape (sample_rate >= 20 * cycle_frequency).
    """
    if sample_rate < 20.0 * spec.cycle_frequency:
        raise ConfigError(
            f"sample_rate {sample_rate:.6g} Hz cannot resolve "
            f"{spec.cycle_frequency:.6g} Hz cycles (need >= 20x)"
        )
    f = spec.cycle_frequency

    plan: list[tuple[str, int, float, float, int]] = []  # kind, set_idx, offset, amp, cycles
    plan.append(("small", 0, spec.force_floor, spec.small_amplitude, spec.small_cycles))
    for i, s in enumerate(spec.breakin_sets):
        plan.append(("hold", 2 * i, spec.force_floor, 0.0, 0))
        plan.append(("breakin", i, s.offset, s.amplitude, spec.breakin_cycles_per_set))
        plan.append(("hold", 2 * i + 1, spec.force_floor, 0.0, 0))
        plan.append(("small", i + 1, spec.force_floor, spec.small_amplitude, spec.small_cycles))

    segments: list[Segment] = []
    chunks: list[np.ndarray] = []
    start = 0
    for kind, idx, offset, amp, cycles in plan:
        duration = spec.hold_duration if kind == "hold" else cycles / f
        n = int(round(duration * sample_rate))
        if kind == "hold" and n == 0:
            continue
        t_loc = np.arange(n) / sample_rate
        if kind == "hold":
            force = np.full(n, offset)
        else:
            force = offset + 0.5 * amp * (1.0 - np.cos(2.0 * math.pi * f * t_loc))
        chunks.append(force)
        segments.append(Segment(kind, idx, start, start + n, offset, amp, cycles))
        start += n

    force = np.concatenate(chunks)
    t = np.arange(force.size) / sample_rate
    return WaveformResult(t=t, force=force, segments=tuple(segments))


@dataclass(frozen=True)
class Disturbance:
    """Optional measurement-realism decorator on the simulated resistance.

    Off by default; exists to exercise the analysis pipeline, not to model
    matrix viscoelasticity.  Noise amplitude is per matrix class, drift is
    a linear baseline decay per load cycle, and the first-cycle response
    of each small set can be boosted (first peak highest).
    """

    enabled: bool = False
    noise_ohm_conductive: float = 0.02
    noise_ohm_insulating: float = 0.5
    drift_ohm_per_cycle: float = 0.0
    first_peak_boost: float = 0.0
    first_peak_tau_cycles: float = 3.0


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything needed to run (and exactly replay) one experiment."""

    geometry: BeamGeometry
    materials: MaterialSet
    gauge: GaugeConfig
    dividers: tuple[DividerConfig, DividerConfig]
    waveform: WaveformSpec
    sample_rate: float = 100.0
    orientations: tuple[Orientation, ...] = (Orientation.INITIAL, Orientation.FLIPPED)
    seed: int | None = None
    disturbance: Disturbance = field(default_factory=Disturbance)

    def __post_init__(self):
        if self.sample_rate < 20.0 * self.waveform.cycle_frequency:
            raise ConfigError("sample_rate must be >= 20x cycle_frequency")
        if not self.orientations:
            raise ConfigError("at least one orientation required")
        if self.seed is not None and not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


def _gauge_sign(gauge: int, orientation: Orientation) -> float:
    """+1 when the gauge is on the compression side of the bend."""
    above = gauge == 1
    if orientation is Orientation.FLIPPED:
        above = not above
    return 1.0 if above else -1.0


def _damage_events(
    state: sensing.GaugeState,
    sigma_total: np.ndarray,
    rng: np.random.Generator,
) -> tuple[list[tuple[int, sensing.GaugeState]], sensing.GaugeState]:
    """Drive the gauge state through a stress series, sample by sample.

    Damage can only occur where the crack-driving stress sets a new
    record, so only those samples are visited.  The tension path switches
    on once damage passes the concentration threshold, which changes the
    drive series; the scan below re-derives the candidate samples when
    that happens (at most once, damage being monotone).
    """
    cfg = state.config
    comp_drive = np.maximum(-sigma_total, 0.0)
    full_drive = np.maximum(comp_drive, cfg.stress_concentration_factor * np.maximum(sigma_total, 0.0))
    thresh = cfg.tension_damage_min_fraction

    events: list[tuple[int, sensing.GaugeState]] = []
    i = 0
    n = sigma_total.size
    while i < n:
        gate_open = state.broken_fraction >= thresh
        drive = full_drive[i:] if gate_open else comp_drive[i:]
        record = np.maximum.accumulate(drive)
        candidates = np.flatnonzero((drive == record) & (record > state.damage_drive_peak)) + i
        advanced = False
        for j in candidates:
            sig = sigma_total[j]
            new = sensing.apply_stress_peak(state, sig, rng)
            if new is not state:
                events.append((int(j), new))
                state = new
            if not gate_open and state.broken_fraction >= thresh:
                i = int(j) + 1  # tension path just opened; rescan remainder
                advanced = True
                break
        if not advanced:
            break
    return events, state


def run_experiment(plan: ExperimentPlan) -> TimeSeriesRecord:
    """Simulate the full break-in protocol and return the sampled record.

    Per orientation pass: force -> bending strain and per-gauge total
    fiber stress -> damage updates at new stress records -> resistance and
    divider voltage.  Gauges carry their damage across passes.  An open
    circuit (insulating matrix, full damage) marks the affected R/V
    channels NaN from that sample on.
    """
    if plan.seed is None:
        raise ConfigError("a seed is required: the damage model draws filament failures")

    wave = build_waveform(plan.waveform, plan.sample_rate)
    n_pass = wave.force.size
    n_orient = len(plan.orientations)
    n_total = n_pass * n_orient

    force = np.tile(wave.force, n_orient)
    t = np.arange(n_total) / plan.sample_rate

    sec = section_properties(plan.geometry, plan.materials)
    therm = residual_thermal_stress(plan.geometry, plan.materials)
    EJ = plan.materials.E_PETG * sec.J_beam
    L = plan.geometry.span_L
    # Per-newton factors, compression side (negative).
    eps_per_N = -plan.geometry.d_NA * L / (4.0 * EJ)
    y_per_N = -(L**3) / (48.0 * EJ)
    sig_per_N = -sec.n * (L / 4.0) * (plan.geometry.d_NA + 0.5 * plan.geometry.h_comp) / sec.J_beam

    deflection = y_per_N * force

    segments: list[dict] = []
    for p, orient in enumerate(plan.orientations):
        for s in wave.segments:
            segments.append(
                {
                    "orientation": orient.value,
                    "kind": s.kind,
                    "set_index": s.set_index,
                    "sample_start": s.sample_start + p * n_pass,
                    "sample_end": s.sample_end + p * n_pass,
                    "offset_N": s.offset,
                    "amplitude_N": s.amplitude,
                    "cycles": s.cycles,
                }
            )

    root = np.random.SeedSequence(int(plan.seed))
    gauge_seeds = root.spawn(3)  # gauge 1, gauge 2, disturbance

    R = np.empty((2, n_total))
    V = np.empty((2, n_total))
    trace: dict[str, list[dict]] = {"gauge1": [], "gauge2": []}
    open_flags = [False, False]

    for gi, gauge_num in enumerate((1, 2)):
        rng = np.random.default_rng(gauge_seeds[gi])
        state = sensing.new_state(plan.gauge)
        # As-built condition: residual thermal stress is already applied.
        state = sensing.apply_stress_peak(state, therm.sigma_therm, rng)

        sign = np.concatenate(
            [
                np.full(n_pass, _gauge_sign(gauge_num, o))
                for o in plan.orientations
            ]
        )
        eps_avg = sign * eps_per_N * force / 2.0
        sigma_total = sign * sig_per_N * force + therm.sigma_therm

        events, final_state = _damage_events(state, sigma_total, rng)

        bounds = [0] + [idx for idx, _ in events] + [n_total]
        states = [state] + [st for _, st in events]
        k_eff = np.empty(n_total)
        R_unstr = np.empty(n_total)
        open_mask = np.zeros(n_total, dtype=bool)
        for (a, b), st in zip(zip(bounds[:-1], bounds[1:]), states):
            k_eff[a:b] = st.k_effective
            R_unstr[a:b] = st.R_unstrained if not st.open_circuit else np.nan
            open_mask[a:b] = st.open_circuit

        def _trace_row(idx: int, st: sensing.GaugeState) -> dict:
            return {
                "sample": idx,
                "t_s": idx / plan.sample_rate,
                "broken_fraction": st.broken_fraction,
                "k_effective": st.k_effective,
                "R_unstrained": None if st.open_circuit else st.R_unstrained,
                "open_circuit": st.open_circuit,
            }

        trace[f"gauge{gauge_num}"] = [_trace_row(0, state)] + [
            _trace_row(idx, st) for idx, st in events
        ]
        open_flags[gi] = final_state.open_circuit

        asym = plan.gauge.crack_opening_asymmetry
        eps_eff = np.where(eps_avg >= 0, eps_avg, asym * eps_avg)
        resistance = R_unstr * (1.0 + k_eff * eps_eff)

        if plan.disturbance.enabled:
            resistance = _apply_disturbance(
                resistance, R_unstr, k_eff, eps_eff, segments, plan,
                np.random.default_rng(gauge_seeds[2].spawn(2)[gi]),
            )

        resistance = np.where(open_mask, np.nan, resistance)
        div = plan.dividers[gi]
        with np.errstate(invalid="ignore"):
            voltage = div.V_supply * resistance / (resistance + div.R_div)
        R[gi] = resistance
        V[gi] = voltage

    config_doc = _plan_document(plan)
    digest = hashlib.sha256(
        json.dumps(config_doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    metadata = {
        "schema_version": SCHEMA_VERSION,
        "columns": list(CSV_HEADER),
        "seed": int(plan.seed),
        "plan_digest": digest,
        "plan": config_doc,
        "segments": segments,
        "gauge_trace": trace,
        "open_circuit": {"R1": bool(open_flags[0]), "R2": bool(open_flags[1])},
        "thermal_stress_Pa": therm.sigma_therm,
    }
    return TimeSeriesRecord(
        t=t, force=force, deflection=deflection,
        R1=R[0], R2=R[1], V1=V[0], V2=V[1], metadata=metadata,
    )


def _apply_disturbance(
    resistance: np.ndarray,
    R_unstr: np.ndarray,
    k_eff: np.ndarray,
    eps_eff: np.ndarray,
    segments: list[dict],
    plan: ExperimentPlan,
    rng: np.random.Generator,
) -> np.ndarray:
    """Add first-peak transient, per-cycle baseline drift and noise."""
    d = plan.disturbance
    out = resistance.copy()
    f = plan.waveform.cycle_frequency
    rate = plan.sample_rate
    if d.first_peak_boost != 0.0:
        for seg in segments:
            if seg["kind"] != "small":
                continue
            a, b = seg["sample_start"], seg["sample_end"]
            cyc = np.arange(b - a) / rate * f
            boost = 1.0 + d.first_peak_boost * np.exp(-cyc / d.first_peak_tau_cycles)
            out[a:b] = R_unstr[a:b] + (out[a:b] - R_unstr[a:b]) * boost
    if d.drift_ohm_per_cycle != 0.0:
        for seg in segments:
            if seg["kind"] != "small":
                continue
            a, b = seg["sample_start"], seg["sample_end"]
            cyc = np.arange(b - a) / rate * f
            out[a:b] = out[a:b] - d.drift_ohm_per_cycle * cyc
    amp = (
        d.noise_ohm_conductive
        if plan.gauge.matrix is Matrix.CONDUCTIVE
        else d.noise_ohm_insulating
    )
    if amp > 0.0:
        out = out + rng.normal(0.0, amp, out.size)
    return out


def _plan_document(plan: ExperimentPlan) -> dict:
    """Resolved plan as a plain JSON-compatible document (SI units)."""
    g, m, s = plan.geometry, plan.materials, plan.gauge
    return {
        "geometry": {k: getattr(g, k) for k in (
            "h_beam", "b_beam", "h_hollow", "b_hollow",
            "h_comp", "b_comp", "d_NA", "span_L",
        )},
        "materials": {k: getattr(m, k) for k in (
            "E_PETG", "E_comp", "E_fiber", "E_PLA",
            "alpha_PETG", "alpha_fiber", "T_ambient", "T_comp", "T_PETG",
            "rho_fiber", "rho_matrix",
            "sigma_t_comp_tension", "sigma_t_comp_compression",
        )},
        "sensing": {
            "R0": s.R0,
            "k_intrinsic": s.k_intrinsic,
            "matrix": s.matrix.value,
            "filament_count": s.filament_count,
            "filament_diameter": s.filament_diameter,
            "gauge_length": s.gauge_length,
            "weibull_modulus": s.weibull_modulus,
            "weibull_scale": s.weibull_scale,
            "bridge_resistance_scale": s.bridge_resistance_scale,
            "crack_sensitivity": s.crack_sensitivity,
            "matrix_bridge_resistance": s.matrix_bridge_resistance,
            "matrix_crack_sensitivity": s.matrix_crack_sensitivity,
            "disconnect_exponent": s.disconnect_exponent,
            "coalescence_exponent": s.coalescence_exponent,
            "stress_concentration_factor": s.stress_concentration_factor,
            "tension_damage_min_fraction": s.tension_damage_min_fraction,
            "crack_opening_asymmetry": s.crack_opening_asymmetry,
            "dividers": {
                "R_div": [d.R_div for d in plan.dividers],
                "V_supply": plan.dividers[0].V_supply,
            },
        },
        "experiment": {
            "waveform": {
                "small_amplitude": plan.waveform.small_amplitude,
                "small_cycles": plan.waveform.small_cycles,
                "breakin_cycles_per_set": plan.waveform.breakin_cycles_per_set,
                "breakin_sets": [
                    {"offset": b.offset, "amplitude": b.amplitude}
                    for b in plan.waveform.breakin_sets
                ],
                "hold_duration": plan.waveform.hold_duration,
                "cycle_frequency": plan.waveform.cycle_frequency,
                "force_floor": plan.waveform.force_floor,
                "force_ceiling": plan.waveform.force_ceiling,
            },
            "sample_rate": plan.sample_rate,
            "orientations": [o.value for o in plan.orientations],
            "disturbance": {
                "enabled": plan.disturbance.enabled,
                "noise_ohm_conductive": plan.disturbance.noise_ohm_conductive,
                "noise_ohm_insulating": plan.disturbance.noise_ohm_insulating,
                "drift_ohm_per_cycle": plan.disturbance.drift_ohm_per_cycle,
                "first_peak_boost": plan.disturbance.first_peak_boost,
                "first_peak_tau_cycles": plan.disturbance.first_peak_tau_cycles,
            },
        },
    }
