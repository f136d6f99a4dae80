"""Inverse pipeline: from a sampled record back to gauge factors.

Steps: reconstruct resistance (from the divider voltages when the
resistance columns are absent), derive strain from the deflection
channel, locate the low-amplitude measurement windows in the force
signal, fit resistance against strain per window, and assemble break-in
curves (gauge factor and unstrained resistance against the running
maximum strain magnitude).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .mechanics import Orientation
from .record import TimeSeriesRecord
from .section import BeamGeometry, MaterialSet, section_properties
from .sensing import DividerConfig, divider_inverse


class DegenerateWindowError(ValueError):
    """Window data cannot support a fit (too few points or flat strain)."""


@dataclass(frozen=True)
class AnalysisParams:
    """Knowledge about the loading protocol needed by the inverse pipeline."""

    force_floor: float
    small_amplitude: float
    cycle_frequency: float
    tolerance: float = 0.1
    relative_strain: bool = False
    dividers: tuple[DividerConfig, DividerConfig] | None = None

    @classmethod
    def from_metadata(cls, metadata: dict, **overrides) -> "AnalysisParams":
        try:
            wf = metadata["plan"]["experiment"]["waveform"]
        except (KeyError, TypeError):
            raise ConfigError("record metadata carries no waveform parameters") from None
        div = None
        sens = metadata.get("plan", {}).get("sensing", {})
        if "dividers" in sens:
            r = sens["dividers"]["R_div"]
            vs = sens["dividers"]["V_supply"]
            div = (DividerConfig(r[0], vs), DividerConfig(r[1], vs))
        kw = {
            "force_floor": wf["force_floor"],
            "small_amplitude": wf["small_amplitude"],
            "cycle_frequency": wf["cycle_frequency"],
            "dividers": div,
        }
        kw.update(overrides)
        return cls(**kw)


@dataclass(frozen=True)
class Window:
    """One detected low-amplitude measurement window (sample index range)."""

    index: int
    start: int
    end: int  # exclusive
    orientation: Orientation = Orientation.INITIAL

    @property
    def n_points(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class FitResult:
    """Per-window linear fit of resistance against average strain."""

    window: int
    gauge: int
    k: float
    R0_fit: float
    r_squared: float
    n_points: int


def strain_from_deflection(
    deflection: np.ndarray, geometry: BeamGeometry
) -> np.ndarray:
    """Centroid strain (compression side) from center deflection.

    eps_max = 12 · d_NA · y / span².  The average strain over the span is
    half of this; per-gauge signs are applied by the caller based on
    gauge side and orientation.
    """
    return 12.0 * geometry.d_NA * np.asarray(deflection) / geometry.span_L**2


def gauge_average_strain(
    eps_max: np.ndarray, gauge: int, orientation: Orientation
) -> np.ndarray:
    """Signed average strain of one gauge from the compression-side series."""
    sign = 1.0 if gauge == 1 else -1.0
    if orientation is Orientation.FLIPPED:
        sign = -sign
    return sign * eps_max / 2.0


def segment_small_sets(
    force: np.ndarray,
    force_floor: float,
    small_amplitude: float,
    cycle_period_samples: int,
    tolerance: float = 0.1,
    min_points: int = 10,
) -> list[tuple[int, int]]:
    """Find maximal low-amplitude oscillation windows in the force signal.

    A sample belongs to a window when, over one centered cycle, the force
    stays at or below floor + amplitude·(1+tol) and swings by at least
    amplitude·(1−tol); the swing requirement excludes constant-force
    holds, the ceiling requirement excludes break-in sets.  The mask is
    eroded by half a cycle to cut boundary bleed into neighbouring holds.
    """
    force = np.asarray(force, dtype=float)
    n = force.size
    W = max(int(cycle_period_samples), 2)
    if n < W:
        return []
    half = W // 2
    padded = np.pad(force, (half, W - 1 - half), mode="edge")
    view = np.lib.stride_tricks.sliding_window_view(padded, W)
    rmax = view.max(axis=1)
    rmin = view.min(axis=1)
    ceiling = force_floor + small_amplitude * (1.0 + tolerance)
    mask = (rmax <= ceiling) & (rmax - rmin >= small_amplitude * (1.0 - tolerance))

    # Erode: keep a sample only if its whole neighbourhood qualifies.
    m = np.pad(mask, (half, W - 1 - half), mode="constant", constant_values=False)
    eroded = np.lib.stride_tricks.sliding_window_view(m, W).all(axis=1)

    windows: list[tuple[int, int]] = []
    idx = np.flatnonzero(eroded)
    if idx.size == 0:
        return windows
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    for a, b in zip(starts, ends):
        lo, hi = int(idx[a]), int(idx[b]) + 1
        if hi - lo >= max(min_points, W):
            windows.append((lo, hi))
    return windows


def fit_gauge_factor(eps_avg: np.ndarray, R: np.ndarray) -> tuple[float, float, float]:
    """OLS of R against ε̄; returns (k, R0_fit, r_squared).

    The gauge factor is slope/intercept: the strained resistance follows
    R = R0·(1 + k·ε̄), so the fitted intercept is the window's unstrained
    resistance and the slope is R0·k.
    """
    eps_avg = np.asarray(eps_avg, dtype=float)
    R = np.asarray(R, dtype=float)
    if eps_avg.size < 10:
        raise DegenerateWindowError(f"need >= 10 points, got {eps_avg.size}")
    ex = eps_avg - eps_avg.mean()
    sxx = float(ex @ ex)
    if sxx == 0.0:
        raise DegenerateWindowError("strain has zero variance in this window")
    slope = float(ex @ (R - R.mean())) / sxx
    intercept = float(R.mean() - slope * eps_avg.mean())
    if intercept == 0.0:
        raise DegenerateWindowError("zero fitted unstrained resistance")
    pred = intercept + slope * eps_avg
    ss_res = float(np.sum((R - pred) ** 2))
    ss_tot = float(np.sum((R - R.mean()) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope / intercept, intercept, r2


def cycle_metrics(
    t: np.ndarray,
    force: np.ndarray,
    eps_avg: np.ndarray,
    R: np.ndarray,
    cycle_frequency: float,
) -> dict:
    """Hysteresis and baseline drift over one window of load cycles.

    Hysteresis is the largest resistance gap between the loading and
    unloading branches at equal strain, normalized by the window's
    resistance span.  Drift is the least-squares slope of the per-cycle
    mean resistance against cycle index (negative = decaying baseline).
    """
    t = np.asarray(t, dtype=float)
    dt = float(np.median(np.diff(t)))
    full = max(8, int(round(0.9 / (cycle_frequency * dt))))
    cyc = np.floor((t - t[0]) * cycle_frequency + 1e-9).astype(int)
    per_cycle = [np.flatnonzero(cyc == k) for k in range(int(cyc.max()) + 1)]
    per_cycle = [ix for ix in per_cycle if ix.size >= full]  # complete cycles only
    if len(per_cycle) < 2:
        raise DegenerateWindowError("need at least 2 full cycles for cycle metrics")

    span = float(R.max() - R.min())
    width = 0.0
    baselines = []
    for ix in per_cycle:
        baselines.append(float(R[ix].mean()))
        fpk = int(np.argmax(force[ix]))
        if fpk < 2 or fpk > ix.size - 3:
            continue
        up, down = ix[: fpk + 1], ix[fpk:]
        lo = max(eps_avg[up].min(), eps_avg[down].min())
        hi = min(eps_avg[up].max(), eps_avg[down].max())
        if hi <= lo:
            continue
        grid = np.linspace(lo, hi, 33)[1:-1]
        ou, od = np.argsort(eps_avg[up]), np.argsort(eps_avg[down])
        r_up = np.interp(grid, eps_avg[up][ou], R[up][ou])
        r_down = np.interp(grid, eps_avg[down][od], R[down][od])
        width = max(width, float(np.max(np.abs(r_up - r_down))))

    idx = np.arange(len(baselines), dtype=float)
    b = np.asarray(baselines)
    sxx = float(np.sum((idx - idx.mean()) ** 2))
    drift = float(np.sum((idx - idx.mean()) * (b - b.mean())) / sxx) if sxx > 0 else 0.0
    return {
        "hysteresis": 0.0 if span == 0.0 else width / span,
        "drift_ohm_per_cycle": drift,
        "n_cycles": len(per_cycle),
    }


def breakin_curve(
    force: np.ndarray,
    windows: list[Window],
    fits: dict[tuple[int, int], FitResult],
    R_by_gauge: dict[int, np.ndarray],
    eps_mag_per_N: float,
    force_floor: float,
    small_amplitude: float,
) -> list[dict]:
    """Gauge factor and unstrained resistance against running max strain.

    One point per measurement window and gauge, keyed to the largest
    strain magnitude experienced up to the window's end within its
    orientation pass (computed from force through the beam model).  The
    unstrained resistance is the window-mean resistance at the force
    floor.  Consecutive windows with no new strain record collapse onto
    one point (the latest), keeping the strain axis strictly increasing.
    """
    curves: list[dict] = []
    eps_mag = eps_mag_per_N * np.asarray(force)
    floor_band = force_floor + 0.05 * small_amplitude
    for gauge in (1, 2):
        for orientation in (Orientation.INITIAL, Orientation.FLIPPED):
            pts: list[dict] = []
            own = [w for w in windows if w.orientation is orientation]
            if not own:
                continue
            pass_start = min(w.start for w in own)
            for w in own:
                fit = fits.get((w.index, gauge))
                if fit is None:
                    continue
                x = float(eps_mag[pass_start : w.end].max())
                at_floor = np.flatnonzero(force[w.start : w.end] <= floor_band) + w.start
                Rg = R_by_gauge[gauge]
                r_un = float(np.nanmean(Rg[at_floor])) if at_floor.size else float("nan")
                point = {"breakin_strain": x, "k": fit.k, "R_unstrained": r_un}
                if pts and pts[-1]["breakin_strain"] >= x:
                    pts[-1] = point
                else:
                    pts.append(point)
            if pts:
                curves.append(
                    {"gauge": gauge, "orientation": orientation.value, "points": pts}
                )
    return curves


def _orientation_spans(record: TimeSeriesRecord) -> list[tuple[int, int, Orientation]]:
    segs = record.metadata.get("segments")
    if not segs:
        return [(0, record.n_samples, Orientation.INITIAL)]
    spans: list[tuple[int, int, Orientation]] = []
    for seg in segs:
        o = Orientation(seg["orientation"])
        if spans and spans[-1][2] is o:
            spans[-1] = (spans[-1][0], seg["sample_end"], o)
        else:
            spans.append((seg["sample_start"], seg["sample_end"], o))
    return spans


def _channel_resistance(
    record: TimeSeriesRecord, gauge: int, params: AnalysisParams
) -> tuple[np.ndarray, bool, bool]:
    """Resistance series for one gauge: direct, or rebuilt from voltage."""
    R = np.asarray(getattr(record, f"R{gauge}"), dtype=float)
    V = np.asarray(getattr(record, f"V{gauge}"), dtype=float)
    reconstructed = False
    if np.all(np.isnan(R)) and not np.all(np.isnan(V)):
        if params.dividers is None:
            raise ConfigError(
                f"channel {gauge} has voltages only; divider parameters required"
            )
        div = params.dividers[gauge - 1]
        good = np.isfinite(V) & (V > 0) & (V < div.V_supply)
        R = np.full_like(V, np.nan)
        R[good] = div.R_div * V[good] / (div.V_supply - V[good])
        reconstructed = True
    open_circuit = bool(np.isnan(R).any())
    return R, open_circuit, reconstructed


def analyze_record(
    record: TimeSeriesRecord,
    geometry: BeamGeometry,
    materials: MaterialSet,
    params: AnalysisParams,
) -> dict:
    """Run the whole inverse pipeline and return the JSON-ready report."""
    dt = float(np.median(np.diff(record.t))) if record.n_samples > 1 else 1.0
    sample_rate = 1.0 / dt
    W = int(round(sample_rate / params.cycle_frequency))

    eps_max = strain_from_deflection(record.deflection, geometry)

    raw = segment_small_sets(
        record.force, params.force_floor, params.small_amplitude, W, params.tolerance
    )
    spans = _orientation_spans(record)
    windows: list[Window] = []
    for lo, hi in raw:
        for a, b, orient in spans:
            s, e = max(lo, a), min(hi, b)
            if e - s >= max(10, W):
                windows.append(Window(index=len(windows), start=s, end=e, orientation=orient))

    channels: dict[str, dict] = {}
    R_by_gauge: dict[int, np.ndarray] = {}
    for gauge in (1, 2):
        R, open_c, recon = _channel_resistance(record, gauge, params)
        R_by_gauge[gauge] = R
        channels[f"R{gauge}"] = {
            "open_circuit": open_c,
            "reconstructed_from_voltage": recon,
        }

    fits: dict[tuple[int, int], FitResult] = {}
    metrics: list[dict] = []
    notes: list[str] = []
    for w in windows:
        sl = slice(w.start, w.end)
        for gauge in (1, 2):
            R = R_by_gauge[gauge][sl]
            if np.isnan(R).any():
                notes.append(f"window {w.index} gauge {gauge}: open channel, skipped")
                continue
            eps = gauge_average_strain(eps_max[sl], gauge, w.orientation)
            if params.relative_strain:
                eps = eps - eps.mean()
            try:
                k, r0, r2 = fit_gauge_factor(eps, R)
            except DegenerateWindowError as exc:
                notes.append(f"window {w.index} gauge {gauge}: {exc}")
                continue
            fits[(w.index, gauge)] = FitResult(
                window=w.index, gauge=gauge, k=k, R0_fit=r0, r_squared=r2,
                n_points=w.n_points,
            )
            try:
                m = cycle_metrics(
                    record.t[sl], record.force[sl], eps, R, params.cycle_frequency
                )
                metrics.append({"window": w.index, "gauge": gauge, **m})
            except DegenerateWindowError:
                pass

    sec = section_properties(geometry, materials)
    eps_mag_per_N = geometry.d_NA * geometry.span_L / (4.0 * materials.E_PETG * sec.J_beam)
    curves = breakin_curve(
        record.force, windows, fits, R_by_gauge, eps_mag_per_N,
        params.force_floor, params.small_amplitude,
    )

    return {
        "schema_version": "1",
        "n_samples": record.n_samples,
        "channels": channels,
        "windows": [
            {
                "index": w.index,
                "orientation": w.orientation.value,
                "sample_start": w.start,
                "sample_end": w.end,
                "t_start": float(record.t[w.start]),
                "t_end": float(record.t[w.end - 1]),
                "n_points": w.n_points,
            }
            for w in windows
        ],
        "fits": [
            {
                "window": f.window, "gauge": f.gauge, "k": f.k,
                "R0_fit": f.R0_fit, "r_squared": f.r_squared, "n_points": f.n_points,
            }
            for f in sorted(fits.values(), key=lambda f: (f.window, f.gauge))
        ],
        "breakin_curves": curves,
        "cycle_metrics": metrics,
        "notes": notes,
    }
