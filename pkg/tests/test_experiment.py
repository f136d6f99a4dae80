"""Waveform construction and the forward experiment simulation."""

import copy

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfsense import config
from cfsense.errors import ConfigError
from cfsense.experiment import (
    BreakinSet,
    Disturbance,
    WaveformSpec,
    build_waveform,
    run_experiment,
)
from cfsense.mechanics import Orientation

from conftest import reduced_doc


def default_spec(**kw) -> WaveformSpec:
    sets = kw.pop("breakin_sets", tuple(
        BreakinSet(offset=o, amplitude=10.0) for o in (30.0, 37.5, 45.0, 52.5, 60.0)
    ))
    return WaveformSpec(breakin_sets=sets, **kw)


# ----------------------------------------------------------------- waveform


def test_small_set_duration_and_cycle_count():
    wave = build_waveform(default_spec(), sample_rate=100.0)
    smalls = [s for s in wave.segments if s.kind == "small"]
    assert len(smalls) == 6  # one before plus one after each break-in set
    first = smalls[0]
    assert (first.sample_end - first.sample_start) / 100.0 == pytest.approx(40.0)
    f = wave.force[first.sample_start : first.sample_end]
    # count full cycles via peaks at floor + amplitude
    peaks = np.flatnonzero((f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:]))
    assert peaks.size == 20


def test_waveform_is_deterministic():
    a = build_waveform(default_spec(), 100.0)
    b = build_waveform(default_spec(), 100.0)
    assert np.array_equal(a.force, b.force)
    assert a.segments == b.segments


def test_zero_breakin_sets_only_smalls():
    spec = default_spec(breakin_sets=())
    wave = build_waveform(spec, 100.0)
    assert [s.kind for s in wave.segments] == ["small"]
    assert wave.force.max() == pytest.approx(30.0)  # floor + small amplitude
    assert wave.force.min() == pytest.approx(20.0)


def test_breakin_peak_force_appears():
    spec = default_spec(breakin_sets=(BreakinSet(offset=38.0, amplitude=10.0),))
    wave = build_waveform(spec, 200.0)
    assert wave.force.max() == pytest.approx(48.0, abs=1e-9)


def test_rejects_peak_beyond_ceiling():
    with pytest.raises(ConfigError, match="exceeds"):
        default_spec(breakin_sets=(BreakinSet(offset=65.0, amplitude=10.0),))


def test_rejects_decreasing_schedule():
    with pytest.raises(ConfigError, match="non-decreasing"):
        default_spec(breakin_sets=(
            BreakinSet(offset=40.0, amplitude=10.0),
            BreakinSet(offset=30.0, amplitude=10.0),
        ))


def test_rejects_unresolvable_sample_rate():
    with pytest.raises(ConfigError, match="resolve"):
        build_waveform(default_spec(), sample_rate=5.0)


@given(
    n_sets=st.integers(0, 4),
    amp=st.floats(2.0, 12.0),
    hold=st.floats(0.0, 10.0),
)
@settings(max_examples=40, deadline=None)
def test_forces_stay_within_bounds(n_sets, amp, hold):
    offsets = np.linspace(30.0, 70.0 - amp, n_sets) if n_sets else []
    spec = WaveformSpec(
        breakin_sets=tuple(BreakinSet(offset=float(o), amplitude=amp) for o in offsets),
        hold_duration=hold,
        small_cycles=3,
        breakin_cycles_per_set=3,
    )
    wave = build_waveform(spec, 50.0)
    assert wave.force.min() >= spec.force_floor - 1e-9
    assert wave.force.max() <= spec.force_ceiling + 1e-9


# --------------------------------------------------------------- simulation


@pytest.fixture()
def short_plan(preset_docs):
    return config.build_plan(reduced_doc(preset_docs["short"]), seed=42)


def test_same_seed_gives_identical_records(short_plan, tmp_path):
    from cfsense.record import write_record

    rec1 = run_experiment(short_plan)
    rec2 = run_experiment(short_plan)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_record(rec1, str(p1))
    write_record(rec2, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    assert (tmp_path / "a.meta.json").read_bytes() == (tmp_path / "b.meta.json").read_bytes()


def test_seed_required(preset_docs):
    plan = config.build_plan(reduced_doc(preset_docs["short"]), seed=None)
    with pytest.raises(ConfigError, match="seed"):
        run_experiment(plan)


def test_flat_traces_without_breakin(preset_docs):
    doc = reduced_doc(preset_docs["short"])
    doc["experiment"]["waveform"]["breakin_sets"] = []
    doc["experiment"]["orientations"] = ["initial"]
    plan = config.build_plan(doc, seed=7)
    rec = run_experiment(plan)
    # tension gauge: dead flat for the whole run
    assert np.ptp(rec.R2) / np.mean(rec.R2) < 1e-4
    # compression gauge: after the one-time as-built settling in the first
    # cycle, the trace stays nearly constant (sensitivity close to zero)
    settled = rec.R1[int(plan.sample_rate / plan.waveform.cycle_frequency):]
    assert np.ptp(settled) / np.mean(settled) < 0.005
    assert np.ptp(rec.R1) / np.mean(rec.R1) < 0.03


def test_breakin_raises_small_set_response(short_plan):
    rec = run_experiment(short_plan)
    segs = rec.metadata["segments"]
    smalls = [s for s in segs if s["kind"] == "small" and s["orientation"] == "initial"]
    cycle = int(short_plan.sample_rate / short_plan.waveform.cycle_frequency)
    # steady response: peak-to-peak of the last full cycle in each window
    swing = [
        np.ptp(rec.R1[s["sample_end"] - cycle : s["sample_end"]]) for s in smalls
    ]
    assert all(s > swing[0] for s in swing[1:])  # every later window swings more
    assert swing[-1] / swing[0] > 5.0


def test_only_compression_gauge_changes_in_initial_orientation(preset_docs):
    doc = reduced_doc(preset_docs["short"])
    doc["experiment"]["orientations"] = ["initial"]
    plan = config.build_plan(doc, seed=11)
    rec = run_experiment(plan)
    g1 = rec.metadata["gauge_trace"]["gauge1"]
    g2 = rec.metadata["gauge_trace"]["gauge2"]
    assert len(g1) > 1  # compression side accumulates damage
    assert len(g2) == 1  # tension side never changes after the as-built state
    assert g2[0]["k_effective"] < 0.01
    assert g1[-1]["k_effective"] > 50.0


def test_unstrained_resistance_trace_nondecreasing(short_plan):
    rec = run_experiment(short_plan)
    for name in ("gauge1", "gauge2"):
        rs = [row["R_unstrained"] for row in rec.metadata["gauge_trace"][name]
              if row["R_unstrained"] is not None]
        assert all(b >= a - 1e-12 for a, b in zip(rs, rs[1:]))


def test_holds_do_not_affect_final_damage(preset_docs):
    doc_a = reduced_doc(preset_docs["short"], hold_s=4.0)
    doc_b = reduced_doc(preset_docs["short"], hold_s=0.0)
    rec_a = run_experiment(config.build_plan(doc_a, seed=5))
    rec_b = run_experiment(config.build_plan(doc_b, seed=5))
    for g in ("gauge1", "gauge2"):
        fa = rec_a.metadata["gauge_trace"][g][-1]
        fb = rec_b.metadata["gauge_trace"][g][-1]
        assert fa["broken_fraction"] == fb["broken_fraction"]
        assert fa["k_effective"] == fb["k_effective"]


def test_deflection_channel_is_linear_model(short_plan):
    rec = run_experiment(short_plan)
    ratio = rec.deflection / rec.force
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert rec.deflection.min() < 0  # downward


def test_open_circuit_marks_nan(preset_docs):
    doc = reduced_doc(preset_docs["short"])
    doc["sensing"]["matrix"] = "insulating"
    # steep strength distribution: survives the as-built state, fails under load
    doc["sensing"]["weibull_modulus"] = 40.0
    doc["sensing"]["weibull_scale"] = {"value": 400.0, "unit": "MPa"}
    doc["sensing"]["filament_count"] = 300
    plan = config.build_plan(doc, seed=3)
    rec = run_experiment(plan)
    assert rec.metadata["open_circuit"]["R1"]
    assert np.isnan(rec.R1[-1]) and np.isnan(rec.V1[-1])
    first_nan = int(np.flatnonzero(np.isnan(rec.R1))[0])
    assert np.all(np.isnan(rec.R1[first_nan:]))
    assert not np.isnan(rec.V1[: first_nan]).any()


def test_voltage_channels_follow_divider(short_plan):
    from cfsense.sensing import DividerConfig, divider_forward

    rec = run_experiment(short_plan)
    div = short_plan.dividers[0]
    i = rec.n_samples // 3
    assert rec.V1[i] == pytest.approx(divider_forward(rec.R1[i], div), rel=1e-12)


def test_disturbance_noise_and_drift(preset_docs):
    doc = reduced_doc(preset_docs["short"])
    doc["experiment"]["waveform"]["breakin_sets"] = []
    doc["experiment"]["orientations"] = ["initial"]
    doc["experiment"]["disturbance"] = {
        "enabled": True,
        "noise_ohm_conductive": {"value": 0.05, "unit": "ohm"},
        "noise_ohm_insulating": {"value": 0.5, "unit": "ohm"},
        "drift_ohm_per_cycle": {"value": 0.0, "unit": "ohm"},
        "first_peak_boost": 0.0,
        "first_peak_tau_cycles": 3.0,
    }
    plan = config.build_plan(doc, seed=21)
    rec = run_experiment(plan)
    clean = run_experiment(config.build_plan(
        {**doc, "experiment": {**doc["experiment"], "disturbance": None}}, seed=21))
    resid = rec.R1 - clean.R1
    assert 0.03 < np.std(resid) < 0.08  # about the configured amplitude


def test_orientation_metadata_spans(short_plan):
    rec = run_experiment(short_plan)
    segs = rec.metadata["segments"]
    initial = [s for s in segs if s["orientation"] == "initial"]
    flipped = [s for s in segs if s["orientation"] == "flipped"]
    assert len(initial) == len(flipped)
    assert initial[-1]["sample_end"] == flipped[0]["sample_start"]
    assert flipped[-1]["sample_end"] == rec.n_samples
