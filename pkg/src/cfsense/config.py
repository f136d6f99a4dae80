"""Configuration documents: schema, parsing, presets and merging.

One JSON document describes a sample and its experiment: top-level keys
``geometry``, ``materials``, ``sensing``, ``experiment`` (and optionally
``analysis``).  Physical entries are ``{"value": x, "unit": "..."}``
objects converted to SI at load time; counts, flags and enums are bare.
Unknown keys anywhere are an error, so a typo in a physics input cannot
silently fall back to a default.

Presets ``short``/``medium``/``tall`` ship as data files mirroring the
three printed sample heights; ``--config`` files merge on top of them
key by key.
"""

from __future__ import annotations

import json
from importlib import resources

from .errors import ConfigError
from .experiment import BreakinSet, Disturbance, ExperimentPlan, WaveformSpec
from .mechanics import Orientation
from .section import BeamGeometry, MaterialSet
from .sensing import DividerConfig, GaugeConfig, Matrix, baseline_resistance

PRESETS = ("short", "medium", "tall")

# field -> dimension for unit-tagged quantities; None marks bare values.
_GEOMETRY_FIELDS = {k: "length" for k in (
    "h_beam", "b_beam", "h_hollow", "b_hollow", "h_comp", "b_comp", "d_NA", "span_L",
)}
_MATERIAL_FIELDS = {
    "E_PETG": "pressure", "E_comp": "pressure", "E_fiber": "pressure", "E_PLA": "pressure",
    "alpha_PETG": "cte", "alpha_fiber": "cte",
    "T_ambient": "temperature", "T_comp": "temperature", "T_PETG": "temperature",
    "rho_fiber": "resistivity", "rho_matrix": "resistivity",
    "sigma_t_comp_tension": "pressure", "sigma_t_comp_compression": "pressure",
}
_SENSING_FIELDS = {
    "R0": "resistance",
    "k_intrinsic": None, "matrix": None, "filament_count": None,
    "filament_diameter": "length", "gauge_length": "length",
    "weibull_modulus": None, "weibull_scale": "pressure",
    "bridge_resistance_scale": "resistance", "crack_sensitivity": None,
    "matrix_bridge_resistance": "resistance", "matrix_crack_sensitivity": None,
    "disconnect_exponent": None, "coalescence_exponent": None,
    "stress_concentration_factor": None, "tension_damage_min_fraction": None,
    "crack_opening_asymmetry": None, "dividers": None,
}
_WAVEFORM_FIELDS = {
    "small_amplitude": "force", "small_cycles": None, "breakin_cycles_per_set": None,
    "breakin_sets": None, "hold_duration": "time", "cycle_frequency": "frequency",
    "force_floor": "force", "force_ceiling": "force",
}
_EXPERIMENT_FIELDS = {
    "waveform": None, "sample_rate": "frequency", "orientations": None,
    "seed": None, "disturbance": None,
}
_DISTURBANCE_FIELDS = {
    "enabled": None, "noise_ohm_conductive": "resistance",
    "noise_ohm_insulating": "resistance", "drift_ohm_per_cycle": "resistance",
    "first_peak_boost": None, "first_peak_tau_cycles": None,
}
_ANALYSIS_FIELDS = {"tolerance": None, "relative_strain": None}
_TOP_LEVEL = ("geometry", "materials", "sensing", "experiment", "analysis")


def _check_keys(node: dict, allowed, where: str) -> None:
    if not isinstance(node, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(node) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("cfsense.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path!r}: top level must be an object")
    return doc


def merge_documents(*docs: dict) -> dict:
    """Key-wise deep merge; later documents override earlier ones."""
    out: dict = {}
    for doc in docs:
        stack = [(out, doc)]
        while stack:
            dst, src = stack.pop()
            for key, val in src.items():
                if isinstance(val, dict) and isinstance(dst.get(key), dict) \
                        and "value" not in val:
                    stack.append((dst[key], val))
                else:
                    dst[key] = val
    return out


def resolve(preset: str | None, config_paths: list[str] | None = None) -> dict:
    """Assemble the effective document from a preset plus override files."""
    docs: list[dict] = []
    if preset is not None:
        docs.append(load_preset(preset))
    for path in config_paths or []:
        docs.append(load_config_file(path))
    if not docs:
        raise ConfigError("no configuration given: pass --preset and/or --config")
    doc = merge_documents(*docs)
    _check_keys(doc, _TOP_LEVEL, "config")
    return doc


def _parse_section(doc: dict, key: str, fields: dict) -> dict:
    from .units import parse_quantity

    if key not in doc:
        raise ConfigError(f"config: missing section {key!r}")
    node = doc[key]
    _check_keys(node, fields, key)
    out = {}
    for name, dimension in fields.items():
        if name not in node:
            continue
        value = node[name]
        if dimension is None or value is None:
            out[name] = value
        else:
            out[name] = parse_quantity(value, dimension, f"{key}.{name}")
    return out


def build_geometry(doc: dict) -> BeamGeometry:
    vals = _parse_section(doc, "geometry", _GEOMETRY_FIELDS)
    missing = set(_GEOMETRY_FIELDS) - set(vals)
    if missing:
        raise ConfigError(f"geometry: missing fields {sorted(missing)}")
    return BeamGeometry(**vals)


def build_materials(doc: dict) -> MaterialSet:
    vals = _parse_section(doc, "materials", _MATERIAL_FIELDS)
    missing = set(_MATERIAL_FIELDS) - set(vals)
    if missing:
        raise ConfigError(f"materials: missing fields {sorted(missing)}")
    return MaterialSet(**vals)


def build_gauge(doc: dict, materials: MaterialSet) -> GaugeConfig:
    vals = _parse_section(doc, "sensing", _SENSING_FIELDS)
    vals.pop("dividers", None)
    matrix = vals.pop("matrix", "conductive")
    try:
        matrix = Matrix(matrix)
    except ValueError:
        raise ConfigError(
            f"sensing.matrix must be one of {[m.value for m in Matrix]}, got {matrix!r}"
        ) from None
    if "filament_count" in vals:
        vals["filament_count"] = int(vals["filament_count"])
    R0 = vals.pop("R0", None)
    cfg = GaugeConfig(R0=1.0, matrix=matrix, **vals)
    if R0 is None:
        R0 = baseline_resistance(cfg, materials.rho_fiber)
    from dataclasses import replace

    return replace(cfg, R0=float(R0))


def build_dividers(doc: dict) -> tuple[DividerConfig, DividerConfig]:
    from .units import parse_quantity

    node = doc.get("sensing", {}).get("dividers")
    if node is None:
        raise ConfigError("sensing.dividers is required")
    _check_keys(node, ("R_div", "V_supply"), "sensing.dividers")
    rdivs = node.get("R_div")
    if not isinstance(rdivs, list) or len(rdivs) != 2:
        raise ConfigError("sensing.dividers.R_div must be a list of two resistances")
    vs = parse_quantity(node.get("V_supply"), "voltage", "sensing.dividers.V_supply")
    r = [parse_quantity(x, "resistance", "sensing.dividers.R_div") for x in rdivs]
    return DividerConfig(r[0], vs), DividerConfig(r[1], vs)


def build_waveform(doc: dict) -> WaveformSpec:
    from .units import parse_quantity

    exp = doc.get("experiment")
    if exp is None:
        raise ConfigError("config: missing section 'experiment'")
    _check_keys(exp, _EXPERIMENT_FIELDS, "experiment")
    node = exp.get("waveform")
    if node is None:
        raise ConfigError("experiment.waveform is required")
    _check_keys(node, _WAVEFORM_FIELDS, "experiment.waveform")
    vals = {}
    for name, dimension in _WAVEFORM_FIELDS.items():
        if name not in node or name == "breakin_sets":
            continue
        v = node[name]
        vals[name] = v if dimension is None else parse_quantity(v, dimension, name)
    for count_key in ("small_cycles", "breakin_cycles_per_set"):
        if count_key in vals:
            vals[count_key] = int(vals[count_key])
    sets = []
    for i, s in enumerate(node.get("breakin_sets", [])):
        _check_keys(s, ("offset", "amplitude"), f"breakin_sets[{i}]")
        sets.append(
            BreakinSet(
                offset=parse_quantity(s["offset"], "force", f"breakin_sets[{i}].offset"),
                amplitude=parse_quantity(s["amplitude"], "force", f"breakin_sets[{i}].amplitude"),
            )
        )
    return WaveformSpec(breakin_sets=tuple(sets), **vals)


def build_disturbance(doc: dict) -> Disturbance:
    from .units import parse_quantity

    node = doc.get("experiment", {}).get("disturbance")
    if node is None:
        return Disturbance()
    _check_keys(node, _DISTURBANCE_FIELDS, "experiment.disturbance")
    vals = {}
    for name, dimension in _DISTURBANCE_FIELDS.items():
        if name not in node:
            continue
        v = node[name]
        vals[name] = v if dimension is None else parse_quantity(v, dimension, name)
    return Disturbance(**vals)


def build_plan(doc: dict, seed: int | None = None) -> ExperimentPlan:
    """Materialize the full experiment plan; ``seed`` overrides the document."""
    from .units import parse_quantity

    geometry = build_geometry(doc)
    materials = build_materials(doc)
    gauge = build_gauge(doc, materials)
    dividers = build_dividers(doc)
    waveform = build_waveform(doc)
    exp = doc["experiment"]
    sample_rate = parse_quantity(
        exp.get("sample_rate", {"value": 100.0, "unit": "Hz"}), "frequency", "sample_rate"
    )
    orient_names = exp.get("orientations", ["initial", "flipped"])
    try:
        orientations = tuple(Orientation(o) for o in orient_names)
    except ValueError:
        raise ConfigError(f"bad orientation list {orient_names!r}") from None
    if seed is None:
        seed = exp.get("seed")
    if seed is not None:
        seed = int(seed)
    return ExperimentPlan(
        geometry=geometry,
        materials=materials,
        gauge=gauge,
        dividers=dividers,
        waveform=waveform,
        sample_rate=sample_rate,
        orientations=orientations,
        seed=seed,
        disturbance=build_disturbance(doc),
    )


def analysis_overrides(doc: dict) -> dict:
    node = doc.get("analysis")
    if node is None:
        return {}
    _check_keys(node, _ANALYSIS_FIELDS, "analysis")
    return dict(node)
