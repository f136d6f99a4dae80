import copy

import pytest

from cfsense import config


@pytest.fixture(scope="session")
def preset_docs():
    return {name: config.load_preset(name) for name in config.PRESETS}


@pytest.fixture(scope="session")
def short_parts(preset_docs):
    doc = preset_docs["short"]
    return config.build_geometry(doc), config.build_materials(doc)


@pytest.fixture(scope="session")
def all_parts(preset_docs):
    return {
        name: (config.build_geometry(doc), config.build_materials(doc))
        for name, doc in preset_docs.items()
    }


def reduced_doc(doc, *, small_cycles=6, breakin_cycles=4, hold_s=4.0, rate_hz=40.0):
    """Shrink a preset's waveform for fast tests; force peaks are unchanged,
    so the damage trajectory matches the full-size protocol."""
    d = copy.deepcopy(doc)
    wf = d["experiment"]["waveform"]
    wf["small_cycles"] = small_cycles
    wf["breakin_cycles_per_set"] = breakin_cycles
    wf["hold_duration"] = {"value": hold_s, "unit": "s"}
    d["experiment"]["sample_rate"] = {"value": rate_hz, "unit": "Hz"}
    return d


@pytest.fixture()
def short_reduced(preset_docs):
    return reduced_doc(preset_docs["short"])
