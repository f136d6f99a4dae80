"""Command-line interface: subcommands, exit codes, determinism."""

import json

import pytest

from cfsense.cli import main

from conftest import reduced_doc


@pytest.fixture()
def fast_config(preset_docs, tmp_path):
    """Override file shrinking the waveform for quick CLI runs."""
    doc = reduced_doc(preset_docs["short"])
    override = {"experiment": doc["experiment"]}
    path = tmp_path / "fast.json"
    path.write_text(json.dumps(override))
    return str(path)


def test_section_command(capsys):
    assert main(["section", "--preset", "short"]) == 0
    out = capsys.readouterr().out
    assert "31.44" in out and "287.0" in out


def test_thermal_command(capsys):
    assert main(["thermal", "--preset", "tall"]) == 0
    assert "-198.83" in capsys.readouterr().out


def test_bend_command(capsys):
    assert main(["bend", "--preset", "short", "--force", "62"]) == 0
    out = capsys.readouterr().out
    assert "compressive_yield" in out


def test_bend_zero_force_all_zero(capsys):
    assert main(["bend", "--preset", "short", "--force", "0"]) == 0
    out = capsys.readouterr().out
    assert "eps_max = 0" in out and "y_max = 0" in out


def test_section_json_out(tmp_path, capsys):
    out = tmp_path / "sec.json"
    assert main(["section", "--preset", "medium", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["J_beam_mm4"] == pytest.approx(621.812, rel=1e-4)


def test_simulate_then_analyze(tmp_path, fast_config, capsys):
    csv = tmp_path / "run.csv"
    assert main([
        "simulate", "--preset", "short", "--config", fast_config,
        "--seed", "42", "--out", str(csv),
    ]) == 0
    report = tmp_path / "report.json"
    assert main(["analyze", "--in", str(csv), "--out", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert len(rep["windows"]) == 12
    svg = tmp_path / "plots.svg"
    assert main([
        "analyze", "--in", str(csv), "--format", "svg", "--out", str(svg),
    ]) == 0
    assert svg.read_text().startswith("<svg")


def test_simulate_deterministic_bytes(tmp_path, fast_config):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main([
            "simulate", "--preset", "short", "--config", fast_config,
            "--seed", "7", "--out", str(path),
        ]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.meta.json").read_bytes() == (tmp_path / "b.meta.json").read_bytes()


def test_svg_bytes_deterministic(tmp_path, fast_config):
    csv = tmp_path / "run.csv"
    main(["simulate", "--preset", "short", "--config", fast_config,
          "--seed", "42", "--out", str(csv)])
    svgs = []
    for name in ("p1.svg", "p2.svg"):
        out = tmp_path / name
        assert main(["analyze", "--in", str(csv), "--format", "svg", "--out", str(out)]) == 0
        svgs.append(out.read_bytes())
    assert svgs[0] == svgs[1]


def test_reproduce_table3_passes(capsys, tmp_path):
    out = tmp_path / "table3.csv"
    assert main(["reproduce", "table3", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.count("PASS") >= 12  # 3 samples x (load, thermal, total, band)
    assert "FAIL" not in text
    lines = out.read_text().splitlines()
    assert lines[0] == "height_mm,sigma_load_MPa,sigma_therm_MPa,sigma_total_MPa"
    assert len(lines) == 4


def test_simulate_without_seed_is_usage_error(tmp_path, fast_config, capsys):
    code = main(["simulate", "--preset", "short", "--config", fast_config,
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_missing_config_is_usage_error(capsys):
    assert main(["section"]) == 2


def test_bad_config_file_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["section", "--config", str(bad)]) == 2


def test_physics_error_exit_code(tmp_path, capsys):
    # composite line outside the section: a model-level rejection
    bad = tmp_path / "impossible.json"
    bad.write_text(json.dumps({"geometry": {"d_NA": {"value": 3.0, "unit": "mm"}}}))
    assert main(["section", "--preset", "short", "--config", str(bad)]) == 3


def test_unknown_key_rejected(tmp_path, capsys):
    bad = tmp_path / "typo.json"
    bad.write_text(json.dumps({"geometry": {"span_l": {"value": 114, "unit": "mm"}}}))
    assert main(["section", "--preset", "short", "--config", str(bad)]) == 2
