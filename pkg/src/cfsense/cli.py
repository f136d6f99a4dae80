"""Command-line interface.

Subcommands: ``section``, ``bend``, ``thermal`` (closed-form reports),
``simulate`` (forward run to CSV + metadata sidecar), ``analyze``
(inverse pipeline to a JSON report, optionally SVG plots) and
``reproduce`` (validation against the published reference values for the
three sample heights).

Exit codes: 0 success, 1 reproduce validation failure, 2 usage or
configuration error, 3 physics/model error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis as ana
from . import config as cfg
from . import mechanics, plots, record, section
from .errors import ConfigError, PhysicsError, RecordError
from .experiment import run_experiment

# Published reference stress values (MPa) and peak test force (N) per
# sample height; tolerances: loading 5 %, thermal 10 %, total combined.
REFERENCE_STRESSES = {
    "short": {"P": 62.0, "load": -488.0, "therm": -203.0, "total": -691.0},
    "medium": {"P": 70.0, "load": -351.0, "therm": -210.0, "total": -561.0},
    "tall": {"P": 70.0, "load": -251.0, "therm": -217.0, "total": -468.0},
}
LOAD_TOL, THERM_TOL = 0.05, 0.10


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", action="append", default=[], metavar="PATH",
                   help="JSON config file; repeatable, later files override earlier")
    p.add_argument("--preset", choices=cfg.PRESETS, help="built-in sample preset")
    p.add_argument("--out", metavar="PATH", help="output file path")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="json")
    p.add_argument("--seed", type=int, help="64-bit unsigned RNG seed")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfsense", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("section", "transformed-section properties"),
        ("thermal", "residual thermal stress"),
    ):
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp)

    sp = sub.add_parser("bend", help="three-point-bending response")
    _add_common(sp)
    sp.add_argument("--force", type=float, required=True, metavar="N")

    sp = sub.add_parser("simulate", help="run the break-in experiment")
    _add_common(sp)
    sp.add_argument("--plan", metavar="PATH",
                    help="extra config file merged last (experiment overrides)")

    sp = sub.add_parser("analyze", help="extract gauge factors from a record")
    _add_common(sp)
    sp.add_argument("--in", dest="infile", required=True, metavar="CSV")

    sp = sub.add_parser("reproduce", help="validate against reference values")
    _add_common(sp)
    sp.add_argument("target", choices=("table3", "table4-trends"))
    return p


def _resolve(args) -> dict:
    return cfg.resolve(args.preset, args.config)


def _emit(args, payload: dict, text: str) -> None:
    if args.out:
        if args.format == "json":
            with open(args.out, "w") as fh:
                json.dump(payload, fh, indent=1, sort_keys=True)
                fh.write("\n")
        else:
            with open(args.out, "w") as fh:
                fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_section(args) -> int:
    doc = _resolve(args)
    geom = cfg.build_geometry(doc)
    mat = cfg.build_materials(doc)
    sec = section.section_properties(geom, mat)
    payload = {
        "n": sec.n,
        "A_comp_m2": sec.A_comp,
        "A_PETG_m2": sec.A_PETG,
        "J_beam_m4": sec.J_beam,
        "J_beam_mm4": sec.J_beam * 1e12,
    }
    text = (
        f"n (E_comp/E_PETG)   : {sec.n:.4f}\n"
        f"A_comp (one line)   : {sec.A_comp * 1e6:.4f} mm^2\n"
        f"A_PETG              : {sec.A_PETG * 1e6:.4f} mm^2\n"
        f"J_beam              : {sec.J_beam * 1e12:.4f} mm^4\n"
    )
    _emit(args, payload, text)
    return 0


def cmd_bend(args) -> int:
    doc = _resolve(args)
    geom = cfg.build_geometry(doc)
    mat = cfg.build_materials(doc)
    bending = mechanics.bend(geom, mat, mechanics.LoadCase(P=args.force))
    thermal = mechanics.residual_thermal_stress(geom, mat)
    gauges = {}
    for g in mechanics.GAUGES:
        total, band = mechanics.total_fiber_stress(bending, thermal, mat, g)
        gauges[f"gauge{g}"] = {
            "strain": bending.gauge_strain[g],
            "avg_strain": bending.gauge_strain[g] / 2.0,
            "sigma_total_MPa": total / 1e6,
            "band": band.value,
        }
    payload = {
        "P_N": args.force,
        "M_Nm": bending.M,
        "y_max_mm": bending.y_max * 1e3,
        "eps_max": bending.eps_max,
        "eps_avg": bending.eps_avg,
        "sigma_fiber_max_MPa": bending.sigma_fiber_max / 1e6,
        **gauges,
    }
    lines = [
        f"P = {args.force:g} N: M = {bending.M:.6g} N.m, "
        f"y_max = {bending.y_max * 1e3:.6g} mm",
        f"eps_max = {bending.eps_max:.6g}  eps_avg = {bending.eps_avg:.6g}",
        f"sigma_fiber_max = {bending.sigma_fiber_max / 1e6:.6g} MPa",
    ]
    for g in mechanics.GAUGES:
        info = gauges[f"gauge{g}"]
        lines.append(
            f"gauge {g}: strain = {info['strain']:.6g}, total stress = "
            f"{info['sigma_total_MPa']:.6g} MPa ({info['band']})"
        )
    _emit(args, payload, "\n".join(lines) + "\n")
    return 0


def cmd_thermal(args) -> int:
    doc = _resolve(args)
    geom = cfg.build_geometry(doc)
    mat = cfg.build_materials(doc)
    th = mechanics.residual_thermal_stress(geom, mat)
    payload = {
        "sigma_therm_MPa": th.sigma_therm / 1e6,
        "dT_comp_K": th.dT_comp,
        "dT_PETG_K": th.dT_PETG,
    }
    text = (
        f"sigma_therm = {th.sigma_therm / 1e6:.4f} MPa "
        f"(dT_comp = {th.dT_comp:g} K, dT_PETG = {th.dT_PETG:g} K)\n"
    )
    _emit(args, payload, text)
    return 0


def cmd_simulate(args) -> int:
    paths = list(args.config) + ([args.plan] if args.plan else [])
    doc = cfg.resolve(args.preset, paths)
    plan = cfg.build_plan(doc, seed=args.seed)
    if plan.seed is None:
        raise ConfigError("simulate needs --seed (or experiment.seed in the config)")
    rec = run_experiment(plan)
    out = args.out or "experiment.csv"
    record.write_record(rec, out)
    print(f"wrote {rec.n_samples} samples to {out} (+ {record.meta_path_for(out)})")
    return 0


def _params_from_doc(doc: dict) -> ana.AnalysisParams:
    """Analysis parameters for records without a metadata sidecar."""
    wf = cfg.build_waveform(doc)
    dividers = cfg.build_dividers(doc)
    overrides = cfg.analysis_overrides(doc)
    return ana.AnalysisParams(
        force_floor=wf.force_floor,
        small_amplitude=wf.small_amplitude,
        cycle_frequency=wf.cycle_frequency,
        dividers=dividers,
        **overrides,
    )


def cmd_analyze(args) -> int:
    rec = record.parse_record(args.infile)
    doc = cfg.resolve(args.preset, args.config) if (args.preset or args.config) else None
    if doc is not None:
        geom = cfg.build_geometry(doc)
        mat = cfg.build_materials(doc)
    elif rec.metadata.get("plan"):
        plan_doc = rec.metadata["plan"]
        geom = section.BeamGeometry(**plan_doc["geometry"])
        mat = section.MaterialSet(**plan_doc["materials"])
    else:
        raise ConfigError("analyze needs --preset/--config or a record metadata sidecar")
    if rec.metadata.get("plan"):
        overrides = cfg.analysis_overrides(doc) if doc is not None else {}
        params = ana.AnalysisParams.from_metadata(rec.metadata, **overrides)
    elif doc is not None:
        params = _params_from_doc(doc)
    else:
        raise ConfigError(
            "record has no metadata sidecar; pass --preset/--config with the "
            "experiment parameters used for the recording"
        )
    report = ana.analyze_record(rec, geom, mat, params)
    if args.format == "svg":
        out = args.out or "report.svg"
        with open(out, "w") as fh:
            fh.write(plots.report_svg(report))
        windows_out = out[:-4] + "_windows.svg" if out.endswith(".svg") else out + ".windows.svg"
        with open(windows_out, "w") as fh:
            fh.write(_window_fits_svg(rec, geom, report, params))
        print(f"wrote {out} and {windows_out}")
        return 0
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _window_fits_svg(rec, geom, report: dict, params: ana.AnalysisParams) -> str:
    """Per-window resistance-vs-strain panels with their fitted lines."""
    eps_max = ana.strain_from_deflection(rec.deflection, geom)
    windows = {w["index"]: w for w in report["windows"]}
    panels = []
    for f in report["fits"]:
        w = windows[f["window"]]
        sl = slice(w["sample_start"], w["sample_end"])
        eps = ana.gauge_average_strain(
            eps_max[sl], f["gauge"], mechanics.Orientation(w["orientation"])
        )
        if params.relative_strain:
            eps = eps - eps.mean()
        R = getattr(rec, f"R{f['gauge']}")[sl]
        title = f"window {f['window']} gauge {f['gauge']} ({w['orientation']})"
        panels.append(
            plots.window_fit_panel(eps, R, f["k"], f["R0_fit"], title)
        )
    return plots.svg_document(panels, per_row=2)


def _reproduce_table3(args) -> int:
    rows = []
    failures = 0
    lines = [
        f"{'sample':8} {'quantity':10} {'reference':>10} {'computed':>10} "
        f"{'dev %':>7}  result"
    ]
    for name in cfg.PRESETS:
        doc = cfg.resolve(name, args.config)
        geom = cfg.build_geometry(doc)
        mat = cfg.build_materials(doc)
        ref = REFERENCE_STRESSES[name]
        bending = mechanics.bend(geom, mat, mechanics.LoadCase(P=ref["P"]))
        thermal = mechanics.residual_thermal_stress(geom, mat)
        total, band = mechanics.total_fiber_stress(bending, thermal, mat, gauge=1)
        load_mpa = bending.sigma_fiber_max / 1e6
        therm_mpa = thermal.sigma_therm / 1e6
        total_mpa = total / 1e6
        checks = [
            ("load", ref["load"], load_mpa, LOAD_TOL * abs(ref["load"])),
            ("thermal", ref["therm"], therm_mpa, THERM_TOL * abs(ref["therm"])),
            ("total", ref["total"], total_mpa,
             LOAD_TOL * abs(ref["load"]) + THERM_TOL * abs(ref["therm"])),
        ]
        for qty, expected, got, budget in checks:
            ok = abs(got - expected) <= budget
            failures += 0 if ok else 1
            lines.append(
                f"{name:8} {qty:10} {expected:10.1f} {got:10.1f} "
                f"{100 * (got - expected) / abs(expected):7.2f}  "
                + ("PASS" if ok else "FAIL")
            )
        band_ok = band is mechanics.FailureBand.COMPRESSIVE_YIELD
        failures += 0 if band_ok else 1
        lines.append(f"{name:8} {'band':10} {'comp.yield':>10} {band.value:>10} "
                     f"{'':7}  " + ("PASS" if band_ok else "FAIL"))
        rows.append(
            {
                "height_mm": geom.h_beam * 1e3,
                "sigma_load_MPa": load_mpa,
                "sigma_therm_MPa": therm_mpa,
                "sigma_total_MPa": total_mpa,
            }
        )
    print("\n".join(lines))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write("height_mm,sigma_load_MPa,sigma_therm_MPa,sigma_total_MPa\n")
            for r in rows:
                fh.write(
                    f"{r['height_mm']:.9g},{r['sigma_load_MPa']:.9g},"
                    f"{r['sigma_therm_MPa']:.9g},{r['sigma_total_MPa']:.9g}\n"
                )
        print(f"wrote {args.out}")
    print("table3:", "PASS" if failures == 0 else f"FAIL ({failures} checks)")
    return 0 if failures == 0 else 1


def _peak_k(report: dict, gauge: int) -> float:
    ks = [f["k"] for f in report["fits"] if f["gauge"] == gauge]
    return max(ks) if ks else float("nan")


def _reproduce_table4(args) -> int:
    if args.seed is None:
        raise ConfigError("reproduce table4-trends needs --seed")
    reports = {}
    for name in cfg.PRESETS:
        doc = cfg.resolve(name, args.config)
        plan = cfg.build_plan(doc, seed=args.seed)
        rec = run_experiment(plan)
        params = ana.AnalysisParams.from_metadata(rec.metadata)
        reports[name] = ana.analyze_record(rec, plan.geometry, plan.materials, params)

    failures = 0
    lines = []

    def check(label: str, ok: bool) -> None:
        nonlocal failures
        failures += 0 if ok else 1
        lines.append(f"{label}: " + ("PASS" if ok else "FAIL"))

    peaks = {n: max(_peak_k(r, 1), _peak_k(r, 2)) for n, r in reports.items()}
    lines.append(
        "peak gauge factor: "
        + ", ".join(f"{n}={peaks[n]:.1f}" for n in cfg.PRESETS)
    )
    check("short peak sensitivity >= 100", peaks["short"] >= 100.0)
    check(
        "sensitivity decreases with beam height",
        peaks["short"] > peaks["medium"] > peaks["tall"],
    )

    short = reports["short"]
    init_fits = {
        f["window"]: f["k"]
        for f in short["fits"]
        if f["gauge"] == 2 and f["window"] < len(short["windows"]) // 2
    }
    ks2 = list(init_fits.values())
    check(
        "initial orientation: tension gauge stays flat",
        bool(ks2) and max(abs(k) for k in ks2) < 1.0,
    )
    g1_flip = next(
        (
            c["points"]
            for c in short["breakin_curves"]
            if c["gauge"] == 1 and c["orientation"] == "flipped"
        ),
        [],
    )
    ks = [p["k"] for p in g1_flip]
    rose_fell = bool(ks) and ks.index(max(ks)) < len(ks) - 1 and ks[-1] < max(ks)
    check("flipped orientation: sensitivity rises then falls", rose_fell)

    print("\n".join(lines))
    print("table4-trends:", "PASS" if failures == 0 else f"FAIL ({failures} checks)")
    return 0 if failures == 0 else 1


def cmd_reproduce(args) -> int:
    if args.target == "table3":
        return _reproduce_table3(args)
    return _reproduce_table4(args)


_COMMANDS = {
    "section": cmd_section,
    "bend": cmd_bend,
    "thermal": cmd_thermal,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PhysicsError, RecordError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
