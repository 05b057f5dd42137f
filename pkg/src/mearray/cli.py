"""Command-line front end.

Exit status:

    0  success
    1  unexpected failure (solver or internal error)
    2  usage error (bad flags)
    3  config parse error
    4  config or input validation error
    5  degenerate geometry (receiver on an element or centroid)
    6  I/O failure
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels, rng
from .config import RunConfig, parse_config
from .errors import ConfigParseError, DegenerateGeometryError, MeArrayError, ValidationError
from .fieldcore import ArrayConfig, array_factor, intensity, mean_position
from .geometry import PerturbationSpec, perturb_layout
from .io import emit_csv, emit_heatmap, emit_pattern, fmt
from .phases import assign_family_phases, classify_interference
from .sweeps import SweepSpec, find_peaks, gain_pattern, sweep_k1k2, verify_deployment

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_GEOMETRY = 5
EXIT_IO = 6


def _metadata(cfg: RunConfig, **extra) -> dict:
    meta = {
        "mearray_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "rng": rng.NAME,
        "config": cfg.to_dict(),
    }
    meta.update(extra)
    return meta


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _nominal_config(cfg: RunConfig, array) -> ArrayConfig:
    pos = array.flat_positions
    if cfg.receiver is None:
        phases = np.zeros(len(pos))
    else:
        fam = cfg.family
        phases = assign_family_phases(
            array, fam.family(), fam.k1, fam.k2, cfg.receiver, cfg.omega, cfg.medium.c, fam.compensation
        )
    return ArrayConfig(pos, phases, cfg.f0, cfg.omega, cfg.k_el, cfg.medium)


def run_sweep(cfg: RunConfig, out: Path) -> dict:
    array = cfg.array.build()
    spec = SweepSpec(
        tuple(cfg.sweep.k1_range), tuple(cfg.sweep.k2_range), cfg.family.family(), array,
        cfg.receiver, cfg.omega, cfg.family.compensation, cfg.units, cfg.f0, cfg.k_el, cfg.medium,
    )
    t0 = time.perf_counter()
    m = sweep_k1k2(spec, workers=cfg.sweep.workers)
    elapsed = time.perf_counter() - t0
    peaks = find_peaks(m, cfg.sweep.min_prominence_fraction)
    meta = _metadata(cfg)

    csv_path = emit_csv(m, out / "sweep.csv")
    _write_json(out / "sweep.csv.meta.json", meta)
    emit_heatmap(m, out / "sweep.ppm", cfg.scale, meta)
    with open(out / "peaks.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k1", "k2", "value", "regime"])
        for p in peaks:
            w.writerow([fmt(p.k1), fmt(p.k2), fmt(p.value), p.regime.regime.value if p.regime else ""])
    summary = {
        "workflow": "sweep",
        "grid": [m.k1_axis.size, m.k2_axis.size],
        "max_value": float(m.values.max()),
        "n_peaks": len(peaks),
        "seconds": elapsed,
        "artifacts": [csv_path.name, "sweep.ppm", "peaks.csv"],
    }
    _write_json(out / "run.json", {**meta, "summary": summary})
    return summary


def run_optimize(cfg: RunConfig, out: Path) -> dict:
    array = cfg.array.build()
    nominal = _nominal_config(cfg, array)
    af = array_factor(nominal, cfg.receiver)
    n = nominal.n_elements
    report = classify_interference(min(af, n * n), n)
    ll, mm = array.indices
    with open(out / "phases.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["l", "m", "x", "y", "z", "phase_rad"])
        for l, m, p, ph in zip(ll, mm, nominal.positions, nominal.phases):
            w.writerow([int(l), int(m), fmt(p[0]), fmt(p[1]), fmt(p[2]), fmt(ph)])
    meta = _metadata(cfg)
    _write_json(out / "phases.csv.meta.json", meta)
    summary = {
        "workflow": "optimize",
        "n_elements": n,
        "array_factor": af,
        "af_ratio": af / (n * n),
        "regime": report.regime.value,
        "intensity_si": intensity(nominal, cfg.receiver),
        "artifacts": ["phases.csv"],
    }
    _write_json(out / "run.json", {**meta, "summary": summary})
    return summary


def run_pattern(cfg: RunConfig, out: Path) -> dict:
    array = cfg.array.build()
    nominal = _nominal_config(cfg, array)
    radius = cfg.pattern.radius
    if radius is None:
        radius = 1.0 if cfg.receiver is None else float(np.linalg.norm(np.asarray(cfg.receiver) - mean_position(nominal)))
    meta = _metadata(cfg)
    artifacts, far = [], True
    for i, plane in enumerate(cfg.pattern.planes):
        p = gain_pattern(nominal, plane, radius, cfg.pattern.n_samples)
        far = far and p.far_field
        name = f"pattern_{plane}.csv" if isinstance(plane, str) else f"pattern_{i}.csv"
        emit_pattern(p, out / name, meta)
        artifacts.append(name)
    summary = {"workflow": "pattern", "radius": radius, "far_field": far, "artifacts": artifacts}
    _write_json(out / "run.json", {**meta, "summary": summary})
    return summary


def run_verify(cfg: RunConfig, out: Path) -> dict:
    array = cfg.array.build()
    nominal = _nominal_config(cfg, array)
    v = cfg.verify
    records = []
    for k in range(v.n_seeds):
        pert = PerturbationSpec(v.radial_scale, v.axial_tilt, v.jitter_sigma, cfg.seed + k)
        actual = perturb_layout(array, pert)
        chk = verify_deployment(nominal, actual, cfg.receiver, v.pass_fraction)
        records.append({"seed": cfg.seed + k, "passed": chk.passed, "af_ratio": chk.af_ratio})
    ratios = [r["af_ratio"] for r in records]
    summary = {
        "workflow": "verify",
        "n_elements": nominal.n_elements,
        "mean_af_ratio": float(np.mean(ratios)),
        "pass_rate": float(np.mean([r["passed"] for r in records])),
        "records": records,
    }
    meta = _metadata(cfg)
    _write_json(out / "verify.json", {**meta, "summary": summary})
    return summary


WORKFLOW_RUNNERS = {
    "sweep": run_sweep,
    "optimize": run_optimize,
    "pattern": run_pattern,
    "verify": run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mearray", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="workflow", required=True)
    for name in WORKFLOW_RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} workflow")
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--scale", choices=["linear", "log10"], help="heatmap scale")
        p.add_argument("--units", choices=["af", "si"], help="array factor or SI intensity")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, workflow=args.workflow)
        if args.out:
            cfg.output_dir = args.out
        if args.scale:
            cfg.scale = args.scale
        if args.units:
            cfg.units = args.units
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary = WORKFLOW_RUNNERS[cfg.workflow](cfg, out)
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateGeometryError as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MeArrayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(json.dumps({k: v for k, v in summary.items() if k != "records"}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
