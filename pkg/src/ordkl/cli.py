"""Command-line entry point: run configuration, dispatch, and deterministic
CSV/JSON serialization of every result.

All kicking strengths cross this boundary in multiples of pi, matching the
axes of the phase diagrams; conversion to radians happens on load.  Output
files are byte-stable for identical configurations: sorted JSON keys, fixed
12-significant-digit float formatting, fixed column orders, and worker-count
independent payloads.  Wall-clock timing is reported on stderr only so it
never perturbs the files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dynamics import mcd_invariants
from .errors import ConfigError, ModelError
from .lattice import (
    LatticeSpec,
    combined_eigenphases,
    corner_census_2d,
    corner_mode_density,
    max_spectral_gap,
    solve_chain,
    wrap_to_pi,
)
from .model import PI, KickParams, boundary_residuals
from .validate import run_property_suite
from .winding import DEFAULT_GRID, phase_diagram, sweep_invariants

SCHEMA_VERSION = "1"

COMMANDS = ("phase-diagram", "spectrum", "corners", "mcd", "boundaries", "validate")

GRID_CSV_COLUMNS = ("axis1", "axis2", "w0x", "wpix", "w0y", "wpiy",
                    "w0", "wpi", "boundary_flag")

#: density cells below this probability are pruned from CSV output.
DENSITY_PRUNE = 1e-12


def fmt(value) -> str:
    """Fixed 12-significant-digit float formatting."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _canonical(obj):
    """Round floats and orderable structures for byte-stable JSON."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt(float(obj)))
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    return obj


@dataclass
class RunConfig:
    """Validated run configuration; strengths are stored in pi units."""

    command: str
    k1: float = 0.5
    k2: float = 0.5
    k3: float = 0.5
    k4: float = 0.5
    size: int = 300
    tmax: int = 50
    grid: tuple[int, int] = (64, 64)
    scan_axes: tuple[str, str] = ("k2", "k4")
    scan_ranges: tuple[tuple[float, float], tuple[float, float]] = ((0.05, 5.0), (0.05, 5.0))
    sweep_axis: str = ""
    sweep_range: tuple[float, float] = (0.05, 4.95)
    sweep_samples: int = 0
    theta_points: int = DEFAULT_GRID
    e_tol: float = 1e-6
    boundary_tol: float = 1e-9
    workers: int | None = None
    formats: tuple[str, ...] = ("csv", "json")
    out_dir: Path = Path("out")
    seed: int = 0

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("k1", "k2", "k3", "k4"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0 (in units of pi)")
        if self.size % 2 != 0 or self.size < 8:
            raise ConfigError("size must be even and at least 8")
        if self.tmax < 1:
            raise ConfigError("tmax must be positive")
        if min(self.grid) < 2:
            raise ConfigError("grid resolution must be at least 2 per axis")
        for lo, hi in self.scan_ranges:
            if not (hi > lo >= 0):
                raise ConfigError("scan ranges must be non-empty and non-negative")
        if self.sweep_samples and self.sweep_axis not in ("k1", "k2", "k3", "k4"):
            raise ConfigError("sweep axis must be one of k1..k4")
        if self.theta_points < 8:
            raise ConfigError("theta_points must be at least 8")
        if self.e_tol <= 0 or self.boundary_tol <= 0:
            raise ConfigError("tolerances must be positive")
        unknown = set(self.formats) - {"csv", "json"}
        if unknown:
            raise ConfigError(f"unknown output formats: {sorted(unknown)}")

    def params(self) -> KickParams:
        return KickParams.from_pi_units(self.k1, self.k2, self.k3, self.k4)

    def echo(self) -> dict:
        data = {
            "command": self.command,
            "k1": self.k1, "k2": self.k2, "k3": self.k3, "k4": self.k4,
            "size": self.size, "tmax": self.tmax,
            "grid": list(self.grid),
            "scan_axes": list(self.scan_axes),
            "scan_ranges": [list(r) for r in self.scan_ranges],
            "sweep_axis": self.sweep_axis,
            "sweep_range": list(self.sweep_range),
            "sweep_samples": self.sweep_samples,
            "theta_points": self.theta_points,
            "e_tol": self.e_tol,
            "boundary_tol": self.boundary_tol,
            "formats": list(self.formats),
            "seed": self.seed,
        }
        return data


@dataclass
class ResultEnvelope:
    """Everything one run produced, plus the exact configuration behind it."""

    schema_version: str
    command: str
    config: dict
    payload: dict
    warnings: list = field(default_factory=list)
    files: list = field(default_factory=list)
    elapsed_s: float = 0.0  # reported on stderr, never serialized


def emit_json(envelope: ResultEnvelope, path: Path) -> None:
    """Byte-stable JSON envelope (timing excluded by contract)."""
    body = {
        "schema_version": envelope.schema_version,
        "command": envelope.command,
        "config": _canonical(envelope.config),
        "payload": _canonical(envelope.payload),
        "warnings": _canonical(envelope.warnings),
        "files": sorted(str(f) for f in envelope.files),
    }
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def emit_csv(columns, rows, path: Path) -> None:
    """Byte-stable CSV with a schema marker comment line."""
    lines = [f"# schema_version={SCHEMA_VERSION}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _grid_rows(diagram):
    rows = []
    for i1, v1 in enumerate(diagram.values_1):
        for i2, v2 in enumerate(diagram.values_2):
            cell = diagram.cell(i1, i2)
            if cell.invariants is None:
                inv = ("", "", "", "", "", "")
                flag = "1"
            else:
                s = cell.invariants
                inv = tuple(str(v) for v in (s.w0x, s.wpix, s.w0y, s.wpiy, s.w0, s.wpi))
                flag = "0"
            rows.append((fmt(v1), fmt(v2)) + inv + (flag,))
    return rows


def _run_phase_diagram(config: RunConfig, out: Path):
    params = config.params()
    ranges_rad = tuple((lo * PI, hi * PI) for lo, hi in config.scan_ranges)
    diagram = phase_diagram(
        params, config.scan_axes, ranges_rad, config.grid,
        grid_size=config.theta_points, workers=config.workers,
    )
    # axis values are emitted back in pi units
    diagram.values_1 = diagram.values_1 / PI
    diagram.values_2 = diagram.values_2 / PI
    warnings = []
    for i1 in range(len(diagram.values_1)):
        for i2 in range(len(diagram.values_2)):
            cell = diagram.cell(i1, i2)
            if cell.boundary:
                witness = [
                    {"axis": w.axis, "m_sin": w.m_sin, "m_cos": w.m_cos,
                     "residual": w.residual}
                    for w in cell.witnesses
                ]
                warnings.append({
                    "kind": "boundary-cell", "i1": i1, "i2": i2,
                    "axis1": float(diagram.values_1[i1]),
                    "axis2": float(diagram.values_2[i2]),
                    "reason": cell.reason, "witnesses": witness,
                })
    payload = {
        "kind": "phase-diagram",
        "axes": list(config.scan_axes),
        "shape": list(config.grid),
        "boundary_cells": sum(1 for w in warnings if w["kind"] == "boundary-cell"),
    }
    files = {}
    if "csv" in config.formats:
        files[out / "phase_diagram.csv"] = (GRID_CSV_COLUMNS, _grid_rows(diagram))
    return payload, warnings, files


def _run_boundaries(config: RunConfig, out: Path):
    """Gap-closure certificate residuals over the scan plane.

    Every cell is emitted with its best integer certificate per axis; the
    on_boundary flag applies the configured tolerance so renderers can both
    contour the residual field and mark exact closures.
    """
    n1, n2 = config.grid
    values_1 = np.linspace(*config.scan_ranges[0], n1)
    values_2 = np.linspace(*config.scan_ranges[1], n2)
    rows = []
    hits = 0
    for v1 in values_1:
        for v2 in values_2:
            quoted = {
                "k1": config.k1, "k2": config.k2, "k3": config.k3, "k4": config.k4,
                config.scan_axes[0]: float(v1), config.scan_axes[1]: float(v2),
            }
            point = KickParams.from_pi_units(**quoted)
            cell_hit = False
            for w in boundary_residuals(point):
                on_line = w.residual <= config.boundary_tol
                cell_hit = cell_hit or on_line
                rows.append((fmt(v1), fmt(v2), w.axis, str(w.m_sin),
                             str(w.m_cos), fmt(w.residual),
                             "1" if on_line else "0"))
            hits += int(cell_hit)
    payload = {"kind": "boundaries", "axes": list(config.scan_axes),
               "hits": hits}
    files = {}
    if "csv" in config.formats:
        files[out / "boundaries.csv"] = (
            ("axis1", "axis2", "axis", "m_sin", "m_cos", "residual",
             "on_boundary"), rows)
    return payload, [], files


def _run_spectrum(config: RunConfig, out: Path):
    params = config.params()
    spec = LatticeSpec.square(config.size)
    spec_x = solve_chain(params, "x", spec.lx)
    spec_y = solve_chain(params, "y", spec.ly)
    files = {}
    if "csv" in config.formats:
        for axis, spectrum in (("x", spec_x), ("y", spec_y)):
            rows = [
                (str(i), fmt(spectrum.eigenphases[i]), fmt(spectrum.ipr[i]),
                 spectrum.labels[i])
                for i in range(spectrum.size)
            ]
            files[out / f"spectrum_{axis}.csv"] = (
                ("index", "eigenphase", "ipr", "label"), rows)
        e2 = wrap_to_pi(np.add.outer(spec_x.eigenphases, spec_y.eigenphases)).ravel()
        ipr2 = np.multiply.outer(spec_x.ipr, spec_y.ipr).ravel()
        order = np.argsort(e2, kind="stable")
        rows2 = [
            (str(i), fmt(e2[j]), fmt(ipr2[j])) for i, j in enumerate(order)
        ]
        files[out / "spectrum_2d.csv"] = (("index", "eigenphase", "ipr"), rows2)
    combined = combined_eigenphases(spec_x, spec_y)
    payload = {
        "kind": "spectrum",
        "size": config.size,
        "max_gap_2d": max_spectral_gap(combined),
        "median_ipr": {"x": float(np.median(spec_x.ipr)),
                       "y": float(np.median(spec_y.ipr))},
    }
    return payload, [], files


def _census_payload(census):
    return {
        "n0": census.n0,
        "npi": census.n_pi,
        "per_corner": census.per_corner,
        "invariant_check": census.invariant_check,
        "direct_n0": census.direct_n0,
        "direct_npi": census.direct_n_pi,
        "w0": census.w0,
        "wpi": census.wpi,
    }


def _run_corners(config: RunConfig, out: Path):
    params = config.params()
    spec = LatticeSpec.square(config.size)
    files = {}
    warnings = []
    if config.sweep_samples:
        values = np.linspace(*config.sweep_range, config.sweep_samples)
        rows = []
        for v in values:
            quoted = {"k1": config.k1, "k2": config.k2, "k3": config.k3,
                      "k4": config.k4, config.sweep_axis: float(v)}
            point = KickParams.from_pi_units(**quoted)
            try:
                census = corner_census_2d(point, spec, e_tol=config.e_tol,
                                          grid_size=config.theta_points)
                rows.append((fmt(v), str(census.n0), str(census.n_pi),
                             str(census.w0), str(census.wpi),
                             "1" if census.invariant_check else "0", "0"))
                warnings.extend(census.warnings)
            except ModelError as err:
                rows.append((fmt(v), "", "", "", "", "", "1"))
                warnings.append({"kind": "boundary-sample", "value": float(v),
                                 "reason": type(err).__name__})
        payload = {"kind": "corner-sweep", "axis": config.sweep_axis,
                   "samples": config.sweep_samples}
        if "csv" in config.formats:
            files[out / "census_sweep.csv"] = (
                ("value", "n0", "npi", "w0", "wpi", "invariant_check",
                 "boundary_flag"), rows)
        return payload, warnings, files
    census = corner_census_2d(params, spec, e_tol=config.e_tol,
                              grid_size=config.theta_points)
    warnings.extend(census.warnings)
    payload = {"kind": "corners", "size": config.size, **_census_payload(census)}
    if "csv" in config.formats:
        rows = []
        for sector in ("zero", "pi"):
            if not census.pairs.get(sector):
                continue
            for mode_id, dmap in enumerate(corner_mode_density(census, sector)):
                prob = dmap.prob
                keep = np.argwhere(prob > DENSITY_PRUNE)
                for ix, iy in keep:
                    rows.append((sector, dmap.corner, str(mode_id),
                                 str(int(census.spectra["x"].sites[ix])),
                                 str(int(census.spectra["y"].sites[iy])),
                                 fmt(prob[ix, iy])))
        files[out / "corner_density.csv"] = (
            ("sector", "corner", "mode", "nx", "ny", "prob"), rows)
    return payload, warnings, files


def _run_mcd(config: RunConfig, out: Path):
    files = {}
    warnings = []
    workers = config.workers if config.workers else 4
    if config.sweep_samples:
        values = np.linspace(*config.sweep_range, config.sweep_samples)
        rows = []
        for v in values:
            quoted = {"k1": config.k1, "k2": config.k2, "k3": config.k3,
                      "k4": config.k4, config.sweep_axis: float(v)}
            point = KickParams.from_pi_units(**quoted)
            trace = mcd_invariants(point, config.tmax, workers=workers,
                                   grid_size=config.theta_points)
            if trace.invariants is None:
                rows.append((fmt(v), fmt(trace.c0), fmt(trace.cpi), "", "", "1"))
            else:
                rows.append((fmt(v), fmt(trace.c0), fmt(trace.cpi),
                             str(trace.invariants.w0), str(trace.invariants.wpi),
                             "0"))
            warnings.extend(trace.warnings)
        payload = {"kind": "mcd-sweep", "axis": config.sweep_axis,
                   "samples": config.sweep_samples, "tmax": config.tmax}
        if "csv" in config.formats:
            files[out / "mcd_sweep.csv"] = (
                ("value", "c0bar", "cpibar", "w0", "wpi", "boundary_flag"), rows)
        return payload, warnings, files
    trace = mcd_invariants(config.params(), config.tmax, workers=workers,
                           grid_size=config.theta_points)
    warnings.extend(trace.warnings)
    payload = {
        "kind": "mcd",
        "tmax": config.tmax,
        "lattice": [trace.lattice.lx, trace.lattice.ly],
        "averages": {f"c{a}{b}": trace.averages[(a, b)]
                     for (a, b) in sorted(trace.averages)},
        "c0bar": trace.c0,
        "cpibar": trace.cpi,
    }
    if trace.invariants is not None:
        payload["w0"] = trace.invariants.w0
        payload["wpi"] = trace.invariants.wpi
    if "csv" in config.formats:
        rows = []
        for t in range(trace.t_max):
            row = [str(t + 1)]
            row.extend(fmt(trace.axis_series[f][t]) for f in (1, 2, 3, 4))
            row.extend(fmt(trace.series[(a, b)][t]) for a, b in sorted(trace.series))
            rows.append(tuple(row))
        files[out / "mcd_trace.csv"] = (
            ("t", "c1", "c2", "c3", "c4", "c13", "c14", "c23", "c24"), rows)
    return payload, warnings, files


def _run_validate(config: RunConfig, out: Path):
    report = run_property_suite(seed=config.seed)
    payload = {"kind": "validate", "passed": report["passed"],
               "checks": report["checks"]}
    return payload, report["warnings"], {}


RUNNERS = {
    "phase-diagram": _run_phase_diagram,
    "spectrum": _run_spectrum,
    "corners": _run_corners,
    "mcd": _run_mcd,
    "boundaries": _run_boundaries,
    "validate": _run_validate,
}


def run(config: RunConfig) -> ResultEnvelope:
    """Dispatch one validated configuration and write its output files."""
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    payload, warnings, files = RUNNERS[config.command](config, out)
    envelope = ResultEnvelope(
        schema_version=SCHEMA_VERSION,
        command=config.command,
        config=config.echo(),
        payload=payload,
        warnings=warnings,
        files=sorted(p.name for p in files),
    )
    for path, (columns, rows) in files.items():
        emit_csv(columns, rows, path)
    if "json" in config.formats:
        emit_json(envelope, out / f"{config.command.replace('-', '_')}.json")
    envelope.elapsed_s = time.perf_counter() - started
    return envelope


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        n1, n2 = text.lower().split("x")
        return int(n1), int(n2)
    except ValueError as err:
        raise ConfigError(f"grid must look like 128x128, got {text!r}") from err


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError as err:
        raise ConfigError(f"range must look like 0.05:5.0, got {text!r}") from err


def load_config(command: str, args: argparse.Namespace) -> RunConfig:
    """Merge defaults, optional YAML config file, then CLI flags."""
    merged: dict = {}
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
        merged.update(data)
    overrides = {
        "k1": args.k1, "k2": args.k2, "k3": args.k3, "k4": args.k4,
        "size": args.size, "tmax": args.tmax, "workers": args.workers,
        "seed": args.seed,
        "theta_points": args.theta_points,
        "e_tol": args.e_tol,
        "boundary_tol": args.boundary_tol,
    }
    if args.grid:
        overrides["grid"] = _parse_grid(args.grid)
    if args.scan_axes:
        overrides["scan_axes"] = tuple(args.scan_axes.split(","))
    if args.scan_range_1:
        ranges = list(merged.get("scan_ranges", RunConfig.scan_ranges))
        ranges[0] = _parse_range(args.scan_range_1)
        overrides["scan_ranges"] = tuple(tuple(r) for r in ranges)
    if args.scan_range_2:
        base = overrides.get("scan_ranges") or merged.get(
            "scan_ranges", RunConfig.scan_ranges)
        ranges = list(base)
        ranges[1] = _parse_range(args.scan_range_2)
        overrides["scan_ranges"] = tuple(tuple(r) for r in ranges)
    if args.sweep:
        overrides["sweep_axis"] = args.sweep
    if args.sweep_range:
        overrides["sweep_range"] = _parse_range(args.sweep_range)
    if args.sweep_samples:
        overrides["sweep_samples"] = args.sweep_samples
    if args.format:
        overrides["formats"] = tuple(args.format.split(","))
    if args.out:
        overrides["out_dir"] = Path(args.out)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged.pop("command", None)
    known = set(RunConfig.__dataclass_fields__) - {"command"}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "grid" in merged:
        merged["grid"] = tuple(merged["grid"])
    if "scan_axes" in merged:
        merged["scan_axes"] = tuple(merged["scan_axes"])
    if "scan_ranges" in merged:
        merged["scan_ranges"] = tuple(tuple(r) for r in merged["scan_ranges"])
    if "sweep_range" in merged:
        merged["sweep_range"] = tuple(merged["sweep_range"])
    if "formats" in merged:
        merged["formats"] = tuple(merged["formats"])
    if "out_dir" in merged:
        merged["out_dir"] = Path(merged["out_dir"])
    return RunConfig(command=command, **merged)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordkl",
        description="Simulate the 2D on-resonance double-kicked lattice: "
                    "topological invariants, phase diagrams, corner-mode "
                    "censuses and chiral-displacement dynamics.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("phase-diagram", "invariant scan over two kicking strengths"),
        ("spectrum", "open-boundary spectra and participation ratios"),
        ("corners", "corner-mode census and density maps"),
        ("mcd", "mean-chiral-displacement traces and invariant estimates"),
        ("boundaries", "integer gap-closure certificates over a scan plane"),
        ("validate", "run the built-in property suite"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML config file; flags override it")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--k1", type=float, help="sine-kick strength, x axis, in pi units")
        p.add_argument("--k2", type=float, help="cosine-kick strength, x axis, in pi units")
        p.add_argument("--k3", type=float, help="sine-kick strength, y axis, in pi units")
        p.add_argument("--k4", type=float, help="cosine-kick strength, y axis, in pi units")
        p.add_argument("--size", type=int, help="lattice side length (even)")
        p.add_argument("--tmax", type=int, help="number of driving periods")
        p.add_argument("--grid", help="scan resolution, e.g. 128x128")
        p.add_argument("--scan-axes", dest="scan_axes",
                       help="comma pair of scan strengths, e.g. k2,k4")
        p.add_argument("--scan-range-1", dest="scan_range_1",
                       help="first scan range in pi units, e.g. 0.05:5.0")
        p.add_argument("--scan-range-2", dest="scan_range_2",
                       help="second scan range in pi units")
        p.add_argument("--sweep", help="sweep strength for corners/mcd, e.g. k4")
        p.add_argument("--sweep-range", dest="sweep_range",
                       help="sweep range in pi units, e.g. 0.05:4.95")
        p.add_argument("--sweep-samples", dest="sweep_samples", type=int,
                       help="number of sweep samples")
        p.add_argument("--theta-points", dest="theta_points", type=int,
                       help="quasiposition grid size for windings")
        p.add_argument("--e-tol", dest="e_tol", type=float,
                       help="eigenphase window half-width for censuses")
        p.add_argument("--boundary-tol", dest="boundary_tol", type=float,
                       help="residual tolerance for boundary certificates")
        p.add_argument("--workers", type=int, help="worker pool size")
        p.add_argument("--format", help="comma list of output formats: csv,json")
        p.add_argument("--seed", type=int, help="seed for randomized checks")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.command, args)
        envelope = run(config)
    except ConfigError as err:
        print(json.dumps({"error": "config", "message": str(err)}),
              file=sys.stderr)
        return 2
    except ModelError as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}),
              file=sys.stderr)
        return 1
    print(json.dumps(_canonical(envelope.payload), sort_keys=True))
    print(f"elapsed: {envelope.elapsed_s:.3f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
