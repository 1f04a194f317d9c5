"""The four figure kinds: phase-diagram heatmaps, invariant/MCD sweeps,
spectrum + participation scatter, and corner-mode density maps.

Rendering is deterministic for fixed inputs and style version: a stable hash
of each invariant pair selects its region color, fonts and sizes are pinned,
and the PNG metadata carries no timestamps.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import KNOWN_SCHEMA_VERSIONS, STYLE_VERSION
from .io import SchemaError, read_envelope, read_table

KINDS = ("heatmap", "sweep", "spectrum", "density")

#: fixed region palette; a stable digest of the invariant value indexes it.
PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
    "#fabfd2", "#b6992d", "#499894", "#79706e",
)

MASK_COLOR = "#1a1a1a"

RC_PARAMS = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "svg.hashsalt": "ordkl-figures",
}


@dataclass
class FigureJob:
    """One rendering task: input files, kind, styling, output path."""

    kind: str
    inputs: tuple
    output: Path
    title: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")
        self.inputs = tuple(Path(p) for p in self.inputs)
        self.output = Path(self.output)


def stable_color(key: str) -> str:
    """Palette color chosen by a content digest, stable across runs."""
    digest = hashlib.md5(key.encode("utf-8")).digest()
    return PALETTE[digest[0] % len(PALETTE)]


def _split_inputs(job):
    tables = [p for p in job.inputs if p.suffix == ".csv"]
    envelopes = [p for p in job.inputs if p.suffix == ".json"]
    return tables, envelopes


def _float_or_none(text):
    return float(text) if text not in ("", None) else None


def _render_heatmap(job, fig):
    rows = read_table(_split_inputs(job)[0][0], KNOWN_SCHEMA_VERSIONS)
    axis1 = sorted({float(r["axis1"]) for r in rows})
    axis2 = sorted({float(r["axis2"]) for r in rows})
    index1 = {v: i for i, v in enumerate(axis1)}
    index2 = {v: i for i, v in enumerate(axis2)}
    shape = (len(axis1), len(axis2))
    grids = {"w0": np.full(shape, np.nan), "wpi": np.full(shape, np.nan)}
    mask = np.zeros(shape, dtype=bool)
    for r in rows:
        i, j = index1[float(r["axis1"])], index2[float(r["axis2"])]
        if r["boundary_flag"] == "1":
            mask[i, j] = True
            continue
        grids["w0"][i, j] = int(r["w0"])
        grids["wpi"][i, j] = int(r["wpi"])
    axes = fig.subplots(1, 2)
    for ax, name, label in zip(axes, ("w0", "wpi"), ("zero sector", "pi sector")):
        grid = grids[name]
        values = sorted({int(v) for v in grid[~np.isnan(grid)]})
        colors = {v: stable_color(f"{name}={v}") for v in values}
        rgb = np.zeros(shape + (3,))
        for v in values:
            rgb[grid == v] = matplotlib.colors.to_rgb(colors[v])
        rgb[mask] = matplotlib.colors.to_rgb(MASK_COLOR)
        extent = (axis2[0], axis2[-1], axis1[0], axis1[-1])
        ax.imshow(rgb, origin="lower", extent=extent, aspect="auto",
                  interpolation="nearest")
        # one label per region at its centroid
        for v in values:
            where = np.argwhere(grid == v)
            ci, cj = where.mean(axis=0)
            ax.text(
                np.interp(cj, [0, shape[1] - 1], [axis2[0], axis2[-1]]),
                np.interp(ci, [0, shape[0] - 1], [axis1[0], axis1[-1]]),
                str(v), ha="center", va="center", fontsize=8, color="white",
                bbox={"boxstyle": "round,pad=0.15", "fc": "black", "alpha": 0.5,
                      "lw": 0},
            )
        ax.set_xlabel("second strength / pi")
        ax.set_ylabel("first strength / pi")
        ax.set_title(label)


def _render_sweep(job, fig):
    tables, _ = _split_inputs(job)
    mcd_rows = census_rows = None
    for path in tables:
        rows = read_table(path, KNOWN_SCHEMA_VERSIONS)
        if rows and "c0bar" in rows[0]:
            mcd_rows = rows
        elif rows and "n0" in rows[0]:
            census_rows = rows
    if mcd_rows is None and census_rows is None:
        raise SchemaError("sweep rendering needs an MCD or census sweep table")
    ax = fig.subplots()
    if mcd_rows is not None:
        values = np.array([float(r["value"]) for r in mcd_rows])
        clean = [r for r in mcd_rows if r["boundary_flag"] == "0"]
        vals_c = np.array([float(r["value"]) for r in clean])
        w0 = np.array([int(r["w0"]) for r in clean])
        wpi = np.array([int(r["wpi"]) for r in clean])
        ax.step(vals_c, w0, where="mid", color=stable_color("line-w0"),
                label="invariant, zero sector")
        ax.step(vals_c, wpi, where="mid", color=stable_color("line-wpi"),
                label="invariant, pi sector")
        ax.plot(values, [float(r["c0bar"]) for r in mcd_rows], "o",
                ms=4, color=stable_color("marker-c0"), label="averaged MCD, zero")
        ax.plot(values, [float(r["cpibar"]) for r in mcd_rows], "s",
                ms=4, color=stable_color("marker-cpi"), label="averaged MCD, pi")
    if census_rows is not None:
        clean = [r for r in census_rows if r["boundary_flag"] == "0"]
        vals = np.array([float(r["value"]) for r in clean])
        ax.plot(vals, [int(r["n0"]) / 4 for r in clean], "^", ms=4,
                color=stable_color("marker-n0"), label="corner count / 4, zero")
        ax.plot(vals, [int(r["npi"]) / 4 for r in clean], "v", ms=4,
                color=stable_color("marker-npi"), label="corner count / 4, pi")
    ax.set_xlabel("swept strength / pi")
    ax.set_ylabel("invariant value")
    ax.legend(loc="upper left", fontsize=7)


def _render_spectrum(job, fig):
    rows = read_table(_split_inputs(job)[0][0], KNOWN_SCHEMA_VERSIONS)
    eigenphase = np.array([float(r["eigenphase"]) for r in rows])
    ipr = np.array([float(r["ipr"]) for r in rows])
    ax_e, ax_ipr = fig.subplots(1, 2)
    ax_e.plot(np.arange(eigenphase.size), np.sort(eigenphase), ",",
              color=stable_color("spectrum-dots"))
    ax_e.set_xlabel("state index")
    ax_e.set_ylabel("eigenphase")
    ax_e.set_title("quasienergy spectrum")
    ax_ipr.semilogy(eigenphase, ipr, ".", ms=2,
                    color=stable_color("ipr-dots"))
    ax_ipr.set_xlabel("eigenphase")
    ax_ipr.set_ylabel("inverse participation ratio")
    ax_ipr.set_title("localization")


def _render_density(job, fig):
    tables, envelopes = _split_inputs(job)
    rows = read_table(tables[0], KNOWN_SCHEMA_VERSIONS)
    counts = {}
    if envelopes:
        payload = read_envelope(envelopes[0], KNOWN_SCHEMA_VERSIONS).get("payload", {})
        counts = {"zero": payload.get("n0"), "pi": payload.get("npi")}
    sectors = ("zero", "pi")
    nx = np.array([int(r["nx"]) for r in rows])
    ny = np.array([int(r["ny"]) for r in rows])
    lo_x, hi_x = nx.min(), nx.max()
    lo_y, hi_y = ny.min(), ny.max()
    axes = fig.subplots(1, 2)
    for ax, sector in zip(axes, sectors):
        grid = np.zeros((hi_x - lo_x + 1, hi_y - lo_y + 1))
        for r in rows:
            if r["sector"] != sector:
                continue
            grid[int(r["nx"]) - lo_x, int(r["ny"]) - lo_y] += float(r["prob"])
        ax.imshow(grid.T, origin="lower", aspect="equal",
                  extent=(lo_x, hi_x, lo_y, hi_y), cmap="magma",
                  interpolation="nearest")
        title = f"{sector}-sector corner modes"
        if counts.get(sector) is not None:
            title += f" (count {counts[sector]})"
        ax.set_title(title)
        ax.set_xlabel("site index, first axis")
        ax.set_ylabel("site index, second axis")


RENDERERS = {
    "heatmap": _render_heatmap,
    "sweep": _render_sweep,
    "spectrum": _render_spectrum,
    "density": _render_density,
}

FIGURE_SIZES = {
    "heatmap": (8.0, 3.6),
    "sweep": (6.0, 3.4),
    "spectrum": (8.0, 3.4),
    "density": (8.0, 3.8),
}


def render(job: FigureJob) -> Path:
    """Render one job to its output image; returns the written path."""
    with matplotlib.rc_context(RC_PARAMS):
        fig = plt.figure(figsize=FIGURE_SIZES[job.kind])
        try:
            RENDERERS[job.kind](job, fig)
            if job.title:
                fig.suptitle(job.title)
            fig.tight_layout()
            job.output.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(
                job.output,
                metadata={"Software": f"ordkl-figures style {STYLE_VERSION}"},
            )
        finally:
            plt.close(fig)
    return job.output
