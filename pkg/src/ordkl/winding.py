"""Topological winding numbers, per-axis invariant pairs, the combined
higher-order invariants (w0, wpi), and parallel phase-diagram scans.

Each chiral-symmetric frame matrix winds an in-plane Bloch vector around the
quasiposition circle an integer number of times.  Half-sums and
half-differences of the two frame windings of an axis quantify its zero- and
pi-gap topology; products of the per-axis pairs count the corner modes of the
combined two-dimensional lattice.
"""

from __future__ import annotations

import concurrent.futures as cf
import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import GaplessPointError, NonQuantizedError, ParityViolationError
from .model import (
    ALL_FRAMES,
    GAPLESS_SIN_E,
    PI,
    KickParams,
    frame_axis,
    on_phase_boundary,
    unit_vector_grid,
)

DEFAULT_GRID = 1024

#: accepted |raw - round(raw)| for a quantized winding.
RESIDUAL_GATE = 0.01

#: largest tolerated single-step angle increment before local refinement.
MAX_STEP = PI / 2.0

#: bisection levels available to resolve a fast winding-angle whip; the
#: refined interval at the cap is far below double-precision angle spacing.
MAX_REFINE_DEPTH = 48


@dataclass(frozen=True)
class WindingResult:
    """One frame winding: raw accumulated turns, the rounded integer and the
    residual distance between them."""

    frame: int
    raw: float
    w: int
    residual: float
    grid_points: int


@dataclass(frozen=True)
class InvariantSet:
    """Per-axis invariant pairs and the combined corner-counting invariants."""

    w0x: int
    wpix: int
    w0y: int
    wpiy: int
    w0: int
    wpi: int
    windings: tuple[WindingResult, ...] = field(default=(), compare=False)


def _wrap_steps(dphi: np.ndarray) -> np.ndarray:
    """Reduce raw angle differences to (-pi, pi]."""
    wrapped = np.mod(dphi + PI, 2.0 * PI) - PI
    return np.where(wrapped == -PI, PI, wrapped)


def _grid_angles(params, frame, thetas):
    nx, ny, sin_e = unit_vector_grid(params, frame, thetas)
    if sin_e.min() < GAPLESS_SIN_E:
        worst = float(np.atleast_1d(thetas)[int(np.argmin(sin_e))])
        raise GaplessPointError(
            f"gap closed near theta={worst:.6f} for frame {frame}"
        )
    return np.arctan2(ny, nx)


def _refined_step(params, frame, theta_lo, phi_lo, theta_hi, phi_hi, depth=0):
    """Branch-safe angle increment across one interval, bisecting until every
    sub-step stays under the tracking bound.

    A whip tighter than the depth cap can resolve only happens on top of a
    gap closure, which the midpoint evaluations flag as GaplessPointError
    first; the cap itself guards against pathological inputs.
    """
    step = _wrap_steps(np.asarray(phi_hi - phi_lo)).item()
    if abs(step) <= MAX_STEP:
        return step
    if depth >= MAX_REFINE_DEPTH:
        raise NonQuantizedError(
            "winding angle varies too fast to branch-track; "
            "the parameter point sits on or next to a phase boundary"
        )
    theta_mid = 0.5 * (theta_lo + theta_hi)
    phi_mid = float(_grid_angles(params, frame, np.array([theta_mid]))[0])
    return (
        _refined_step(params, frame, theta_lo, phi_lo, theta_mid, phi_mid, depth + 1)
        + _refined_step(params, frame, theta_mid, phi_mid, theta_hi, phi_hi, depth + 1)
    )


def winding_number(
    params: KickParams, axis: str, frame: int, grid_size: int = DEFAULT_GRID
) -> WindingResult:
    """Winding of the Bloch-vector angle around the quasiposition circle.

    Branch-tracked increments are accumulated on a uniform endpoint-exclusive
    grid.  Steps larger than pi/2 are refined by local bisection until branch
    tracking is safe again; refinement converging onto a gap closure raises
    GaplessPointError.  The total is pinned to the nearest integer with a
    residual gate.
    """
    if frame_axis(frame) != axis:
        raise ValueError(f"frame {frame} does not belong to axis {axis!r}")
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    thetas = 2.0 * PI * np.arange(grid_size) / grid_size
    phi = _grid_angles(params, frame, thetas)
    dphi = _wrap_steps(np.diff(np.concatenate([phi, phi[:1]])))
    for idx in np.flatnonzero(np.abs(dphi) > MAX_STEP):
        theta_lo = thetas[idx]
        theta_hi = theta_lo + 2.0 * PI / grid_size
        dphi[idx] = _refined_step(
            params, frame, theta_lo, phi[idx], theta_hi, phi[(idx + 1) % grid_size]
        )
    raw = float(dphi.sum() / (2.0 * PI))
    w = int(round(raw))
    residual = abs(raw - w)
    if residual >= RESIDUAL_GATE:
        raise NonQuantizedError(
            f"winding residual {residual:.3g} exceeds {RESIDUAL_GATE}"
        )
    return WindingResult(frame=frame, raw=raw, w=w, residual=residual,
                         grid_points=grid_size)


def axis_invariants(
    params: KickParams, axis: str, grid_size: int = DEFAULT_GRID
) -> tuple[int, int]:
    """Zero- and pi-gap invariants of one axis from its two frame windings."""
    frames = (1, 2) if axis == "x" else (3, 4)
    w_a = winding_number(params, axis, frames[0], grid_size).w
    w_b = winding_number(params, axis, frames[1], grid_size).w
    if (w_a + w_b) % 2 != 0:
        raise ParityViolationError(
            f"frame windings ({w_a}, {w_b}) on axis {axis} have mixed parity"
        )
    return (w_a + w_b) // 2, (w_a - w_b) // 2


def hotp_invariants(params: KickParams, grid_size: int = DEFAULT_GRID) -> InvariantSet:
    """Full invariant set: per-axis pairs plus the corner-counting pair.

    w0 counts products of like-gap axis invariants, wpi the cross products;
    both vanish unless each axis is separately nontrivial.
    """
    windings = tuple(
        winding_number(params, frame_axis(f), f, grid_size) for f in ALL_FRAMES
    )
    by_frame = {res.frame: res.w for res in windings}
    for lo, hi in ((1, 2), (3, 4)):
        if (by_frame[lo] + by_frame[hi]) % 2 != 0:
            raise ParityViolationError(
                f"frame windings ({by_frame[lo]}, {by_frame[hi]}) have mixed parity"
            )
    w0x = (by_frame[1] + by_frame[2]) // 2
    wpix = (by_frame[1] - by_frame[2]) // 2
    w0y = (by_frame[3] + by_frame[4]) // 2
    wpiy = (by_frame[3] - by_frame[4]) // 2
    return InvariantSet(
        w0x=w0x,
        wpix=wpix,
        w0y=w0y,
        wpiy=wpiy,
        w0=abs(w0x * w0y) + abs(wpix * wpiy),
        wpi=abs(w0x * wpiy) + abs(wpix * w0y),
        windings=windings,
    )


AXIS_NAMES = ("k1", "k2", "k3", "k4")


def _with_strengths(params: KickParams, updates: dict) -> KickParams:
    values = {name: getattr(params, name) for name in AXIS_NAMES}
    values.update(updates)
    return KickParams(phi_x=params.phi_x, phi_y=params.phi_y,
                      hbar_tau=params.hbar_tau, **values)


@dataclass
class PhaseDiagramCell:
    """One scan cell: either an invariant set or a boundary/failure mark."""

    invariants: InvariantSet | None
    boundary: bool
    reason: str = ""
    witnesses: tuple = ()


@dataclass
class PhaseDiagram:
    """Rectangular invariant scan over two kicking strengths."""

    axis_names: tuple[str, str]
    values_1: np.ndarray
    values_2: np.ndarray
    cells: list  # row-major [i1][i2]
    params_base: KickParams
    grid_size: int

    def cell(self, i1: int, i2: int) -> PhaseDiagramCell:
        return self.cells[i1][i2]


def _scan_cell(args):
    params_base, axis_pair, v1, v2, grid_size, witness_tol = args
    params = _with_strengths(params_base, {axis_pair[0]: v1, axis_pair[1]: v2})
    try:
        inv = hotp_invariants(params, grid_size)
        return PhaseDiagramCell(invariants=inv, boundary=False)
    except (GaplessPointError, NonQuantizedError, ParityViolationError) as err:
        _, witnesses = on_phase_boundary(params, tol=witness_tol)
        return PhaseDiagramCell(
            invariants=None,
            boundary=True,
            reason=type(err).__name__,
            witnesses=witnesses,
        )


def phase_diagram(
    params_base: KickParams,
    axis_pair: tuple[str, str],
    ranges: tuple[tuple[float, float], tuple[float, float]],
    resolution: tuple[int, int],
    grid_size: int = DEFAULT_GRID,
    workers: int | None = None,
    witness_tol: float = 1e-6,
) -> PhaseDiagram:
    """Invariant scan over a rectangle in two kicking strengths.

    Boundary cells are detected by the model itself (gap closure or failed
    quantization while computing the cell), not by the integer certificate;
    the certificate only labels detected cells with a witness when one exists
    within witness_tol.  Cells are independent, so the scan distributes over
    a process pool; results land in fixed grid slots and the output does not
    depend on the worker count.
    """
    for name in axis_pair:
        if name not in AXIS_NAMES:
            raise ValueError(f"unknown scan axis {name!r}")
    if axis_pair[0] == axis_pair[1]:
        raise ValueError("scan axes must differ")
    (lo1, hi1), (lo2, hi2) = ranges
    n1, n2 = resolution
    if n1 < 2 or n2 < 2:
        raise ValueError("resolution must be at least 2 per axis")
    if not (hi1 > lo1 >= 0.0 and hi2 > lo2 >= 0.0):
        raise ValueError("ranges must be non-empty and non-negative")
    values_1 = np.linspace(lo1, hi1, n1)
    values_2 = np.linspace(lo2, hi2, n2)
    jobs = [
        (params_base, axis_pair, float(v1), float(v2), grid_size, witness_tol)
        for v1, v2 in itertools.product(values_1, values_2)
    ]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and len(jobs) > 4:
        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_scan_cell, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        flat = [_scan_cell(job) for job in jobs]
    cells = [flat[i1 * n2:(i1 + 1) * n2] for i1 in range(n1)]
    return PhaseDiagram(
        axis_names=tuple(axis_pair),
        values_1=values_1,
        values_2=values_2,
        cells=cells,
        params_base=params_base,
        grid_size=grid_size,
    )


def sweep_invariants(
    params_base: KickParams,
    axis_name: str,
    values,
    grid_size: int = DEFAULT_GRID,
) -> list[PhaseDiagramCell]:
    """One-dimensional invariant sweep along a single kicking strength."""
    if axis_name not in AXIS_NAMES:
        raise ValueError(f"unknown sweep axis {axis_name!r}")
    out = []
    for v in values:
        params = _with_strengths(params_base, {axis_name: float(v)})
        try:
            out.append(PhaseDiagramCell(invariants=hotp_invariants(params, grid_size),
                                        boundary=False))
        except (GaplessPointError, NonQuantizedError, ParityViolationError) as err:
            _, witnesses = on_phase_boundary(params, tol=1e-6)
            out.append(PhaseDiagramCell(invariants=None, boundary=True,
                                        reason=type(err).__name__,
                                        witnesses=witnesses))
    return out


def min_gap(params: KickParams, axis: str, grid_size: int = DEFAULT_GRID) -> float:
    """Smallest |sin E| over the quasiposition grid of one axis."""
    thetas = 2.0 * PI * np.arange(grid_size) / grid_size
    _, _, sin_e = unit_vector_grid(
        params, 1 if axis == "x" else 3, thetas
    )
    return float(sin_e.min())
