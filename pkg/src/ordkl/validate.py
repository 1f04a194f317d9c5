"""Self-contained property suite behind the CLI validate command.

Runs fast structural checks of the closed-form layer, the finite chains and
the dynamics against their defining identities, and reports one record per
check.  A clean build produces all-pass with an empty warning list.
"""

from __future__ import annotations

import numpy as np

from .dynamics import mcd_invariants
from .lattice import (
    LatticeSpec,
    build_obc_unitary,
    eigensolve,
    pbc_bloch_eigenphases,
    site_window,
)
from .model import (
    ALL_FRAMES,
    PI,
    SIGMA_Z,
    KickParams,
    dispersion,
    frame_axis,
    frame_matrix,
    unit_vector,
    wrap_to_pi,
)
from .winding import min_gap, winding_number


def _random_params(rng, low=0.1, high=5.0):
    k = rng.uniform(low, high, size=4) * PI
    return KickParams(*k)


def _off_boundary_params(rng, gap=1e-3, low=0.1, high=5.0):
    while True:
        params = _random_params(rng, low, high)
        if min_gap(params, "x") > gap and min_gap(params, "y") > gap:
            return params


def _check(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def check_chiral_symmetry(rng, samples=200, tol=1e-12):
    worst = 0.0
    for _ in range(samples):
        params = _random_params(rng)
        theta = rng.uniform(0.0, 2.0 * PI)
        frame = int(rng.integers(1, 5))
        u = frame_matrix(params, theta, frame).entries
        worst = max(worst, float(np.abs(SIGMA_Z @ u @ SIGMA_Z - u.conj().T).max()))
    return _check("chiral-symmetry", worst < tol, f"max deviation {worst:.3e}")


def check_frame_similarity(rng, samples=50, tol=1e-10):
    worst = 0.0
    for _ in range(samples):
        params = _random_params(rng)
        theta = rng.uniform(0.0, 2.0 * PI)
        for pair in ((1, 2), (3, 4)):
            e = [np.sort(np.angle(np.linalg.eigvals(
                frame_matrix(params, theta, f).entries))) for f in pair]
            worst = max(worst, float(np.abs(e[0] - e[1]).max()))
    return _check("frame-similarity", worst < tol, f"max deviation {worst:.3e}")


def check_eigenphase_pairing(rng, samples=50, tol=1e-10):
    worst = 0.0
    for _ in range(samples):
        params = _random_params(rng)
        theta = rng.uniform(0.0, 2.0 * PI)
        frame = int(rng.integers(1, 5))
        u = frame_matrix(params, theta, frame).entries
        e = dispersion(params, theta, frame_axis(frame))
        phases = np.sort(np.angle(np.linalg.eigvals(u)))
        worst = max(worst, float(np.abs(phases - np.array([-e, e])).max()))
    return _check("eigenphase-pairing", worst < tol, f"max deviation {worst:.3e}")


def check_unit_vector_norm(rng, samples=200, tol=1e-10):
    worst = 0.0
    for _ in range(samples):
        params = _off_boundary_params(rng)
        theta = rng.uniform(0.0, 2.0 * PI)
        frame = int(rng.integers(1, 5))
        nx, ny = unit_vector(params, theta, frame)
        worst = max(worst, abs(nx * nx + ny * ny - 1.0))
    return _check("unit-vector-norm", worst < tol, f"max deviation {worst:.3e}")


def check_winding_quantization(rng, samples=25):
    worst = 0.0
    for _ in range(samples):
        params = _off_boundary_params(rng)
        for frame in ALL_FRAMES:
            res = winding_number(params, frame_axis(frame), frame)
            res2 = winding_number(params, frame_axis(frame), frame, 2 * res.grid_points)
            if res.w != res2.w:
                return _check("winding-quantization", False,
                              f"grid doubling changed {res.w} -> {res2.w}")
            worst = max(worst, res.residual, res2.residual)
    return _check("winding-quantization", worst < 0.01, f"max residual {worst:.3e}")


def check_pbc_dispersion(rng, samples=5, length=64, tol=1e-8):
    worst = 0.0
    for _ in range(samples):
        params = _off_boundary_params(rng)
        for axis in ("x", "y"):
            u = build_obc_unitary(params, axis, length, periodic=True)
            phases = np.sort(wrap_to_pi(-np.angle(np.linalg.eigvals(u))))
            expect = pbc_bloch_eigenphases(params, axis, length)
            worst = max(worst, float(np.abs(phases - expect).max()))
    return _check("pbc-dispersion", worst < tol, f"max deviation {worst:.3e}")


def check_obc_spectrum(rng, length=60, tol=1e-9):
    params = _off_boundary_params(rng)
    u = build_obc_unitary(params, "x", length)
    spectrum = eigensolve(u, site_window(length), axis="x")
    e = spectrum.eigenphases
    pairing = float(np.abs(np.sort(e) - np.sort(np.asarray(wrap_to_pi(-e)))).max())
    residual = 0.0
    lam = np.exp(-1j * e)
    for i in range(length):
        residual = max(residual, float(np.linalg.norm(
            u @ spectrum.eigenvectors[:, i] - lam[i] * spectrum.eigenvectors[:, i])))
    passed = residual < tol and pairing < 2e-9
    return _check("obc-spectrum", passed,
                  f"max residual {residual:.3e}, pairing {pairing:.3e}")


def check_mcd_factorization(rng, tol=1e-10):
    params = KickParams(0.5 * PI, 3.5 * PI, 0.5 * PI, 1.5 * PI)
    trace = mcd_invariants(params, t_max=5, spec=LatticeSpec(64, 64),
                           workers=1, compare_invariants=False)
    worst = 0.0
    for (a, b), series in trace.series.items():
        worst = max(worst, float(np.abs(
            series - trace.axis_series[a] * trace.axis_series[b]).max()))
    return _check("mcd-factorization", worst < tol, f"max deviation {worst:.3e}")


def run_property_suite(seed: int = 0) -> dict:
    """Run every check; returns {'checks': [...], 'passed': bool, 'warnings': []}."""
    rng = np.random.default_rng(seed)
    checks = [
        check_chiral_symmetry(rng),
        check_frame_similarity(rng),
        check_eigenphase_pairing(rng),
        check_unit_vector_norm(rng),
        check_winding_quantization(rng),
        check_pbc_dispersion(rng),
        check_obc_spectrum(rng),
        check_mcd_factorization(rng),
    ]
    warnings = [c["name"] for c in checks if not c["passed"]]
    return {"checks": checks, "passed": not warnings, "warnings": warnings}
