"""Independent numerical oracles used across the test suite.

Everything here recomputes quantities through routes the library itself does
not take: raw series summation for matrix exponentials, eigen-extraction of
Bloch vectors straight from frame matrices, sign-counted branch-cut
crossings for windings, and dense brute-force operator products for the
lattice factors.
"""

import numpy as np

from ordkl.model import PI, KickParams, frame_matrix, dispersion, frame_axis

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def series_expm(a, terms=80):
    """Plain scaled Taylor summation of exp(a) for small matrices."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    norm = np.abs(a).sum(axis=1).max()
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-30))))) + 1
    scaled = a / (2 ** squarings)
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, terms):
        term = term @ scaled / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def bloch_vector_from_matrix(u, sin_e):
    """(n_x + i n_y) extracted from a chiral 2x2 unitary's off-diagonal."""
    return np.conj(1j * u[0, 1] / sin_e)


def zero_crossing_winding(params: KickParams, frame, grid=2 ** 14):
    """Winding by signed crossings of the branch cut at angle pi.

    The in-plane Bloch vector is read off each frame matrix by
    eigen-extraction; every pass over the negative real axis with the
    imaginary part falling counts one positive turn.
    """
    axis = frame_axis(frame)
    zs = np.empty(grid, dtype=complex)
    for i in range(grid):
        theta = 2.0 * PI * i / grid
        u = frame_matrix(params, theta, frame).entries
        sin_e = np.sin(dispersion(params, theta, axis))
        if sin_e < 1e-10:
            raise ValueError("oracle hit a gapless point")
        zs[i] = bloch_vector_from_matrix(u, sin_e)
    turns = 0
    for i in range(grid):
        z0, z1 = zs[i], zs[(i + 1) % grid]
        if (z0.real < 0 or z1.real < 0):
            if z0.imag >= 0 > z1.imag:
                turns += 1
            elif z0.imag < 0 <= z1.imag:
                turns -= 1
    return turns


def dense_chain_unitary(k_sin, k_cos, sites, periodic=False):
    """Brute-force one-period chain unitary from raw operator factors."""
    length = len(sites)
    shift = np.zeros((length, length), dtype=complex)
    for i in range(length - 1):
        shift[i, i + 1] = 1.0
    if periodic:
        shift[length - 1, 0] = 1.0
    h_cos = 0.5 * (shift + shift.conj().T)
    gen_sin = 0.5 * (shift - shift.conj().T)
    cos_kick = series_expm(-1j * k_cos * h_cos)
    sine_kick = series_expm(k_sin * gen_sin)
    d_minus = np.diag(np.where(np.asarray(sites) % 2 == 0, 1.0 + 0j, -1.0j))
    return d_minus.conj() @ cos_kick @ d_minus @ sine_kick
