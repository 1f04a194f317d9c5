"""Finite momentum-space chains under open boundaries: one-period unitaries,
full eigensolves, inverse participation ratios, edge-mode censuses and the
corner-mode census of the combined two-dimensional lattice.

Everything two-dimensional is derived from the two independent chains; the
product structure of the evolution means a 2D eigenstate is a pair of 1D
eigenstates and its quasienergy the wrapped sum of the pair's eigenphases.
No (Lx*Ly) x (Lx*Ly) matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import CensusMismatchError, NumericalFailureError
from .model import PI, KickParams, dispersion_grid, wrap_to_pi
from .winding import DEFAULT_GRID, hotp_invariants

#: default half-width of the eigenphase windows around 0 and pi.
EIGENPHASE_TOL = 1e-6

#: eigenphases closer than this (circle metric) are treated as one
#: degenerate multiplet and re-localized by position.
DEGENERACY_TOL = 1e-9

#: fraction of the lattice counted as the corner block per axis.
CORNER_FRACTION = 8

#: minimum corner-block probability for a corner-candidate product state.
CORNER_WEIGHT_MIN = 0.9

CORNERS = ("lo-lo", "lo-hi", "hi-lo", "hi-hi")


def site_window(length: int) -> np.ndarray:
    """Centered contiguous site window whose leftmost site is odd.

    The chain then terminates on whole sublattice cells (odd, even) at both
    ends, the alignment under which the bulk winding numbers of this package
    count the edge modes.  For length 300 the window is {-149, ..., 150}.
    """
    if length % 2 != 0 or length < 8:
        raise ValueError("chain length must be even and at least 8")
    first = -(length // 2)
    if first % 2 == 0:
        first += 1
    return np.arange(first, first + length)


def cell_index(sites: np.ndarray) -> np.ndarray:
    """Unit-cell index of each site; the cell (-1, 0) is cell zero."""
    return np.floor_divide(sites + 1, 2)


def chiral_signs(sites: np.ndarray) -> np.ndarray:
    """Sublattice (chiral) sign per site: +1 on even momenta, -1 on odd."""
    return np.where(sites % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class LatticeSpec:
    """Finite-lattice geometry: per-axis chain lengths."""

    lx: int
    ly: int

    def __post_init__(self):
        for length in (self.lx, self.ly):
            if length % 2 != 0 or length < 8:
                raise ValueError("lattice sides must be even and at least 8")

    @classmethod
    def square(cls, length: int) -> "LatticeSpec":
        return cls(length, length)

    def length(self, axis: str) -> int:
        return self.lx if axis == "x" else self.ly


def _free_evolution_phases(sites: np.ndarray) -> np.ndarray:
    """Diagonal of the between-kick free evolution: 1 on even sites, -i on
    odd sites (the quadratic phase is two-valued at resonance)."""
    return np.where(sites % 2 == 0, 1.0 + 0.0j, -1.0j)


def _sine_basis(length: int) -> np.ndarray:
    """Orthonormal eigenbasis of the open-chain symmetric hop: sine modes."""
    k = np.arange(1, length + 1)
    grid = np.outer(k, k) * (PI / (length + 1))
    return np.sin(grid) * np.sqrt(2.0 / (length + 1))


def _kick_exponentials(k_sin: float, k_cos: float, length: int):
    """Dense cosine-kick and sine-kick unitaries of an open chain.

    Both generators are Hermitian tridiagonal with constant couplings, both
    diagonalize in the closed-form sine basis; the sine kick needs an extra
    alternating-phase gauge to make its generator real.
    """
    basis = _sine_basis(length)
    spectrum = np.cos(PI * np.arange(1, length + 1) / (length + 1))
    cos_kick = (basis * np.exp(-1j * k_cos * spectrum)) @ basis
    gauge = 1j ** (np.arange(length) % 4)
    core = (basis * np.exp(-1j * k_sin * spectrum)) @ basis
    sine_kick = (gauge.conj()[:, None] * core) * gauge[None, :]
    return cos_kick, sine_kick


def _kick_exponentials_periodic(k_sin: float, k_cos: float, length: int):
    """Dense kick unitaries of a periodically closed chain."""
    hop = np.zeros((length, length), dtype=complex)
    idx = np.arange(length - 1)
    hop[idx, idx + 1] = 1.0
    hop[length - 1, 0] = 1.0
    h_cos = 0.5 * (hop + hop.conj().T)
    h_sin = (0.5 / 1j) * (hop - hop.conj().T)
    vals_c, vecs_c = np.linalg.eigh(h_cos)
    vals_s, vecs_s = np.linalg.eigh(h_sin)
    cos_kick = (vecs_c * np.exp(-1j * k_cos * vals_c)) @ vecs_c.conj().T
    sine_kick = (vecs_s * np.exp(1j * k_sin * vals_s)) @ vecs_s.conj().T
    return cos_kick, sine_kick


def build_obc_unitary(
    params: KickParams, axis: str, length: int, periodic: bool = False
) -> np.ndarray:
    """One-period unitary of a finite chain in the physical time frame.

    Factor order (right to left): sine kick, inverse free evolution, cosine
    kick, free evolution.  The periodic variant exists to validate the Bloch
    dispersion and is not used for censusing.
    """
    params.require_analytic()
    k_sin, k_cos = params.axis_strengths(axis)
    sites = site_window(length)
    if periodic:
        cos_kick, sine_kick = _kick_exponentials_periodic(k_sin, k_cos, length)
    else:
        cos_kick, sine_kick = _kick_exponentials(k_sin, k_cos, length)
    d_minus = _free_evolution_phases(sites)
    d_plus = d_minus.conj()
    u = (d_plus[:, None] * cos_kick) * d_minus[None, :]
    return u @ sine_kick


@dataclass
class ObcSpectrum:
    """Full eigendecomposition of one finite chain.

    Eigenphases live in (-pi, pi] and are sorted ascending; eigenvectors are
    the matching orthonormal columns.  labels marks per state whether it
    passed the localized-mode gates ('edge') or not ('bulk').
    """

    eigenphases: np.ndarray
    eigenvectors: np.ndarray
    ipr: np.ndarray
    labels: list[str]
    sites: np.ndarray
    axis: str = ""

    @property
    def size(self) -> int:
        return self.eigenphases.size

    def end_weights(self, fraction: int = CORNER_FRACTION):
        """Probability in the first and last length/fraction sites, per state."""
        block = self.size // fraction
        prob = np.abs(self.eigenvectors) ** 2
        return prob[:block].sum(axis=0), prob[-block:].sum(axis=0)


def _relocalize_degenerate(eigenphases, eigenvectors, sites):
    """Rotate each numerically degenerate multiplet into position eigenmodes.

    Unitary eigensolvers return arbitrary bases inside degenerate subspaces,
    typically smearing a left/right edge-mode pair across both ends.
    Diagonalizing the position operator within each multiplet restores
    localized, deterministically ordered representatives at a residual cost
    bounded by the multiplet's eigenphase spread.
    """
    order = np.argsort(eigenphases, kind="stable")
    phases = eigenphases[order]
    vecs = eigenvectors[:, order]
    n = phases.size
    gaps = np.diff(phases)
    breaks = list(np.flatnonzero(gaps > DEGENERACY_TOL) + 1)
    groups = [slice(a, b) for a, b in zip([0] + breaks, breaks + [n])]
    # the +-pi seam: merge first and last group when they touch on the circle
    wrap_gap = (phases[0] + 2.0 * PI) - phases[-1]
    merged_wrap = len(groups) > 1 and wrap_gap <= DEGENERACY_TOL
    blocks = []
    if merged_wrap:
        first, last = groups[0], groups[-1]
        groups = groups[1:-1]
        idx = np.r_[np.arange(last.start, last.stop), np.arange(first.start, first.stop)]
        blocks.append(idx)
    blocks.extend(np.arange(g.start, g.stop) for g in groups)
    for idx in blocks:
        if idx.size < 2:
            continue
        block = vecs[:, idx]
        pos = block.conj().T @ (sites[:, None] * block)
        _, rot = np.linalg.eigh(0.5 * (pos + pos.conj().T))
        vecs[:, idx] = block @ rot
        if merged_wrap and idx is blocks[0]:
            # representative eigenphase of the seam multiplet is +pi
            phases[idx] = PI
    return phases, vecs


def eigensolve(u: np.ndarray, sites: np.ndarray | None = None,
               axis: str = "") -> ObcSpectrum:
    """Full eigendecomposition of a one-period chain unitary.

    Uses a complex Schur factorization, which for a normal matrix yields the
    eigenvalues with an orthonormal eigenbasis, then re-localizes degenerate
    multiplets and sorts by eigenphase.
    """
    length = u.shape[0]
    if np.abs(u.conj().T @ u - np.eye(length)).max() > 1e-10:
        raise NumericalFailureError("input matrix is not unitary to 1e-10")
    if sites is None:
        sites = site_window(length)
    t, z = sla.schur(u, output="complex")
    lam = np.diag(t)
    if np.abs(np.abs(lam) - 1.0).max() > 1e-8:
        raise NumericalFailureError("eigenvalue modulus deviates from 1 beyond 1e-8")
    eigenphases = -np.angle(lam)
    eigenphases = np.asarray(wrap_to_pi(eigenphases))
    eigenphases, vecs = _relocalize_degenerate(eigenphases, z.copy(), sites)
    order = np.argsort(eigenphases, kind="stable")
    eigenphases = eigenphases[order]
    vecs = vecs[:, order]
    ipr_values = (np.abs(vecs) ** 4).sum(axis=0)
    spectrum = ObcSpectrum(
        eigenphases=eigenphases,
        eigenvectors=vecs,
        ipr=ipr_values,
        labels=["bulk"] * length,
        sites=sites,
        axis=axis,
    )
    _apply_default_labels(spectrum)
    return spectrum


def _apply_default_labels(spectrum: ObcSpectrum) -> None:
    census = edge_mode_census_1d(spectrum)
    for i in census.zero_states + census.pi_states:
        spectrum.labels[i] = "edge"


def solve_chain(params: KickParams, axis: str, length: int) -> ObcSpectrum:
    """Build and eigensolve one open chain."""
    u = build_obc_unitary(params, axis, length)
    return eigensolve(u, site_window(length), axis=axis)


def ipr(state: np.ndarray, dims=None) -> float:
    """Inverse participation ratio: the quartic amplitude sum.

    Accepts any array shape (a 2D array is summed over both axes); dims can
    reshape a flat input first.  Factorizes over tensor products, so 2D
    values are products of the per-axis values.
    """
    amplitudes = np.asarray(state)
    if dims is not None:
        amplitudes = amplitudes.reshape(dims)
    return float((np.abs(amplitudes) ** 4).sum())


@dataclass
class EdgeCensus:
    """Counts of zero- and pi-eigenphase localized modes of one chain."""

    n_zero: int
    n_pi: int
    zero_states: list[int]
    pi_states: list[int]
    ipr_threshold: float
    ambiguous: list[dict] = field(default_factory=list)


def edge_mode_census_1d(
    spectrum: ObcSpectrum,
    e_tol: float = EIGENPHASE_TOL,
    ipr_min: float | None = None,
) -> EdgeCensus:
    """Count localized modes inside the eigenphase windows at 0 and pi.

    ipr_min defaults to ten times the median state IPR of the spectrum.
    States that nearly graze a window edge or the IPR threshold are reported
    as ambiguous rather than silently classified.
    """
    if ipr_min is None:
        ipr_min = 10.0 * float(np.median(spectrum.ipr))
    e = spectrum.eigenphases
    dist_zero = np.abs(e)
    dist_pi = np.abs(np.abs(e) - PI)
    localized = spectrum.ipr > ipr_min
    zero_states = list(np.flatnonzero((dist_zero < e_tol) & localized))
    pi_states = list(np.flatnonzero((dist_pi < e_tol) & localized))
    ambiguous = []
    for i in range(spectrum.size):
        window = min(dist_zero[i], dist_pi[i])
        near_window_edge = e_tol / 4.0 <= window <= 4.0 * e_tol
        in_window = window < e_tol
        near_ipr_gate = in_window and ipr_min / 2.0 <= spectrum.ipr[i] < 2.0 * ipr_min
        if near_window_edge or near_ipr_gate:
            ambiguous.append(
                {"state": int(i), "eigenphase": float(e[i]),
                 "ipr": float(spectrum.ipr[i])}
            )
    return EdgeCensus(
        n_zero=len(zero_states),
        n_pi=len(pi_states),
        zero_states=zero_states,
        pi_states=pi_states,
        ipr_threshold=float(ipr_min),
        ambiguous=ambiguous,
    )


@dataclass
class CornerCensus:
    """Corner-mode counts of the combined 2D lattice with diagnostics.

    n0/n_pi come from composing the per-axis edge censuses; direct_n0 and
    direct_n_pi re-derive them by scanning all product eigenstates.  The
    invariant_check flag records whether the counts equal four times the
    bulk invariant pair.
    """

    n0: int
    n_pi: int
    per_corner: dict
    invariant_check: bool
    direct_n0: int
    direct_n_pi: int
    w0: int
    wpi: int
    pairs: dict = field(default_factory=dict, repr=False)
    spectra: dict = field(default_factory=dict, repr=False)
    warnings: list = field(default_factory=list)


def _direct_corner_scan(spec_x: ObcSpectrum, spec_y: ObcSpectrum,
                        e_tol: float, ipr2d_min: float):
    """Scan all product eigenstates for corner-localized modes at 0 and pi."""
    e2 = wrap_to_pi(np.add.outer(spec_x.eigenphases, spec_y.eigenphases))
    ipr2 = np.multiply.outer(spec_x.ipr, spec_y.ipr)
    lo_x, hi_x = spec_x.end_weights()
    lo_y, hi_y = spec_y.end_weights()
    found = {"zero": [], "pi": []}
    for sector, dist in (("zero", np.abs(e2)),
                         ("pi", np.abs(np.abs(e2) - PI))):
        ii, jj = np.where((dist < e_tol) & (ipr2 > ipr2d_min))
        for i, j in zip(ii, jj):
            weights = (
                lo_x[i] * lo_y[j], lo_x[i] * hi_y[j],
                hi_x[i] * lo_y[j], hi_x[i] * hi_y[j],
            )
            best = int(np.argmax(weights))
            if weights[best] >= CORNER_WEIGHT_MIN:
                found[sector].append((int(i), int(j), CORNERS[best],
                                      float(weights[best])))
    return found


def corner_census_2d(
    params: KickParams,
    spec: LatticeSpec,
    e_tol: float = EIGENPHASE_TOL,
    ipr_min: float | None = None,
    grid_size: int = DEFAULT_GRID,
) -> CornerCensus:
    """Corner-mode census of the finite 2D lattice.

    Primary counting composes the 1D censuses: zero corners pair like-gap
    edge modes of the two axes, pi corners pair unlike-gap edge modes.  A
    direct scan over product eigenstates cross-checks the composition and
    assigns each corner mode to a lattice corner; disagreement raises
    CensusMismatchError carrying both counts.
    """
    spec_x = solve_chain(params, "x", spec.lx)
    spec_y = solve_chain(params, "y", spec.ly)
    census_x = edge_mode_census_1d(spec_x, e_tol, ipr_min)
    census_y = edge_mode_census_1d(spec_y, e_tol, ipr_min)
    composed_n0 = census_x.n_zero * census_y.n_zero + census_x.n_pi * census_y.n_pi
    composed_npi = census_x.n_zero * census_y.n_pi + census_x.n_pi * census_y.n_zero
    ipr2d_min = census_x.ipr_threshold * census_y.ipr_threshold
    found = _direct_corner_scan(spec_x, spec_y, e_tol, ipr2d_min)
    direct_n0 = len(found["zero"])
    direct_npi = len(found["pi"])
    if (direct_n0, direct_npi) != (composed_n0, composed_npi):
        raise CensusMismatchError((composed_n0, composed_npi),
                                  (direct_n0, direct_npi))
    per_corner = {
        sector: {corner: sum(1 for _, _, c, _ in found[sector] if c == corner)
                 for corner in CORNERS}
        for sector in ("zero", "pi")
    }
    invariants = hotp_invariants(params, grid_size)
    warnings = []
    for axis, census in (("x", census_x), ("y", census_y)):
        for item in census.ambiguous:
            warnings.append({"kind": "ambiguous-classification", "axis": axis, **item})
    return CornerCensus(
        n0=composed_n0,
        n_pi=composed_npi,
        per_corner=per_corner,
        invariant_check=(composed_n0, composed_npi)
        == (4 * invariants.w0, 4 * invariants.wpi),
        direct_n0=direct_n0,
        direct_n_pi=direct_npi,
        w0=invariants.w0,
        wpi=invariants.wpi,
        pairs=found,
        spectra={"x": spec_x, "y": spec_y},
        warnings=warnings,
    )


@dataclass
class DensityMap:
    """Single corner-mode probability map |psi(nx, ny)|^2."""

    sector: str
    corner: str
    weight: float
    prob: np.ndarray  # shape (lx, ly)
    eigenphase: float


def corner_mode_density(census: CornerCensus, which: str) -> list[DensityMap]:
    """Probability maps of every corner mode in one sector ('zero' or 'pi')."""
    if which not in ("zero", "pi"):
        raise ValueError("sector must be 'zero' or 'pi'")
    pairs = census.pairs.get(which, [])
    if not pairs:
        raise ValueError(f"census holds no corner modes in the {which} sector")
    spec_x = census.spectra["x"]
    spec_y = census.spectra["y"]
    maps = []
    for i, j, corner, weight in pairs:
        px = np.abs(spec_x.eigenvectors[:, i]) ** 2
        py = np.abs(spec_y.eigenvectors[:, j]) ** 2
        e2 = float(wrap_to_pi(spec_x.eigenphases[i] + spec_y.eigenphases[j]))
        maps.append(DensityMap(sector=which, corner=corner, weight=weight,
                               prob=np.outer(px, py), eigenphase=e2))
    return maps


def combined_eigenphases(spec_x: ObcSpectrum, spec_y: ObcSpectrum) -> np.ndarray:
    """Sorted eigenphases of the full 2D lattice (wrapped pairwise sums)."""
    e2 = wrap_to_pi(np.add.outer(spec_x.eigenphases, spec_y.eigenphases))
    return np.sort(e2.ravel())


def max_spectral_gap(eigenphases: np.ndarray) -> float:
    """Largest nearest-neighbor spacing of a sorted eigenphase set on the
    circle, including the wrap-around gap."""
    e = np.sort(np.asarray(eigenphases))
    gaps = np.diff(np.concatenate([e, [e[0] + 2.0 * PI]]))
    return float(gaps.max())


def pbc_bloch_eigenphases(params: KickParams, axis: str, length: int) -> np.ndarray:
    """Dispersion eigenphases the periodic chain must reproduce.

    The unit cell spans two momentum sites, so a closed chain of the given
    length samples the quasiposition circle at length/2 points.
    """
    thetas = 4.0 * PI * np.arange(length // 2) / length
    e = dispersion_grid(params, axis, thetas)
    return np.sort(np.concatenate([e, -e]))
