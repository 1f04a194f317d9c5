"""Open-boundary chains: unitary construction, eigensolves, participation
ratios, edge and corner censuses."""

import numpy as np
import pytest

from helpers import dense_chain_unitary
from ordkl.errors import NumericalFailureError
from ordkl.lattice import (
    CORNERS,
    LatticeSpec,
    build_obc_unitary,
    cell_index,
    chiral_signs,
    combined_eigenphases,
    corner_census_2d,
    corner_mode_density,
    edge_mode_census_1d,
    eigensolve,
    ipr,
    max_spectral_gap,
    pbc_bloch_eigenphases,
    site_window,
    solve_chain,
)
from ordkl.model import PI, KickParams, wrap_to_pi

FIG_PARAMS = KickParams.from_pi_units(0.5, 3.5, 0.5, 1.5)


class TestSiteWindow:
    def test_starts_odd_and_centered(self):
        for length in (8, 12, 300, 302):
            window = site_window(length)
            assert window.size == length
            assert window[0] % 2 != 0
            assert 0 in window
            assert abs(int(window[0]) + int(window[-1])) <= 1

    def test_rejects_odd_or_tiny(self):
        with pytest.raises(ValueError):
            site_window(7)
        with pytest.raises(ValueError):
            site_window(4)

    def test_cells_and_signs(self):
        window = site_window(8)
        cells = cell_index(window)
        assert list(window) == [-3, -2, -1, 0, 1, 2, 3, 4]
        assert list(cells) == [-1, -1, 0, 0, 1, 1, 2, 2]
        assert list(chiral_signs(window)) == [-1, 1, -1, 1, -1, 1, -1, 1]


class TestBuildUnitary:
    def test_free_phase_table(self):
        # zero kicks leave only the free-evolution diagonals, which cancel
        params = KickParams(0.0, 0.0, 1.0, 1.0)
        u = build_obc_unitary(params, "x", 16)
        assert np.abs(u - np.eye(16)).max() < 1e-14

    def test_free_phase_values(self):
        from ordkl.lattice import _free_evolution_phases
        sites = site_window(8)
        phases = _free_evolution_phases(sites)
        for n, p in zip(sites, phases):
            assert p == (1.0 if n % 2 == 0 else -1.0j)

    def test_unitarity(self):
        u = build_obc_unitary(FIG_PARAMS, "x", 64)
        assert np.abs(u.conj().T @ u - np.eye(64)).max() < 1e-12

    def test_against_dense_series_oracle(self):
        for axis in ("x", "y"):
            k_sin, k_cos = FIG_PARAMS.axis_strengths(axis)
            sites = site_window(32)
            expect = dense_chain_unitary(k_sin, k_cos, sites)
            got = build_obc_unitary(FIG_PARAMS, axis, 32)
            assert np.abs(got - expect).max() < 1e-10

    def test_pbc_matches_bloch_dispersion(self, rng):
        for _ in range(5):
            params = KickParams(*(rng.uniform(0.3, 4.5, size=4) * PI))
            for axis in ("x", "y"):
                u = build_obc_unitary(params, axis, 64, periodic=True)
                phases = np.sort(np.asarray(wrap_to_pi(-np.angle(np.linalg.eigvals(u)))))
                expect = pbc_bloch_eigenphases(params, axis, 64)
                assert np.abs(phases - expect).max() < 1e-8


class TestEigensolve:
    def test_identity_input(self):
        spectrum = eigensolve(np.eye(12, dtype=complex), site_window(12))
        assert np.abs(spectrum.eigenphases).max() < 1e-14
        overlap = spectrum.eigenvectors.conj().T @ spectrum.eigenvectors
        assert np.abs(overlap - np.eye(12)).max() < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(NumericalFailureError):
            eigensolve(np.eye(12) * 1.5, site_window(12))

    def test_residuals_and_pairing(self):
        u = build_obc_unitary(FIG_PARAMS, "x", 300)
        spectrum = eigensolve(u, site_window(300), axis="x")
        lam = np.exp(-1j * spectrum.eigenphases)
        worst = 0.0
        for i in range(300):
            vec = spectrum.eigenvectors[:, i]
            worst = max(worst, float(np.linalg.norm(u @ vec - lam[i] * vec)))
        assert worst < 1e-9
        e = spectrum.eigenphases
        mirrored = np.sort(np.asarray(wrap_to_pi(-e)))
        assert np.abs(np.sort(e) - mirrored).max() < 1e-9
        norms = (np.abs(spectrum.eigenvectors) ** 2).sum(axis=0)
        assert np.abs(norms - 1.0).max() < 1e-12

    def test_modulus_gate(self):
        u = build_obc_unitary(FIG_PARAMS, "y", 40)
        u[0, 0] += 1e-6  # breaks unitarity beyond the eigenvalue gate
        with pytest.raises(NumericalFailureError):
            eigensolve(u, site_window(40))


class TestIpr:
    def test_delta_state(self):
        state = np.zeros(50)
        state[7] = 1.0
        assert ipr(state) == pytest.approx(1.0)

    def test_uniform_state(self):
        m = 40
        assert ipr(np.full(m, 1 / np.sqrt(m))) == pytest.approx(1 / m)

    def test_product_multiplicativity(self, rng):
        a = rng.normal(size=30) + 1j * rng.normal(size=30)
        b = rng.normal(size=20) + 1j * rng.normal(size=20)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        assert ipr(np.outer(a, b)) == pytest.approx(ipr(a) * ipr(b), abs=1e-12)

    def test_dims_reshape(self):
        state = np.full(12, 1 / np.sqrt(12))
        assert ipr(state, dims=(3, 4)) == pytest.approx(1 / 12)


class TestEdgeCensus:
    def test_fig_parameter_counts(self):
        # (2|w0|, 2|wpi|) per chain with the frozen invariant pairs
        counts_x = edge_mode_census_1d(solve_chain(FIG_PARAMS, "x", 300))
        counts_y = edge_mode_census_1d(solve_chain(FIG_PARAMS, "y", 300))
        assert (counts_x.n_zero, counts_x.n_pi) == (2, 4)
        assert (counts_y.n_zero, counts_y.n_pi) == (0, 2)
        assert not counts_x.ambiguous
        assert not counts_y.ambiguous

    def test_trivial_pair(self):
        params = KickParams.from_pi_units(0.5, 0.5, 0.5, 0.5)
        census = edge_mode_census_1d(solve_chain(params, "x", 200))
        assert (census.n_zero, census.n_pi) == (0, 0)

    def test_labels_follow_census(self):
        spectrum = solve_chain(FIG_PARAMS, "x", 200)
        census = edge_mode_census_1d(spectrum)
        edge_states = set(census.zero_states + census.pi_states)
        for i, label in enumerate(spectrum.labels):
            assert (label == "edge") == (i in edge_states)


class TestCornerCensus:
    def test_fig_parameter_census(self):
        census = corner_census_2d(FIG_PARAMS, LatticeSpec.square(300))
        assert (census.n0, census.n_pi) == (8, 4)
        assert (census.direct_n0, census.direct_n_pi) == (8, 4)
        assert census.invariant_check
        assert (census.w0, census.wpi) == (2, 1)
        for sector, total in (("zero", 8), ("pi", 4)):
            per_corner = census.per_corner[sector]
            assert sum(per_corner.values()) == total
            assert set(per_corner) == set(CORNERS)

    def test_trivial_phase(self):
        params = KickParams.from_pi_units(0.5, 0.5, 0.5, 0.5)
        census = corner_census_2d(params, LatticeSpec.square(120))
        assert (census.n0, census.n_pi) == (0, 0)
        assert census.invariant_check

    def test_size_stability(self):
        a = corner_census_2d(FIG_PARAMS, LatticeSpec.square(200))
        b = corner_census_2d(FIG_PARAMS, LatticeSpec.square(300))
        assert (a.n0, a.n_pi) == (b.n0, b.n_pi)

    def test_spectral_fill_with_detected_corners(self):
        census = corner_census_2d(FIG_PARAMS, LatticeSpec.square(300))
        combined = combined_eigenphases(census.spectra["x"], census.spectra["y"])
        assert max_spectral_gap(combined) < 0.05
        assert census.n0 + census.n_pi > 0


class TestCornerDensity:
    def test_maps_normalized_and_localized(self):
        census = corner_census_2d(FIG_PARAMS, LatticeSpec.square(300))
        block = 300 // 8
        slices = {
            "lo-lo": (slice(None, block), slice(None, block)),
            "lo-hi": (slice(None, block), slice(-block, None)),
            "hi-lo": (slice(-block, None), slice(None, block)),
            "hi-hi": (slice(-block, None), slice(-block, None)),
        }
        for sector in ("zero", "pi"):
            maps = corner_mode_density(census, sector)
            for dmap in maps:
                assert dmap.prob.sum() == pytest.approx(1.0, abs=1e-12)
                assert dmap.prob[slices[dmap.corner]].sum() >= 0.9

    def test_bulk_state_ipr_control(self):
        # corner modes dominate any mid-band state by a wide IPR margin
        census = corner_census_2d(FIG_PARAMS, LatticeSpec.square(300))
        spec_x, spec_y = census.spectra["x"], census.spectra["y"]
        corner_iprs = [
            float(spec_x.ipr[i] * spec_y.ipr[j])
            for sector in ("zero", "pi") for i, j, _, _ in census.pairs[sector]
        ]
        mid_x = int(np.argmin(np.abs(spec_x.eigenphases - PI / 2)))
        mid_y = int(np.argmin(np.abs(spec_y.eigenphases - PI / 2)))
        bulk_ipr = float(spec_x.ipr[mid_x] * spec_y.ipr[mid_y])
        assert min(corner_iprs) >= 10 * bulk_ipr

    def test_empty_sector_rejected(self):
        params = KickParams.from_pi_units(0.5, 0.5, 0.5, 0.5)
        census = corner_census_2d(params, LatticeSpec.square(120))
        with pytest.raises(ValueError):
            corner_mode_density(census, "zero")
