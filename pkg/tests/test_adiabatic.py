import math

import numpy as np
import pytest

from qrabi.adiabatic import (VARIANTS, approx_evolution, distance_basis, distance_energy,
                             distance_surface, first_order_energies, projection_heatmaps,
                             shifted_basis, shifted_overlap, wavepacket_bounds)
from qrabi.chain import converged_spectrum
from qrabi.dynamics import photon_number_series
from qrabi.errors import ThresholdError
from qrabi.fock import ModelParams, fock_vector, ladder_matrices
from qrabi.fock import assoc_laguerre


def test_shifted_basis_identity_at_zero():
    assert np.array_equal(shifted_basis(0.0, 6).matrix, np.eye(6))


def test_shifted_basis_diagonalizes_h0():
    gbar, dim = 1.2, 120
    a, a_dag, number = ladder_matrices(dim)
    h0 = number + gbar * (a + a_dag)
    basis = shifted_basis(gbar, dim).matrix
    n = np.arange(dim // 4)
    resid = h0 @ basis[:, n] - basis[:, n] * (n - gbar * gbar)
    assert np.max(np.abs(resid)) < 1e-8
    gram = basis[:, n].T @ basis[:, n]
    assert np.max(np.abs(gram - np.eye(len(n)))) < 1e-8


def test_shifted_overlap():
    assert shifted_overlap(0, 1.0) == pytest.approx(math.exp(-2), abs=1e-12)
    for n in (1, 3, 6):
        ref = math.exp(-2 * 0.7**2) * float(assoc_laguerre(n, 0, 4 * 0.7**2))
        assert shifted_overlap(n, 0.7) == pytest.approx(ref, abs=1e-12)


def test_first_order_energies_delta_zero_exact():
    p = ModelParams.from_ratios(1.3, 0.0)
    e = first_order_energies(p, 5)
    assert np.allclose(e, np.arange(5) - 1.69)


def test_heatmaps_columns(usc_plus):
    shifted, fock = projection_heatmaps(usc_plus)
    assert shifted.values.shape == (31, 31)
    for heat in (shifted, fock):
        sums = heat.values.sum(axis=0)
        assert np.all(sums <= 1 + 1e-12)
        assert np.all(sums[:10] > 0.999)


def test_heatmap_diagonal_at_delta_zero():
    p = ModelParams.from_ratios(0.7, 0.0)
    shifted, _ = projection_heatmaps(converged_spectrum(p, "+", 40))
    off = shifted.values - np.diag(np.diag(shifted.values))
    assert np.max(off) < 1e-20


def test_fock_heatmap_parabola(usc_plus):
    _, fock = projection_heatmaps(usc_plus)
    widths = []
    for n in (0, 6, 12, 18):
        support = np.nonzero(fock.values[:, n] > 1e-3)[0]
        assert support.min() <= n <= support.max()
        widths.append(support.max() - support.min())
    # turning points spread apart with n: the parabolic envelope
    assert all(a < b for a, b in zip(widths, widths[1:]))


def test_fock_heatmap_symmetry():
    p0 = ModelParams.from_ratios(0.7, 0.0)
    _, fock0 = projection_heatmaps(converged_spectrum(p0, "+", 40))
    f = fock0.values[:11, :11]
    assert np.max(np.abs(f - f.T)) < 1e-12
    _, fock = projection_heatmaps(converged_spectrum(ModelParams.from_ratios(0.7, 0.25), "+", 40))
    f = fock.values[:11, :11]
    assert np.linalg.norm(f - f.T) / np.linalg.norm(f + f.T) < 0.3


def test_no_block_diagonal_structure(usc_plus):
    shifted, _ = projection_heatmaps(usc_plus)
    a = shifted.values[:9, :9]
    for offset in (0, 1):
        block = lambda i: (i - offset) // 2
        for n in range(2, 9):
            inside = sum(a[m, n] for m in range(9) if block(m) == block(n))
            assert inside / a[:, n].sum() <= 0.999


def test_distances_zero_cases():
    for gbar in (0.5, 2.0):
        p = ModelParams.from_ratios(gbar, 0.0)
        assert distance_basis(0, p) < 1e-12
        assert distance_energy(0, p) < 1e-12
    p = ModelParams.from_ratios(0.0, 0.3)
    assert distance_basis(0, p) == 0
    assert distance_energy(0, p) == pytest.approx(0, abs=1e-14)


def test_distance_regression(usc_params):
    # frozen from the first converged computation
    assert distance_energy(0, usc_params) == pytest.approx(0.0334437915859880, abs=1e-9)
    assert distance_basis(0, usc_params) == pytest.approx(0.0248216521889169, abs=1e-9)


def test_distance_monotone_along_gbar():
    d = [distance_basis(0, ModelParams.from_ratios(g, 0.25)) for g in (0.5, 1.0, 2.0)]
    assert d[0] > d[1] > d[2]


def test_quality_ordering_crossings():
    gb = np.linspace(0.3, 2.5, 45)
    basis, energy, _ = distance_surface(gb, [0.25])

    def last_cross(vals):
        above = np.nonzero(vals[:, 0] >= 0.01)[0]
        return gb[above[-1] + 1]

    g_basis, g_energy = last_cross(basis), last_cross(energy)
    assert g_basis < g_energy
    # regression values on this grid
    assert g_basis == pytest.approx(0.95, abs=0.051)
    assert g_energy == pytest.approx(1.35, abs=0.051)


def test_variant_exact_matches_dynamics(usc_params, usc_plus):
    t = np.linspace(0, 4 * np.pi, 200)
    phi0 = fock_vector(0, usc_plus.dim)
    a = approx_evolution("exact", usc_params, phi0, t, decomp=usc_plus).values
    b = photon_number_series(usc_plus, phi0, t).values
    assert np.allclose(a, b, atol=1e-12)


def test_variants_behaviour(usc_params):
    t = np.linspace(0, 4 * np.pi, 1000)
    dsc = ModelParams.from_ratios(2.0, 0.25)
    series = {v: approx_evolution(v, dsc, times=t).values for v in VARIANTS}
    mean = series["exact"].mean()
    rms = np.sqrt(np.mean((series["full_adiabatic"] - series["exact"]) ** 2)) / mean
    assert rms < 0.05
    with pytest.raises(ValueError):
        approx_evolution("bogus", dsc)


def test_wavepacket_bounds_delta_zero():
    for gbar in (1.0, 2.0):
        dec = converged_spectrum(ModelParams.from_ratios(gbar, 0.0), "+", 40)
        lo, hi = wavepacket_bounds(0, dec)
        assert lo == 0 and hi >= math.ceil(4 * gbar * gbar)


def test_wavepacket_threshold_errors(usc_plus):
    with pytest.raises(ThresholdError):
        wavepacket_bounds(0, usc_plus, threshold=1.0)
    with pytest.raises(ThresholdError):
        wavepacket_bounds(0, usc_plus, threshold=0.0)


def test_distance_surface_parallel_identical():
    gb, db = [0.5, 1.0], [0.1, 0.25]
    a = distance_surface(gb, db)
    b = distance_surface(gb, db, jobs=2)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
