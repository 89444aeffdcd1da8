import math

import numpy as np
import pytest

from qrabi.chain import converged_spectrum
from qrabi.errors import PoleProximityError, RepresentationMismatchError
from qrabi.fock import ModelParams, displacement_matrix
from qrabi.gfunction import (GFunctionEvaluator, eigenstate_from_root, find_roots, g_value,
                             k_coefficients, oracle_roots, shifted_coefficients)

USC = ModelParams.from_ratios(0.7, 0.25)


def test_k0_is_one():
    for x in (-0.3, 0.5, 2.7):
        assert k_coefficients(x, USC, 5)[0] == 1.0


def test_k_recurrence_by_hand():
    # direct evaluation of m K_m = f_{m-1} K_{m-1} - K_{m-2}
    x, gb, db = 0.37, 0.7, 0.25
    f = lambda m: 2 * gb + (m - x + db * db / (x - m)) / (2 * gb)
    k = [1.0, f(0)]
    for m in range(2, 8):
        k.append((f(m - 1) * k[-1] - k[-2]) / m)
    assert np.allclose(k_coefficients(x, USC, 7), k, rtol=1e-12)


def test_g_requires_coupling():
    with pytest.raises(ValueError):
        GFunctionEvaluator(ModelParams(delta=0.25))


def test_pole_guard():
    with pytest.raises(PoleProximityError):
        g_value(1.0 + 1e-11, "+", USC)


def test_pole_sign_flip():
    below = g_value(1 - 1e-5, "+", USC)
    above = g_value(1 + 1e-5, "+", USC)
    assert abs(below) > 1e3 and abs(above) > 1e3
    assert np.sign(below) != np.sign(above)
    assert np.isfinite(g_value(0.5, "+", USC))


def test_minus_is_plus_with_negated_delta():
    ev_minus = GFunctionEvaluator(USC, "-")
    x = np.array([-0.2, 0.4, 1.5, 3.3])
    # G_- carries 1 + delta/(x - m); compare against an explicit series
    total = np.zeros_like(x)
    for i, xv in enumerate(x):
        k = k_coefficients(xv, USC, 120)
        m = np.arange(121)
        total[i] = np.sum(k * (1 + 0.25 / (xv - m)) * 0.7 ** m)
    assert np.allclose(ev_minus(x), total, rtol=1e-10)


def test_delta_zero_limit():
    p = ModelParams.from_ratios(0.7, 0.0)
    r = find_roots(p, "+", 6.5)
    assert np.array_equal(r.roots, np.arange(7.0))
    assert r.info["delta_zero_limit"]
    dec = converged_spectrum(p, "+", 7)
    assert np.allclose(r.eigenvalues, dec.eigenvalues[:7], atol=1e-10)


def test_roots_match_oracle_first_ten():
    r = find_roots(USC, "+", 12.0, cross_check=True)
    ref = oracle_roots(USC, "+", 10)
    assert len(r) >= 10
    assert np.max(np.abs(r.roots[:10] - ref)) < 1e-6
    assert np.all(np.diff(r.roots) > 0)
    assert np.max(r.residuals) < 1e-6


def test_sign_change_across_oracle():
    ref = oracle_roots(USC, "+", 5)
    for x in ref:
        assert np.sign(g_value(x - 1e-6, "+", USC)) != np.sign(g_value(x + 1e-6, "+", USC))


def test_near_equidistant_small_ratio():
    r = find_roots(ModelParams.from_ratios(2.0, 0.1), "+", 10.5)
    gaps = np.diff(r.roots[:10])
    assert np.all(np.abs(gaps - 1.0) < 0.1)


def test_adiabatic_convergence_of_roots():
    worst = []
    for gbar in (1.0, 1.5, 2.0, 3.0):
        r = find_roots(ModelParams.from_ratios(gbar, 0.25), "+", 6.5)
        worst.append(np.max(np.abs(r.roots[:6] - np.arange(6))))
    assert all(a > b for a, b in zip(worst, worst[1:]))


def test_root_counts_per_interval_minus_parity():
    p = ModelParams.from_ratios(1.0, 0.5)
    r = find_roots(p, "-", 8.0, cross_check=True)
    assert len(r) == len(oracle_roots(p, "-", 12)[oracle_roots(p, "-", 12) < 8.0])


@pytest.mark.parametrize("n", range(6))
def test_eigenstate_from_root(n, usc_plus):
    x = oracle_roots(USC, "+", 6)[n]
    root = find_roots(USC, "+", x + 0.5).roots[n]
    vec = eigenstate_from_root(root, USC, usc_plus.dim, "+")
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-10)
    fid = abs(np.vdot(usc_plus.eigenvectors[:, n], vec)) ** 2
    assert fid >= 0.999


def test_eigenstate_dominant_shifted_term():
    p = ModelParams.from_ratios(3.0, 0.25)
    roots = find_roots(p, "+", 4.5).roots
    for n in range(4):
        c = shifted_coefficients(roots[n], p, 60)
        assert int(np.argmax(np.abs(c))) == n


def test_eigenstate_mismatch_raises():
    bogus = 0.5  # not a root
    with pytest.raises(RepresentationMismatchError):
        eigenstate_from_root(bogus, USC, 88, "+")


def test_eigenstate_delta_zero_is_shifted_oscillator():
    p = ModelParams.from_ratios(1.0, 0.0)
    vec = eigenstate_from_root(2.0, p, 80, "+")
    ref = displacement_matrix(-1.0, 80)[:, 2]
    assert abs(np.vdot(ref, vec)) == pytest.approx(1.0, abs=1e-12)


def test_delta_zero_series_has_no_zeros():
    # every pole residue vanishes with delta; the roots x_n = n omega are a limit
    ev = GFunctionEvaluator(ModelParams.from_ratios(0.7, 0.0))
    vals = ev(np.linspace(-0.9, 5.9, 300))
    assert np.all(vals > 0)
    near = [abs(g_value(1.0 - 1e-4, "+", ModelParams.from_ratios(0.7, d))) for d in (1e-2, 1e-3)]
    assert near[0] > near[1]
