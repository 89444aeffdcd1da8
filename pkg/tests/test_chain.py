import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrabi.chain import (Parity, apply_parity_operator, build_chain, converged_spectrum,
                         diagonalize, initial_dim, lift_to_full)
from qrabi.errors import ConvergenceError, DimensionError
from qrabi.fock import ModelParams, displacement_matrix, fock_vector


def test_parity_parse():
    assert Parity.parse("+") is Parity.PLUS
    assert Parity.parse("-1") is Parity.MINUS
    with pytest.raises(ValueError):
        Parity.parse("0")


def test_chain_entries():
    p = ModelParams(omega=1.0, delta=0.3, g=0.5)
    h = build_chain(p, "+", 6)
    assert h.matrix[3, 2] == pytest.approx(0.5 * np.sqrt(3))
    assert h.diagonal[2] == pytest.approx(2 + 0.3)
    assert h.diagonal[3] == pytest.approx(3 - 0.3)
    hm = build_chain(p, "-", 6)
    assert hm.diagonal[0] == pytest.approx(-0.3)
    mat = h.matrix
    assert np.count_nonzero(np.triu(mat, 2)) == 0
    vec = np.arange(6.0)
    assert np.allclose(h.apply(vec), mat @ vec)


def test_chain_rejects_small():
    with pytest.raises(DimensionError):
        build_chain(ModelParams(), "+", 1)


def test_uncoupled_spectrum():
    p = ModelParams(omega=1.0, delta=0.25, g=0.0)
    dec = diagonalize(build_chain(p, "+", 10))
    n = np.arange(10)
    assert np.allclose(dec.eigenvalues, np.sort(n + 0.25 * (-1.0) ** n), atol=1e-14)


def test_delta_zero_shifted_spectrum():
    p = ModelParams.from_ratios(2.0, 0.0)
    dec = converged_spectrum(p, "+", 5, tol=1e-10)
    assert np.max(np.abs(dec.eigenvalues[:5] - (np.arange(5) - 4.0))) < 1e-10


def test_reconstruction_and_orthonormality(usc_params):
    h = build_chain(usc_params, "+", 80)
    dec = diagonalize(h)
    v, e = dec.eigenvectors, dec.eigenvalues
    norm = h.norm()
    assert np.max(np.abs(v @ np.diag(e) @ v.T - h.matrix)) < 1e-10 * norm
    assert np.max(np.abs(v.T @ v - np.eye(80))) < 1e-10
    resid = h.matrix @ v - v * e
    assert np.max(np.abs(resid)) < 1e-10 * norm


def test_sign_convention(usc_plus):
    v = usc_plus.eigenvectors
    pivot = np.argmax(np.abs(v), axis=0)
    assert np.all(v[pivot, np.arange(v.shape[1])] > 0)


def test_variational_lowering():
    p = ModelParams(omega=1.0, delta=0.25, g=0.25)
    e0 = converged_spectrum(p, "+", 1).eigenvalues[0]
    bare = min(n + 0.25 * (-1) ** n for n in range(10))
    assert e0 < bare


def test_nearly_equidistant(usc_plus, usc_params):
    x = usc_plus.eigenvalues[:8] + usc_params.g * usc_params.gbar
    gaps = np.diff(x)
    assert np.all(np.abs(gaps - 1.0) < 0.3)


def test_convergence_dimension(usc_params):
    dec = converged_spectrum(usc_params, "+", 10, tol=1e-10)
    assert dec.dim <= 256
    assert dec.info["eigenvalue_change"] < 1e-10
    assert dec.info["eigvec_overlap"] > 1 - 1e-8
    assert initial_dim(usc_params, 10) == 88


def test_uncoupled_converges_first_round():
    dec = converged_spectrum(ModelParams(delta=0.2), "+", 1)
    assert dec.info["dims"] == [64, 128]
    assert dec.dim == 64


def test_cap_raises(monkeypatch):
    monkeypatch.setenv("RABI_NMAX_CAP", "100")
    with pytest.raises(ConvergenceError, match="RABI_NMAX_CAP"):
        converged_spectrum(ModelParams.from_ratios(2.0, 0.25), "+", 10)


def test_non_degenerate_low_levels(usc_params):
    for parity in "+-":
        e = converged_spectrum(usc_params, parity, 20).eigenvalues[:20]
        assert np.min(np.diff(e)) > 1e-8


@settings(max_examples=15, deadline=None)
@given(gbar=st.floats(0.05, 1.5), dbar=st.floats(0.0, 1.0))
def test_gauge_invariance(gbar, dbar):
    dim = 120
    p = ModelParams.from_ratios(gbar, dbar)
    h = build_chain(p, "+", dim)
    e = diagonalize(h).eigenvalues[:10]
    flipped = np.linalg.eigvalsh(np.diag(h.diagonal) - np.diag(h.offdiagonal, 1)
                                 - np.diag(h.offdiagonal, -1))[:10]
    assert np.max(np.abs(e - flipped)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(gbar=st.floats(0.05, 1.5), dbar=st.floats(0.0, 1.0))
def test_parity_delta_relation(gbar, dbar):
    dim = 120
    p = ModelParams.from_ratios(gbar, dbar)
    e_plus = diagonalize(build_chain(p, "+", dim)).eigenvalues[:10]
    hm = build_chain(p, "-", dim)
    # H_-(delta) with delta -> -delta has the diagonal of H_+(delta)
    n = np.arange(dim)
    diag = n - (-dbar) * (-1.0) ** n
    e_minus = np.linalg.eigvalsh(np.diag(diag) + np.diag(hm.offdiagonal, 1)
                                 + np.diag(hm.offdiagonal, -1))[:10]
    assert np.max(np.abs(e_plus - e_minus)) < 1e-10


def test_lift_fock_states():
    s = lift_to_full(fock_vector(0, 4), "+")
    assert s.excited[0] == 1 and not np.any(s.ground)
    s = lift_to_full(fock_vector(1, 4), "+")
    assert s.ground[1] == 1 and not np.any(s.excited)
    s = lift_to_full(fock_vector(1, 4), "-")
    assert s.excited[1] == 1


def test_lift_cat_structure():
    gbar, dim = 1.3, 60
    phi = displacement_matrix(-gbar, dim)[:, 0]
    for parity in (Parity.PLUS, Parity.MINUS):
        s = lift_to_full(phi, parity)
        cosh_part, sinh_part = (s.excited, s.ground) if parity is Parity.PLUS else (s.ground, s.excited)
        assert np.all(cosh_part[1::2] == 0) and np.all(sinh_part[0::2] == 0)
        # D(-g)|0> has odd amplitudes of sign -1: the "minus sinh" component
        assert np.all(sinh_part[1:12:2].real < 0)
        assert s.norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("parity", [Parity.PLUS, Parity.MINUS])
def test_lift_is_parity_eigenstate(usc_plus, parity):
    phi = usc_plus.eigenvectors[:, 3]
    s = lift_to_full(phi, parity)
    ps = apply_parity_operator(s)
    assert np.allclose(ps.as_vector(), int(parity) * s.as_vector(), atol=1e-14)
