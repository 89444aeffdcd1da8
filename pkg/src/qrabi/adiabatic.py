"""Shifted-oscillator (adiabatic) description of a parity chain.

The zeroth-order Hamiltonian ``H_0 = omega a^dagger a + g (a + a^dagger)``
has eigenstates ``|n;g> = D(-gbar)|n>`` with energies ``n omega - g gbar``.
The modules here compare the true chain eigenpairs against that basis.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chain import Parity, SpectralDecomposition, converged_spectrum, build_chain, diagonalize
from .dynamics import TimeSeries
from .errors import ThresholdError
from .fock import ModelParams, displacement_matrix, fock_vector, required_dim

VARIANTS = ("exact", "adiabatic_basis_exact_spectrum", "full_adiabatic")


@dataclass(frozen=True)
class ShiftedBasis:
    """Column ``n`` of ``matrix`` is ``|n;g>`` in Fock coordinates."""

    gbar: float
    dim: int
    matrix: np.ndarray

    def coordinates(self, phi: np.ndarray) -> np.ndarray:
        """Amplitudes ``<m;g|phi>``."""
        return self.matrix.T @ phi


def shifted_basis(gbar: float, dim: int) -> ShiftedBasis:
    if gbar * gbar > dim / 8:
        from .errors import TruncationWarning
        warnings.warn(f"shifted basis with gbar={gbar:g} needs more than {dim} states",
                      TruncationWarning, stacklevel=2)
    return ShiftedBasis(gbar, dim, displacement_matrix(-gbar, dim))


def shifted_overlap(n: int, gbar: float) -> float:
    """``<n,g|n,-g> = <n|D(2 gbar)|n>`` from the padded matrix exponential."""
    dim = max(n + 1, 8)
    return float(displacement_matrix(2 * gbar, dim, method="expm",
                                      pad=required_dim(2 * gbar) + n, warn=False)[n, n])


def first_order_energies(params: ModelParams, count: int, parity=Parity.PLUS) -> np.ndarray:
    """``n omega - g gbar +- delta (-1)^n <n,g|n,-g>`` for ``n < count``."""
    sgn = int(Parity.parse(parity))
    gbar = params.gbar
    dim = count
    diag = np.diag(displacement_matrix(2 * gbar, dim, method="expm",
                                       pad=required_dim(2 * gbar) + count, warn=False))
    n = np.arange(count)
    return params.omega * n - params.g * gbar + sgn * params.delta * (-1.0) ** n * diag


@dataclass(frozen=True)
class ProjectionHeatmap:
    """``values[m, n] = |<m; basis|psi_n>|^2``."""

    values: np.ndarray
    basis: str
    params: ModelParams
    parity: Parity


def projection_heatmaps(decomp: SpectralDecomposition, gbar: float | None = None, size: int = 31):
    """Shifted-oscillator and Fock projections of the lowest ``size`` eigenstates."""
    gbar = decomp.params.gbar if gbar is None else gbar
    size = min(size, decomp.dim)
    vecs = decomp.eigenvectors[:, :size]
    basis = displacement_matrix(-gbar, decomp.dim)
    shifted = (basis.T @ vecs)[:size] ** 2
    fock = vecs[:size] ** 2
    return (ProjectionHeatmap(shifted, "shifted", decomp.params, decomp.parity),
            ProjectionHeatmap(fock, "fock", decomp.params, decomp.parity))


def _decomposition(params: ModelParams, n: int, parity, decomp):
    if decomp is None:
        decomp = converged_spectrum(params, parity, n + 2, tol=1e-12)
    gaps = np.diff(decomp.eigenvalues[: n + 2])
    if np.any(gaps < 1e-6 * params.omega):
        warnings.warn(f"near crossing among the lowest {n + 2} levels; index matching "
                      "of eigenstates to shifted oscillators may be ambiguous",
                      RuntimeWarning, stacklevel=3)
    return decomp


def distance_basis(n: int, params: ModelParams, parity=Parity.PLUS, decomp=None) -> float:
    """``1 - |<n;g|psi_n>|^2``."""
    decomp = _decomposition(params, n, parity, decomp)
    column = displacement_matrix(-params.gbar, decomp.dim)[:, n]
    overlap = column @ decomp.eigenvectors[:, n]
    return float(min(max(1.0 - overlap * overlap, 0.0), 1.0))


def distance_energy(n: int, params: ModelParams, parity=Parity.PLUS, decomp=None) -> float:
    """``|E_n^(1) - E_n|`` with the first-order adiabatic energy."""
    decomp = _decomposition(params, n, parity, decomp)
    approx = first_order_energies(params, n + 1, parity)[n]
    return float(abs(approx - decomp.eigenvalues[n]))


def approx_evolution(variant: str, params: ModelParams, phi0=None, times=None,
                     parity=Parity.PLUS, decomp=None) -> TimeSeries:
    """Photon number ``n(t)`` under one of three descriptions of the chain.

    ``exact`` uses the true eigenpairs, ``adiabatic_basis_exact_spectrum``
    swaps the eigenvectors for ``|n;g>``, and ``full_adiabatic`` also swaps
    the energies for their first-order values.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    parity = Parity.parse(parity)
    if decomp is None:
        decomp = converged_spectrum(params, parity, 40, tol=1e-10)
    dim = decomp.dim
    if phi0 is None:
        phi0 = fock_vector(0, dim)
    if times is None:
        times = np.linspace(0, 4 * np.pi, 1000)
    times = np.asarray(times, dtype=float)
    if variant == "exact":
        vecs, energies = decomp.eigenvectors, decomp.eigenvalues
    else:
        vecs = displacement_matrix(-params.gbar, dim)
        energies = decomp.eigenvalues
        if variant == "full_adiabatic":
            energies = first_order_energies(params, dim, parity)
    coeff = vecs.T @ phi0
    states = (np.exp(-1j * np.outer(times, energies)) * coeff) @ vecs.T
    n = np.arange(dim)
    values = np.abs(states) ** 2 @ n
    meta = {"params": params.as_dict(), "parity": parity.symbol, "dim": dim, "variant": variant}
    return TimeSeries(times, values, "photon_number", meta)


def wavepacket_bounds(n_init: int, decomp: SpectralDecomposition, threshold: float = 1e-3):
    """Photon-number range reachable from ``|n_init>``.

    Eigenstates with ``|<n_init|psi_k>|^2 >= threshold`` are selected and the
    smallest and largest Fock index carrying at least ``threshold`` weight in
    any of them is returned.
    """
    if not 0 < threshold < 1:
        raise ThresholdError(f"threshold must lie in (0, 1), got {threshold}")
    weights = decomp.eigenvectors ** 2
    chosen = np.nonzero(weights[n_init] >= threshold)[0]
    if len(chosen) == 0:
        raise ThresholdError(f"no eigenstate has weight >= {threshold} on |{n_init}>")
    rows = np.nonzero(np.any(weights[:, chosen] >= threshold, axis=1))[0]
    return int(rows.min()), int(rows.max())


def chain_decomposition(params: ModelParams, parity=Parity.PLUS, dim: int | None = None,
                        levels: int = 40, tol: float = 1e-10) -> SpectralDecomposition:
    """Fixed-``dim`` diagonalization when ``dim`` is given, converged otherwise."""
    if dim:
        return diagonalize(build_chain(params, parity, dim))
    return converged_spectrum(params, parity, levels, tol=tol)


def _distance_cell(args):
    gbar, dbar, omega, n, parity = args
    params = ModelParams.from_ratios(gbar, dbar, omega)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        decomp = converged_spectrum(params, parity, n + 2, tol=1e-12, check_vectors=False)
        return (distance_basis(n, params, parity, decomp),
                distance_energy(n, params, parity, decomp) / omega, decomp.dim)


def distance_surface(gbar_axis, dbar_axis, n: int = 0, parity=Parity.PLUS, omega: float = 1.0,
                     jobs: int = 1):
    """``D_n`` and ``D_n^E / omega`` over a grid, arrays indexed ``[i_gbar, j_dbar]``.

    Returns ``(basis, energy, dims)``.  Cells are merged by grid index, so the
    result does not depend on ``jobs``.
    """
    from concurrent.futures import ProcessPoolExecutor

    gbar_axis = np.asarray(gbar_axis, dtype=float)
    dbar_axis = np.asarray(dbar_axis, dtype=float)
    parity = Parity.parse(parity)
    cells = [(float(gb), float(db), omega, n, parity) for gb in gbar_axis for db in dbar_axis]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_distance_cell, cells, chunksize=max(1, len(cells) // (8 * jobs))))
    else:
        results = [_distance_cell(c) for c in cells]
    shape = (gbar_axis.size, dbar_axis.size)
    arr = np.array(results)
    return arr[:, 0].reshape(shape), arr[:, 1].reshape(shape), arr[:, 2].astype(int).reshape(shape)
