"""Exact time evolution inside one parity chain and derived observables."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import Parity, SpectralDecomposition, converged_spectrum
from .errors import DegeneracyWarning, DimensionError, QRabiError
from .fock import ModelParams, coherent_vector, fock_vector

DEFAULT_TMAX = 8 * math.pi
DEFAULT_STEPS = 2000


@dataclass
class TimeSeries:
    """Samples of an observable on a time grid (times in units of 1/omega)."""

    times: np.ndarray
    values: np.ndarray
    observable: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be a strictly increasing 1-d grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"non-finite samples in {self.observable}")


@dataclass(frozen=True)
class InitialState:
    """Initial chain state descriptor.

    ``kind`` is one of ``fock`` (value = photon number), ``coherent``
    (``e^{-a^2/2} e^{a a^dagger}|0>``), ``cat`` (the adiabatic ground state
    ``D(-a)|0>``, which the chain embedding maps onto the cat states
    ``|C_pm>``) or ``custom``.
    """

    kind: str
    value: float = 0.0
    vector: np.ndarray | None = None

    @classmethod
    def parse(cls, text: str) -> "InitialState":
        kind, _, arg = str(text).partition(":")
        kind = kind.strip().lower()
        if kind not in ("fock", "coherent", "cat"):
            raise ValueError(f"unknown initial state {text!r}; use fock:M, coherent:A or cat:A")
        if not arg:
            raise ValueError(f"initial state {text!r} needs a value, e.g. {kind}:2")
        value = float(arg)
        if kind == "fock":
            if value != int(value) or value < 0:
                raise ValueError(f"Fock index must be a non-negative integer, got {arg}")
            value = int(value)
        return cls(kind, value)

    @classmethod
    def custom(cls, vector) -> "InitialState":
        return cls("custom", 0.0, np.asarray(vector, dtype=complex))

    def label(self) -> str:
        return "custom" if self.kind == "custom" else f"{self.kind}:{self.value:g}"

    def mean_photons(self) -> float:
        """Rough photon content; used to size the truncation."""
        if self.kind == "fock":
            return float(self.value)
        if self.kind in ("coherent", "cat"):
            return float(self.value) ** 2
        n = np.arange(len(self.vector))
        return float(np.sum(n * np.abs(self.vector) ** 2))

    def resolve(self, dim: int) -> np.ndarray:
        if self.kind == "fock":
            return fock_vector(int(self.value), dim)
        if self.kind == "coherent":
            return coherent_vector(self.value, dim)
        if self.kind == "cat":
            return coherent_vector(-self.value, dim)
        vec = np.zeros(dim, dtype=complex)
        if len(self.vector) > dim:
            raise DimensionError(f"custom state has {len(self.vector)} amplitudes, basis only {dim}")
        vec[: len(self.vector)] = self.vector
        return vec / np.linalg.norm(vec)


def _project(decomp: SpectralDecomposition, phi0: np.ndarray) -> np.ndarray:
    phi0 = np.asarray(phi0)
    if phi0.shape != (decomp.dim,):
        raise DimensionError(f"state of length {phi0.shape[0]} does not match chain dim {decomp.dim}")
    return decomp.eigenvectors.T @ phi0


def evolve(decomp: SpectralDecomposition, phi0: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t) phi0`` through the eigenbasis."""
    coeff = _project(decomp, phi0)
    return decomp.eigenvectors @ (np.exp(-1j * decomp.eigenvalues * t) * coeff)


def evolve_series(decomp: SpectralDecomposition, phi0: np.ndarray, times) -> np.ndarray:
    """States at each time, shape ``(len(times), dim)``."""
    coeff = _project(decomp, phi0)
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), decomp.eigenvalues))
    return (phases * coeff) @ decomp.eigenvectors.T


def photon_expectation(phi: np.ndarray) -> float:
    n = np.arange(phi.shape[-1])
    return float(np.sum(n * np.abs(phi) ** 2))


def analytic_delta0(m: int, gbar: float, omega_t):
    """Photon number at delta = 0 starting from ``|m>``."""
    return m + 2 * gbar**2 * (1 - np.cos(omega_t))


def time_grid(tmax: float = DEFAULT_TMAX, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return np.linspace(0.0, tmax, steps)


def _meta(decomp: SpectralDecomposition, label: str | None) -> dict:
    meta = {"params": decomp.params.as_dict(), "parity": decomp.parity.symbol, "dim": decomp.dim}
    if label:
        meta["initial"] = label
    return meta


def photon_number_series(decomp, phi0, times, label=None) -> TimeSeries:
    states = evolve_series(decomp, phi0, times)
    n = np.arange(decomp.dim)
    vals = np.abs(states) ** 2 @ n
    return TimeSeries(times, vals, "photon_number", _meta(decomp, label))


def revival_probability(decomp: SpectralDecomposition, phi0: np.ndarray, t):
    """``|<phi0|phi(t)>|^2``; scalar ``t`` gives a float, arrays an array."""
    coeff = _project(decomp, phi0)
    weights = np.abs(coeff) ** 2
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    amp = np.exp(-1j * np.outer(tt, decomp.eigenvalues)) @ weights
    prob = np.clip(np.abs(amp) ** 2, 0.0, 1.0)
    return prob if np.ndim(t) else float(prob[0])


def revival_series(decomp, phi0, times, label=None) -> TimeSeries:
    return TimeSeries(times, revival_probability(decomp, phi0, np.asarray(times)),
                      "revival_probability", _meta(decomp, label))


def photon_distribution(decomp, phi0, times, label=None) -> TimeSeries:
    """``|<n|phi(t)>|^2`` on the dense (time, n) grid."""
    probs = np.abs(evolve_series(decomp, phi0, times)) ** 2
    return TimeSeries(times, probs, "photon_distribution", _meta(decomp, label))


def energy_expectation(decomp: SpectralDecomposition, phi: np.ndarray) -> float:
    coeff = decomp.eigenvectors.T @ phi
    return float(np.sum(decomp.eigenvalues * np.abs(coeff) ** 2))


def time_avg_photon(decomp: SpectralDecomposition, phi0: np.ndarray, pop_floor: float = 1e-10,
                    gap_tol: float = 1e-9, window: float = 2000.0) -> float:
    """Infinite-time average of the photon number (diagonal ensemble).

    Requires the populated levels to be non-degenerate.  If two levels with
    weight above ``pop_floor`` lie closer than ``gap_tol * omega`` the exact
    average over ``[0, window/omega]`` is returned instead, with a
    :class:`DegeneracyWarning` naming the window.
    """
    coeff = _project(decomp, phi0)
    pops = np.abs(coeff) ** 2
    vecs = decomp.eigenvectors
    n = np.arange(decomp.dim)
    occupied = np.nonzero(pops > pop_floor)[0]
    energies = decomp.eigenvalues[occupied]
    gaps = np.diff(energies)
    omega = decomp.params.omega
    if len(gaps) == 0 or gaps.min() >= gap_tol * omega:
        diag_n = np.einsum("nk,n,nk->k", vecs, n, vecs)
        return float(pops @ diag_n)
    t_end = window / omega
    warnings.warn(f"near-degenerate populated levels (gap {gaps.min():.3g}); "
                  f"falling back to the average over omega*t in [0, {window:g}]",
                  DegeneracyWarning, stacklevel=2)
    sub = vecs[:, occupied]
    c = coeff[occupied]
    nmat = sub.T @ (n[:, None] * sub)
    de = energies[:, None] - energies[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(np.abs(de) * t_end < 1e-12, 1.0,
                       (np.exp(1j * de * t_end) - 1) / (1j * de * t_end))
    return float(np.real(np.conj(c)[:, None] * c[None, :] * nmat * avg).sum())


def jc_time_avg(params: ModelParams) -> float:
    """Time-averaged photon number from the vacuum in the rotating-wave model.

    Returns 0 at ``g = 0`` (no coupling, no photons), although the formula's
    limit along the resonance ``delta = omega/2`` is 1/2.
    """
    g = params.g
    if g == 0:
        return 0.0
    u = params.delta - params.omega / 2
    root = math.hypot(u, g)
    # r = d/g with d = u + sqrt(u^2 + g^2), free of cancellation for u < 0;
    # at resonance r = 1 exactly and the result is exactly 1/2
    r = (u + root) / g if u >= 0 else g / (root - u)
    return 2 * r * r / (1 + r * r) ** 2


@dataclass
class SweepGrid:
    """Time-averaged photon numbers over the (gbar, dbar) plane.

    Matrices are indexed ``[i_gbar, j_dbar]``; invalid cells hold NaN.
    """

    gbar: np.ndarray
    dbar: np.ndarray
    exact: np.ndarray
    jc: np.ndarray
    dims: np.ndarray
    parity: Parity = Parity.PLUS
    omega: float = 1.0
    errors: dict = field(default_factory=dict)

    @property
    def diff(self) -> np.ndarray:
        return self.exact - self.jc

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.exact)


def exact_navg(params: ModelParams, parity=Parity.PLUS, levels: int = 8, tol: float = 1e-10):
    """Vacuum time-averaged photon number and the truncation used."""
    dec = converged_spectrum(params, parity, levels, tol=tol, check_vectors=False)
    return time_avg_photon(dec, fock_vector(0, dec.dim)), dec.dim


def _sweep_cell(args):
    gbar, dbar, omega, parity, levels, tol = args
    params = ModelParams.from_ratios(gbar, dbar, omega)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneracyWarning)
            value, dim = exact_navg(params, parity, levels, tol)
        return value, dim, None
    except QRabiError as exc:
        return float("nan"), 0, str(exc)


def sweep_navg(gbar_axis, dbar_axis, parity=Parity.PLUS, levels: int = 8, tol: float = 1e-10,
               omega: float = 1.0, jobs: int = 1) -> SweepGrid:
    """Exact vs rotating-wave time-averaged photon number from the vacuum.

    Cells are independent; with ``jobs > 1`` they run in worker processes
    and are merged by grid index, so the output does not depend on ``jobs``.
    """
    gbar_axis = np.asarray(gbar_axis, dtype=float)
    dbar_axis = np.asarray(dbar_axis, dtype=float)
    if gbar_axis.size == 0 or dbar_axis.size == 0:
        raise ValueError("sweep axes must be non-empty")
    parity = Parity.parse(parity)
    cells = [(float(gb), float(db), omega, parity, levels, tol)
             for gb in gbar_axis for db in dbar_axis]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_cell, cells, chunksize=max(1, len(cells) // (8 * jobs))))
    else:
        results = [_sweep_cell(c) for c in cells]
    shape = (gbar_axis.size, dbar_axis.size)
    exact = np.array([r[0] for r in results]).reshape(shape)
    dims = np.array([r[1] for r in results]).reshape(shape)
    errors = {(i // shape[1], i % shape[1]): r[2] for i, r in enumerate(results) if r[2]}
    jc = np.array([[jc_time_avg(ModelParams.from_ratios(gb, db, omega)) for db in dbar_axis]
                   for gb in gbar_axis])
    return SweepGrid(gbar_axis, dbar_axis, exact, jc, dims, parity, omega, errors)


def zero_contour(grid: SweepGrid, level: float = 0.0, field_name: str = "diff"):
    """Polylines ``[(gbar_array, dbar_array), ...]`` where the field equals ``level``."""
    return contour_lines(grid.gbar, grid.dbar, getattr(grid, field_name), level)


def contour_lines(x_axis, y_axis, values, level: float):
    """Iso-lines of ``values[i_x, j_y]`` as a list of ``(x, y)`` arrays."""
    import contourpy

    z = np.ma.masked_invalid(np.asarray(values, dtype=float).T)
    gen = contourpy.contour_generator(np.asarray(x_axis), np.asarray(y_axis), z,
                                      line_type=contourpy.LineType.Separate)
    return [(seg[:, 0], seg[:, 1]) for seg in gen.lines(level)]


def band_power_fraction(times, values, freq: float, half_width: float | None = None) -> float:
    """Share of the fluctuation power of ``values`` within ``freq +- half_width``.

    ``times`` must be uniform.  Frequencies are angular (same units as
    ``omega``); the default half width is one frequency bin.
    """
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0]
    fluct = np.asarray(values, dtype=float) - np.mean(values)
    power = np.abs(np.fft.rfft(fluct)) ** 2
    freqs = 2 * np.pi * np.fft.rfftfreq(len(times), dt)
    if half_width is None:
        half_width = freqs[1]
    total = power[1:].sum()
    if total == 0:
        return 0.0
    band = (np.abs(freqs - freq) <= half_width * (1 + 1e-9)) & (freqs > 0)
    return float(power[band].sum() / total)
