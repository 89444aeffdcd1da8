"""Parity-chain Hamiltonians and their exact diagonalization.

Within the parity sector ``P = sigma_z exp(i pi a^dagger a) = +-1`` the Rabi
Hamiltonian acts on the bosonic space alone as

    H_pm = omega a^dagger a + g (a + a^dagger) +- delta (-1)^{a^dagger a},

a real symmetric tridiagonal matrix in the Fock basis.
"""
from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ComputationError, ConvergenceError, DimensionError
from .fock import ModelParams

DEFAULT_NMAX_CAP = 8192


class Parity(enum.IntEnum):
    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, Parity):
            return value
        text = str(value).strip()
        if text in ("+", "+1", "1", "plus", "PLUS"):
            return cls.PLUS
        if text in ("-", "-1", "minus", "MINUS"):
            return cls.MINUS
        raise ValueError(f"parity must be '+' or '-', got {value!r}")

    @property
    def symbol(self) -> str:
        return "+" if self is Parity.PLUS else "-"


def nmax_cap() -> int:
    env = os.environ.get("RABI_NMAX_CAP")
    return int(env) if env else DEFAULT_NMAX_CAP


@dataclass(frozen=True)
class ChainHamiltonian:
    params: ModelParams
    parity: Parity
    dim: int
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return (np.diag(self.diagonal) + np.diag(self.offdiagonal, 1)
                + np.diag(self.offdiagonal, -1))

    def norm(self) -> float:
        """Cheap upper bound on the spectral norm (max absolute row sum)."""
        rows = np.abs(self.diagonal).copy()
        rows[:-1] += np.abs(self.offdiagonal)
        rows[1:] += np.abs(self.offdiagonal)
        return float(rows.max())

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-vector product without forming the dense matrix."""
        out = self.diagonal * vec
        out[:-1] += self.offdiagonal * vec[1:]
        out[1:] += self.offdiagonal * vec[:-1]
        return out


def build_chain(params: ModelParams, parity, dim: int) -> ChainHamiltonian:
    if dim < 2:
        raise DimensionError(f"chain needs dim >= 2, got {dim}")
    parity = Parity.parse(parity)
    n = np.arange(dim, dtype=float)
    alt = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    diag = params.omega * n + int(parity) * params.delta * alt
    off = params.g * np.sqrt(np.arange(1, dim, dtype=float))
    return ChainHamiltonian(params, parity, dim, diag, off)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a chain Hamiltonian, eigenvalues ascending.

    ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    params: ModelParams
    parity: Parity
    dim: int
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each eigenvector made positive
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def diagonalize(h: ChainHamiltonian) -> SpectralDecomposition:
    try:
        vals, vecs = eigh_tridiagonal(h.diagonal, h.offdiagonal)
    except LinAlgError as exc:
        raise ComputationError(
            f"tridiagonal eigensolver failed for {h.params} parity {h.parity.symbol} "
            f"dim {h.dim}: {exc}") from exc
    return SpectralDecomposition(vals, _fix_signs(vecs), h.params, h.parity, h.dim)


def _lowest_eigenvalues(h: ChainHamiltonian, k: int) -> np.ndarray:
    try:
        return eigh_tridiagonal(h.diagonal, h.offdiagonal, eigvals_only=True,
                                select="i", select_range=(0, k - 1))
    except LinAlgError as exc:
        raise ComputationError(f"eigensolver failed at dim {h.dim}: {exc}") from exc


def initial_dim(params: ModelParams, n_levels: int) -> int:
    return max(64, int(math.ceil(16 * params.gbar**2 + 8 * n_levels)))


def converged_spectrum(params: ModelParams, parity, n_levels: int, tol: float = 1e-10,
                       cap: int | None = None, start_dim: int | None = None,
                       check_vectors: bool = True) -> SpectralDecomposition:
    """Diagonalize with the truncation doubled until the lowest ``n_levels``
    eigenvalues move by less than ``tol`` between rounds.

    The returned decomposition is the full one at the final dimension;
    ``info`` records the dimensions visited, the last eigenvalue change and
    the worst overlap between the final and previous-round eigenvectors
    (skipped, and recorded as NaN, with ``check_vectors=False``).
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    cap = nmax_cap() if cap is None else cap
    dim = start_dim or initial_dim(params, n_levels)
    dim = max(dim, n_levels + 1, 2)
    if dim > cap:
        raise ConvergenceError(f"initial truncation {dim} already exceeds cap {cap}; "
                               "raise RABI_NMAX_CAP")
    previous = _lowest_eigenvalues(build_chain(params, parity, dim), n_levels)
    visited = [dim]
    while True:
        new_dim = 2 * dim
        if new_dim > cap:
            raise ConvergenceError(
                f"lowest {n_levels} levels not converged to {tol:g} below cap {cap} "
                f"(dims tried: {visited}); raise RABI_NMAX_CAP or loosen --tol")
        current = _lowest_eigenvalues(build_chain(params, parity, new_dim), n_levels)
        change = float(np.max(np.abs(current - previous)))
        visited.append(new_dim)
        if change < tol:
            break
        previous, dim = current, new_dim
    # `dim` is the smaller of the last two rounds and already meets the tolerance
    final = diagonalize(build_chain(params, parity, dim))
    worst = float("nan")
    if check_vectors:
        check = diagonalize(build_chain(params, parity, 2 * dim))
        overlaps = np.abs(np.sum(final.eigenvectors[:, :n_levels]
                                 * check.eigenvectors[:dim, :n_levels], axis=0))
        worst = float(overlaps.min())
    if worst < 1 - 1e-8:
        warnings.warn(f"eigenvector overlap between dims {dim} and {2 * dim} only {worst:.12f}",
                      RuntimeWarning, stacklevel=2)
    info = {"dims": visited, "eigenvalue_change": change, "eigvec_overlap": worst}
    return SpectralDecomposition(final.eigenvalues, final.eigenvectors, params,
                                 final.parity, dim, info)


@dataclass(frozen=True)
class QubitFieldState:
    """Field amplitudes attached to the qubit states ``|e>`` and ``|g>``."""

    excited: np.ndarray
    ground: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.excited, self.excited).real
                             + np.vdot(self.ground, self.ground).real))

    def as_vector(self) -> np.ndarray:
        """Flatten to the ordering ``field (x) qubit`` with qubit index (e, g)."""
        return np.stack([self.excited, self.ground], axis=1).reshape(-1)


def even_odd_parts(phi: np.ndarray):
    even = np.arange(len(phi)) % 2 == 0
    return np.where(even, phi, 0), np.where(even, 0, phi)


def lift_to_full(phi: np.ndarray, parity) -> QubitFieldState:
    """Embed a chain state into the qubit (x) field space."""
    parity = Parity.parse(parity)
    sym, anti = even_odd_parts(np.asarray(phi, dtype=complex))
    if parity is Parity.PLUS:
        return QubitFieldState(excited=sym, ground=anti)
    return QubitFieldState(excited=anti, ground=sym)


def apply_parity_operator(state: QubitFieldState) -> QubitFieldState:
    """Apply ``sigma_z exp(i pi a^dagger a)`` with ``sigma_z|e> = |e>``."""
    alt = (-1.0) ** np.arange(len(state.excited))
    return QubitFieldState(excited=alt * state.excited, ground=-alt * state.ground)
