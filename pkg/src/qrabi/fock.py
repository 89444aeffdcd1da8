"""Truncated Fock-space primitives.

States are plain complex (or real) numpy vectors over the Fock basis
``|0>, ..., |N-1>``; operators are dense ``N x N`` arrays.  Units are
hbar = 1 throughout.
"""
from __future__ import annotations

import math
from fractions import Fraction
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import DimensionError, TruncationWarning


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the Rabi Hamiltonian.

    ``delta`` is half the qubit splitting, ``g`` the coupling strength and
    ``omega`` the mode frequency.
    """

    omega: float = 1.0
    delta: float = 0.0
    g: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")

    @classmethod
    def from_ratios(cls, gbar: float, dbar: float, omega: float = 1.0) -> "ModelParams":
        return cls(omega=omega, delta=dbar * omega, g=gbar * omega)

    @property
    def gbar(self) -> float:
        return self.g / self.omega

    @property
    def dbar(self) -> float:
        return self.delta / self.omega

    def as_dict(self) -> dict:
        return {"omega": self.omega, "delta": self.delta, "g": self.g}


def required_dim(shift: float) -> int:
    """Smallest truncation considered safe for a displacement of ``shift``."""
    return int(math.ceil(4.0 * shift * shift + 20))


def check_truncation(shift: float, dim: int, what: str = "displacement") -> bool:
    need = required_dim(shift)
    if shift != 0 and dim < need:
        warnings.warn(
            f"{what} of {shift:g} in a basis of {dim} states leaks out of the "
            f"truncated space; use at least {need} states",
            TruncationWarning,
            stacklevel=3,
        )
        return False
    return True


def ladder_matrices(dim: int):
    """Return ``(a, a_dagger, number)`` on a ``dim``-state Fock space."""
    if dim < 2:
        raise DimensionError(f"ladder operators need dim >= 2, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    a_dag = a.conj().T
    number = np.diag(np.arange(dim, dtype=float))
    return a, a_dag, number


def assoc_laguerre(m: int, k: float, x):
    """Associated Laguerre polynomial ``L_m^k(x)`` by upward recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for j in range(m):
        prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    return cur


def assoc_laguerre_series(m: int, k: int, x):
    """Explicit sum representation of ``L_m^k(x)``; used as a cross-check.

    The alternating sum is accumulated in exact rational arithmetic, so the
    only rounding is the final conversion to float.
    """
    x = np.asarray(x, dtype=float)
    coeffs = [Fraction((-1) ** j * math.comb(m + k, m - j), math.factorial(j))
              for j in range(m + 1)]
    out = np.empty(x.shape)
    for idx, xv in np.ndenumerate(x):
        xf = Fraction(float(xv))
        total = Fraction(0)
        for c in reversed(coeffs):
            total = total * xf + c
        out[idx] = float(total)
    return out


def _displacement_real(r, rows: int, cols: int | None = None) -> np.ndarray:
    """``<m|D(r)|n>`` for ``m < rows``, ``n < cols`` and an array of ``r >= 0``.

    Returns an array of shape ``r.shape + (rows, cols)``.  Each diagonal
    ``m - n = k`` is generated by the Laguerre recurrence rescaled so that
    every intermediate is a matrix element (bounded by one), which keeps
    large ``k`` and ``n`` free of overflow.
    """
    cols = rows if cols is None else cols
    if cols > rows:
        raise DimensionError("displacement block needs rows >= cols")
    r = np.asarray(r, dtype=float)
    shape = r.shape
    r = r.reshape(-1)
    y = r * r
    out = np.zeros((r.size, rows, cols))
    ks = np.arange(rows, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        # w0[p, k] = r^k e^{-y/2} / sqrt(k!)
        expo = np.outer(np.log(r), ks) - 0.5 * y[:, None] - 0.5 * gammaln(ks + 1)[None, :]
    expo[:, 0] = -0.5 * y
    w_prev = np.zeros_like(expo)
    w_cur = np.exp(expo)
    signs = (-1.0) ** ks
    for n in range(cols):
        width = rows - n
        out[:, n:, n] = w_cur[:, :width]
        upper = cols - n
        out[:, n, n:cols] = w_cur[:, :upper] * signs[:upper]
        if n + 1 == cols:
            break
        kk = ks[: width - 1]
        nxt = ((2 * n + 1 + kk - y[:, None]) * w_cur[:, : width - 1]
               - np.sqrt(n * (n + kk)) * w_prev[:, : width - 1])
        nxt /= np.sqrt((n + 1) * (n + kk + 1))
        w_prev, w_cur = w_cur[:, : width - 1], nxt
    return out.reshape(shape + (rows, cols))


def displacement_matrix(shift: float, dim: int, method: str = "laguerre", pad: int | None = None,
                        warn: bool = True) -> np.ndarray:
    """Matrix of ``D(x) = exp(x a^dagger - x a)`` for real ``x``.

    ``method="laguerre"`` returns the exact (untruncated) matrix elements
    restricted to the first ``dim`` states.  ``method="expm"`` exponentiates
    the generator on ``dim + pad`` states and crops; with ``pad=0`` this is
    the plain truncated-space exponential.  ``warn=False`` silences the
    truncation warning for callers that only want individual elements.
    """
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    if warn:
        check_truncation(shift, dim)
    if shift == 0:
        return np.eye(dim)
    if method == "laguerre":
        mat = _displacement_real(abs(shift), dim)
        if shift < 0:
            mat = mat.T.copy()
        return mat
    if method == "expm":
        if pad is None:
            pad = max(20, int(math.ceil(8 * shift * shift)))
        big = dim + pad
        if big < 2:
            return np.eye(dim)
        a, a_dag, _ = ladder_matrices(big)
        return expm(shift * (a_dag - a))[:dim, :dim]
    raise ValueError(f"unknown method {method!r}")


def fock_vector(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise DimensionError(f"Fock state |{n}> outside basis of {dim} states")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def coherent_vector(alpha: float, dim: int) -> np.ndarray:
    """Normalized coherent state ``e^{-alpha^2/2} e^{alpha a^dagger}|0>``."""
    check_truncation(alpha, dim, what="coherent amplitude")
    n = np.arange(dim)
    if alpha == 0:
        return fock_vector(0, dim)
    logmag = -0.5 * alpha * alpha + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    c = np.exp(logmag) * np.sign(alpha) ** n
    return (c / np.linalg.norm(c)).astype(complex)


def cat_field_parts(gbar: float, dim: int):
    """Even/odd parts of ``e^{-gbar^2/2} e^{gbar a^dagger}|0>``.

    Returns ``(sym, antisym)`` = ``e^{-gbar^2/2}(cosh, sinh)(gbar a^dagger)|0>``.
    Neither part is renormalized: their squared norms add up to one.
    """
    check_truncation(gbar, dim, what="cat amplitude")
    n = np.arange(dim)
    if gbar == 0:
        c = np.zeros(dim)
        c[0] = 1.0
    else:
        c = np.exp(-0.5 * gbar * gbar + n * math.log(abs(gbar)) - 0.5 * gammaln(n + 1))
        c *= np.sign(gbar) ** n
    even = n % 2 == 0
    sym = np.where(even, c, 0.0).astype(complex)
    antisym = np.where(even, 0.0, c).astype(complex)
    return sym, antisym


def is_hermitian(mat: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T)) < atol)


def is_unitary(mat: np.ndarray, atol: float = 1e-10, block: int | None = None) -> bool:
    """Unitarity test restricted to the leading ``block`` rows/columns."""
    prod = mat.conj().T @ mat
    if block is not None:
        prod = prod[:block, :block]
    return bool(np.max(np.abs(prod - np.eye(prod.shape[0]))) < atol)
