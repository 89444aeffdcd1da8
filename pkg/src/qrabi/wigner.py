"""Wigner functions of field states on a phase-space grid.

Quadratures follow ``x = (a + a^dagger)/sqrt(2)``, ``p = (a - a^dagger)/(i sqrt(2))``
so that ``alpha = (x + i p)/sqrt(2)``.  The Wigner function is obtained from
the displaced-parity expectation

    W(x, p) = (1/pi) <phi| D(alpha) Pi D(alpha)^dagger |phi>,   Pi = (-1)^{a^dagger a},

normalized so that its integral over ``dx dp`` is one.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageWarning, DimensionError
from .fock import _displacement_real

CONVENTION = "x=(a+a^dag)/sqrt2, p=(a-a^dag)/(i sqrt2), alpha=(x+ip)/sqrt2, int W dx dp = 1"
CHUNK = 256


@dataclass(frozen=True)
class WignerGrid:
    """``values[i, j]`` is ``W(x[i], p[j])``."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    convention: str = CONVENTION
    info: dict = field(default_factory=dict)

    def normalization(self) -> float:
        """Riemann sum of ``W dx dp`` (uniform axes assumed)."""
        dx = self.x[1] - self.x[0]
        dp = self.p[1] - self.p[0]
        return float(self.values.sum() * dx * dp)

    def marginal_x(self) -> np.ndarray:
        """``int W dp`` at each ``x``."""
        return self.values.sum(axis=1) * (self.p[1] - self.p[0])

    def long_rows(self):
        for i, xv in enumerate(self.x):
            for j, pv in enumerate(self.p):
                yield xv, pv, self.values[i, j]


def default_axis(gbar: float, points: int = 121) -> np.ndarray:
    half = math.sqrt(2) * gbar + 4
    return np.linspace(-half, half, points)


def _support(phi: np.ndarray, rel: float = 1e-14) -> int:
    mag = np.abs(phi)
    keep = np.nonzero(mag > rel * mag.max())[0]
    return int(keep[-1]) + 1


def _coverage(phi: np.ndarray, x_axis, p_axis) -> dict:
    n = np.arange(len(phi))
    prob = np.abs(phi) ** 2
    mean_n = float(prob @ n)
    mean_n2 = float(prob @ n**2)
    need = mean_n + 3 * math.sqrt(mean_n2)
    # largest |alpha|^2 reachable along both axes
    reach = min(np.max(np.abs(x_axis)), np.max(np.abs(p_axis))) ** 2 / 2
    return {"mean_n": mean_n, "required_alpha2": need, "grid_alpha2": reach}


def wigner(phi, x_axis, p_axis, chunk: int = CHUNK) -> WignerGrid:
    """Wigner function of the normalized Fock-basis vector ``phi``."""
    phi = np.asarray(phi, dtype=complex)
    if phi.ndim != 1 or len(phi) == 0:
        raise DimensionError("phi must be a non-empty vector")
    norm = np.linalg.norm(phi)
    if abs(norm - 1) > 1e-6:
        raise ValueError(f"phi must be normalized, norm is {norm:.8f}")
    x_axis = np.asarray(x_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    cov = _coverage(phi, x_axis, p_axis)
    if cov["grid_alpha2"] < cov["required_alpha2"]:
        warnings.warn(f"phase-space grid reaches |alpha|^2 = {cov['grid_alpha2']:.3g} but the "
                      f"state needs about {cov['required_alpha2']:.3g}", CoverageWarning,
                      stacklevel=2)
    cols = _support(phi)
    psi = phi[:cols]
    xx, pp = np.meshgrid(x_axis, p_axis, indexing="ij")
    # beta = -alpha is the displacement applied to phi
    beta = -(xx + 1j * pp).reshape(-1) / math.sqrt(2)
    radius = np.abs(beta)
    theta = np.angle(beta)
    reach = math.sqrt(cols) + radius.max()
    rows = int(math.ceil(reach * reach + 10 * reach)) + 20
    m = np.arange(rows)
    n = np.arange(cols)
    parity = (-1.0) ** m
    out = np.empty(beta.size)
    lost = 0.0
    for start in range(0, beta.size, chunk):
        sl = slice(start, start + chunk)
        block = _displacement_real(radius[sl], rows, cols)
        # <m|D(beta)|n> = e^{i(m-n)theta} <m|D(|beta|)|n>; the row phase drops out of |.|^2
        shifted = psi[None, :] * np.exp(-1j * np.outer(theta[sl], n))
        amp = np.einsum("pmn,pn->pm", block, shifted)
        weight = np.abs(amp) ** 2
        lost = max(lost, float(np.max(np.abs(weight.sum(axis=1) - norm**2))))
        out[sl] = weight @ parity / math.pi
    if lost > 1e-8:
        warnings.warn(f"displaced state leaks {lost:.2e} of its norm past {rows} states",
                      CoverageWarning, stacklevel=2)
    cov.update(rows=rows, support=cols, norm_leak=lost)
    return WignerGrid(x_axis, p_axis, out.reshape(xx.shape), CONVENTION, cov)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """``<x|n>`` for ``n < n_max`` as rows, by the normalized three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((n_max,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max > 1:
        out[1] = math.sqrt(2) * x * out[0]
    for k in range(2, n_max):
        out[k] = math.sqrt(2 / k) * x * out[k - 1] - math.sqrt((k - 1) / k) * out[k - 2]
    return out


def position_density(phi, x) -> np.ndarray:
    """``|<x|phi>|^2``."""
    phi = np.asarray(phi, dtype=complex)
    return np.abs(phi @ hermite_functions(len(phi), x)) ** 2


def ring_crossings(grid: WignerGrid, center: float | None = None, floor: float = 1e-3,
                   side: str = "outer") -> int:
    """Sign changes of ``W(x, 0)`` walking out from ``center``.

    ``side="outer"`` follows the half-line pointing away from the origin,
    which avoids the weak fringes a displaced state shows towards its mirror
    image at ``-x``; ``"inner"`` takes the other half and ``"both"`` returns
    the larger count.  Values with ``|W| < floor/pi`` are skipped so tail
    noise is not counted.  ``center`` defaults to the mean ``x``.
    """
    j = int(np.argmin(np.abs(grid.p)))
    line = grid.values[:, j]
    if center is None:
        center = weighted_center(grid)[0]
    halves = {"right": grid.x >= center, "left": grid.x <= center}
    outer = "left" if center < 0 else "right"
    inner = "right" if outer == "left" else "left"
    if side == "outer":
        keys = [outer]
    elif side == "inner":
        keys = [inner]
    elif side == "both":
        keys = [outer, inner]
    else:
        raise ValueError(f"side must be outer, inner or both, got {side!r}")
    counts = []
    for key in keys:
        vals = line[halves[key]]
        signs = np.sign(vals[np.abs(vals) >= floor / math.pi])
        counts.append(int(np.count_nonzero(np.diff(signs))))
    return max(counts)


def weighted_center(grid: WignerGrid) -> tuple[float, float]:
    """Mean ``(x, p)`` of the Wigner distribution."""
    w = grid.values
    total = w.sum()
    return (float((w.sum(axis=1) @ grid.x) / total), float((w.sum(axis=0) @ grid.p) / total))
