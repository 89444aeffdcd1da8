"""Transcendental spectral condition of the Rabi model.

The spectrum of ``H_pm`` is ``E_n = x_n - g^2/omega`` where ``x_n`` are the
zeros of

    G_pm(x) = sum_m K_m(x) [1 -+ delta/(x - m omega)] gbar^m,

with ``K_0 = 1``, ``K_{-1} = 0`` and

    m K_m = f_{m-1}(x) K_{m-1} - K_{m-2},
    f_m(x) = 2 gbar + (m - x + delta^2/(x - m)) / (2 gbar)     (omega = 1).

``G`` has simple poles at ``x = m omega`` whenever ``delta != 0``; roots are
therefore searched interval by interval between neighbouring poles.

Internally the recurrence runs on ``T_m = K_m gbar^m``, which obeys
``m T_m = gbar f_{m-1} T_{m-1} - gbar^2 T_{m-2}`` and stays O(exp(2 gbar^2))
instead of overflowing like ``K_m`` for small ``gbar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .chain import Parity, converged_spectrum, diagonalize, build_chain
from .errors import (MissedRootError, PoleProximityError, RepresentationMismatchError,
                     SeriesConvergenceError)
from .fock import ModelParams, displacement_matrix

POLE_GUARD = 1e-9
MIN_TERMS = 20
MAX_TERMS = 5000


def _require_coupling(params: ModelParams):
    if params.g <= 0:
        raise ValueError("the G-function needs g > 0; use the chain diagonalization for g = 0")


def _check_poles(xt: np.ndarray, dbar: float, upto: int):
    if dbar == 0:
        return
    nearest = np.clip(np.rint(xt), 0, upto)
    bad = np.abs(xt - nearest) < POLE_GUARD
    if np.any(bad):
        raise PoleProximityError(
            f"x = {xt[bad][0]:.12g} omega lies within {POLE_GUARD:g} of a pole")


def _scaled_terms(xt: np.ndarray, gbar: float, dbar: float, max_terms: int = MAX_TERMS):
    """Yield ``(m, T_m)`` arrays for x in units of omega."""
    g2 = gbar * gbar
    d2 = dbar * dbar
    t_prev = np.zeros_like(xt)
    t_cur = np.ones_like(xt)
    yield 0, t_cur
    for m in range(1, max_terms + 1):
        mm = m - 1
        if d2:
            with np.errstate(divide="ignore", invalid="ignore"):
                gf = 2 * g2 + 0.5 * (mm - xt + d2 / (xt - mm))
        else:
            gf = 2 * g2 + 0.5 * (mm - xt)
        t_prev, t_cur = t_cur, (gf * t_cur - g2 * t_prev) / m
        yield m, t_cur


@dataclass(frozen=True)
class GFunctionEvaluator:
    """Evaluates ``G_pm(x)`` with an adaptively chosen series cutoff.

    The cutoff used by the most recent call is not stored (the evaluator is
    immutable); :meth:`evaluate` returns it alongside the values.
    """

    params: ModelParams
    parity: Parity = Parity.PLUS
    min_terms: int = MIN_TERMS
    max_terms: int = MAX_TERMS
    rel_tail: float = 1e-17

    def __post_init__(self):
        _require_coupling(self.params)
        object.__setattr__(self, "parity", Parity.parse(self.parity))

    def evaluate(self, x):
        """Return ``(G(x), terms_used)`` for scalar or array ``x`` (energy units)."""
        p = self.params
        xt = np.atleast_1d(np.asarray(x, dtype=float)) / p.omega
        gbar, dbar = p.gbar, p.dbar
        sgn = int(self.parity)
        # terms grow until m ~ x + 4 gbar^2 and then decay with ratio -> 1/2
        settle = int(np.max(xt, initial=0.0) + 4 * gbar * gbar) + self.min_terms
        _check_poles(xt, dbar, settle + self.max_terms)
        total = np.zeros_like(xt)
        scale = np.zeros_like(xt)
        quiet = 0
        for m, t in _scaled_terms(xt, gbar, dbar, self.max_terms):
            term = t * (1 - sgn * dbar / (xt - m)) if dbar else t
            total += term
            mag = np.abs(term)
            scale = np.maximum(scale, mag)
            if m > settle and np.all(mag <= self.rel_tail * scale):
                quiet += 1
                if quiet >= 3:
                    break
            else:
                quiet = 0
        else:
            raise SeriesConvergenceError(
                f"G-series did not converge within {self.max_terms} terms "
                f"(gbar={gbar:g}, dbar={dbar:g})")
        if not np.all(np.isfinite(total)):
            raise SeriesConvergenceError("G-series produced non-finite values")
        return total, m

    def __call__(self, x):
        vals, _ = self.evaluate(x)
        return vals if np.ndim(x) else float(vals[0])


def k_coefficients(x: float, params: ModelParams, M: int) -> np.ndarray:
    """``K_0 .. K_M`` at ``x`` (energy units); ``K_0 = 1``."""
    _require_coupling(params)
    xt = np.array([x / params.omega])
    _check_poles(xt, params.dbar, M)
    out = np.empty(M + 1)
    log_g = math.log(params.gbar)
    for m, t in _scaled_terms(xt, params.gbar, params.dbar, M):
        out[m] = t[0] * math.exp(-m * log_g)
        if m == M:
            break
    return out


def g_value(x, parity, params: ModelParams):
    return GFunctionEvaluator(params, Parity.parse(parity))(x)


@dataclass(frozen=True)
class RootList:
    """Zeros of ``G`` in increasing order (energy units)."""

    roots: np.ndarray
    residuals: np.ndarray
    params: ModelParams
    parity: Parity
    near_misses: tuple = ()
    info: dict = field(default_factory=dict)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.roots - self.params.g * self.params.gbar

    def __len__(self):
        return len(self.roots)


def _scan_grid(lo: float, hi: float, points: int, edge: float, pole_lo: bool, pole_hi: bool):
    grid = [np.linspace(lo, hi, points)]
    # roots can sit extremely close to a pole; geometric refinement near each end
    steps = np.geomspace(1e-3, edge, 40) if edge < 1e-3 else np.array([])
    if pole_lo:
        grid.append(lo - edge + steps)
    if pole_hi:
        grid.append(hi + edge - steps)
    g = np.unique(np.concatenate(grid))
    return g[(g >= lo) & (g <= hi)]


def find_roots(params: ModelParams, parity, x_max: float, points_per_interval: int = 200,
               pole_margin: float = 1e-6, xtol: float = 1e-12,
               cross_check: bool = False) -> RootList:
    """All zeros of ``G_pm`` below ``x_max`` (energy units).

    Each pole-free interval is sampled on a grid, sign changes are refined by
    a bracketing solver, and grid-local minima of ``|G|`` below 1e-8 without
    a sign change are reported as ``near_misses``.  With ``cross_check`` the
    root count per interval is compared against a converged diagonalization
    and a mismatch raises :class:`MissedRootError`.
    """
    _require_coupling(params)
    parity = Parity.parse(parity)
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    ev = GFunctionEvaluator(params, parity)
    w = params.omega
    dbar = params.dbar
    xt_max = x_max / w
    xt_lo = -dbar - 1.0  # spectrum is bounded below by x >= -delta/omega
    edge = pole_margin
    if dbar == 0:
        # every residue vanishes with delta and G loses its zeros; the spectrum
        # is the limit of roots squeezed onto the vanished poles, x_n = n omega
        roots = np.arange(0, math.ceil(xt_max), dtype=float)
        roots = roots[roots < xt_max] * w
        return RootList(roots, np.zeros_like(roots), params, parity,
                        info={"delta_zero_limit": True})
    intervals = []
    intervals.append(_scan_grid(xt_lo, -edge, points_per_interval, edge, False, True))
    m = 0
    while m < xt_max:
        hi = min(m + 1 - edge, xt_max)
        intervals.append(_scan_grid(m + edge, hi, points_per_interval, edge, True, hi < xt_max))
        m += 1

    def f(xt):
        return float(ev.evaluate(xt * w)[0][0])

    roots, near = [], []
    for grid in intervals:
        if len(grid) < 2:
            continue
        vals = ev.evaluate(grid * w)[0]
        sign = np.sign(vals)
        for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
            r = brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
            roots.append(r)
        for i in np.nonzero(sign == 0)[0]:
            roots.append(grid[i])
        mag = np.abs(vals)
        for i in range(1, len(grid) - 1):
            if (mag[i] < 1e-8 and mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]
                    and sign[i - 1] == sign[i + 1] != 0):
                near.append(grid[i] * w)
    roots = np.unique(np.array(roots))
    residuals = np.abs(ev.evaluate(roots * w)[0]) if len(roots) else np.array([])
    result = RootList(roots * w, residuals, params, parity, tuple(near))
    if cross_check:
        _cross_check(result, x_max)
    return result


def oracle_roots(params: ModelParams, parity, n_levels: int, tol: float = 1e-12) -> np.ndarray:
    """``E_n + g gbar`` from converged diagonalization: the x-values G must vanish at."""
    dec = converged_spectrum(params, parity, n_levels, tol=tol)
    return dec.eigenvalues[:n_levels] + params.g * params.gbar


def _cross_check(result: RootList, x_max: float):
    p = result.params
    levels = int(math.ceil(x_max / p.omega + p.dbar + 3))
    ref = oracle_roots(p, result.parity, levels)
    ref = ref[ref < x_max]
    if len(ref) != len(result.roots):
        raise MissedRootError(
            f"found {len(result.roots)} G-function roots below {x_max:g} but "
            f"diagonalization has {len(ref)} levels there")
    bins = np.floor(np.concatenate([[-np.inf], np.arange(0, x_max / p.omega + 1)]))
    got = np.histogram(result.roots / p.omega, bins=np.append(bins, np.inf))[0]
    want = np.histogram(ref / p.omega, bins=np.append(bins, np.inf))[0]
    if not np.array_equal(got, want):
        raise MissedRootError(f"root counts per pole interval {got.tolist()} "
                              f"differ from oracle {want.tolist()}")


def shifted_coefficients(x_n: float, params: ModelParams, count: int) -> np.ndarray:
    """Amplitudes of a G-function eigenstate on the shifted oscillators ``|m;g>``.

    Coefficient ``K_m(x_n) delta sqrt(m!) / (x_n - m omega)``, evaluated in
    log-magnitude form.  At a true root the sequence decays super-exponentially
    until rounding error in ``x_n`` lets the dominant recurrence solution take
    over; the series is cut where that happens.
    """
    _require_coupling(params)
    xt = np.array([x_n / params.omega])
    gbar, dbar = params.gbar, params.dbar
    _check_poles(xt, dbar, count)
    logs = np.empty(count)
    signs = np.empty(count)
    for m, t in _scaled_terms(xt, gbar, dbar, count - 1):
        denom = xt[0] - m
        val = t[0] * dbar / denom
        with np.errstate(divide="ignore"):
            logs[m] = math.log(abs(val)) if val != 0 else -np.inf
        logs[m] += -m * math.log(gbar) + 0.5 * gammaln(m + 1)
        signs[m] = np.sign(val)
        if m == count - 1:
            break
    # the physical peak lies near m ~ x_n; beyond it rounding noise eventually grows
    window = min(count, int(xt[0] + 4 * gbar * gbar) + 12)
    peak = int(np.argmax(logs[:window]))
    rel = logs - logs[peak]
    tail = rel[peak:]
    below = np.nonzero(tail < -32)[0]
    if len(below):
        cut = peak + int(below[0])
    else:
        # stop at the smallest coefficient before the noise-driven rise
        rising = np.nonzero(np.minimum.accumulate(tail) < tail - 4)[0]
        stop = int(rising[0]) if len(rising) else len(tail)
        cut = peak + int(np.argmin(tail[:stop])) + 1
    coeffs = np.zeros(count)
    coeffs[:cut] = signs[:cut] * np.exp(rel[:cut])
    return coeffs


def eigenstate_from_root(x_n: float, params: ModelParams, dim: int, parity=Parity.PLUS,
                         min_fidelity: float = 0.999, check: bool = True) -> np.ndarray:
    """Fock-basis eigenvector assembled from a G-function root.

    At ``delta = 0`` the representation degenerates and the shifted
    oscillator ``|n;g>`` with ``n = round(x_n/omega)`` is returned.  With
    ``check`` the result is compared with the diagonalization eigenvector of
    the same energy and :class:`RepresentationMismatchError` is raised when
    the fidelity is below ``min_fidelity``.
    """
    parity = Parity.parse(parity)
    basis = displacement_matrix(-params.gbar, dim)
    if params.delta == 0:
        vec = basis[:, int(round(x_n / params.omega))].astype(complex)
    else:
        coeffs = shifted_coefficients(x_n, params, dim)
        vec = (basis @ coeffs).astype(complex)
    vec /= np.linalg.norm(vec)
    pivot = np.argmax(np.abs(vec))
    vec *= np.sign(vec[pivot].real) or 1.0
    if check:
        dec = diagonalize(build_chain(params, parity, dim))
        energy = x_n - params.g * params.gbar
        k = int(np.argmin(np.abs(dec.eigenvalues - energy)))
        fid = abs(np.vdot(dec.eigenvectors[:, k], vec)) ** 2
        if fid < min_fidelity:
            raise RepresentationMismatchError(
                f"G-function eigenstate at x={x_n:.10g} has fidelity {fid:.6f} with the "
                f"diagonalization eigenvector (need {min_fidelity})")
    return vec
