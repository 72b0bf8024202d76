"""Stitching short-time PIMC data onto long-time LvNE predictions.

The bath coupling alpha is refitted by matching the LvNE survival to the PIMC
points on an overlap window (chi^2 in units of the PIMC error bars, golden
section search with lambda = pi*alpha*T enforced); the LvNE branch is then
rescaled by a single factor at the crossover time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, StitchError
from .lindblad import IntegratorConfig, propagate_lvne
from .model import DimerParams
from .series import TimeSeries

RHO_INITIAL = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
VALIDITY_RMS = 3.0  # weighted RMS above this flags "outside Lindblad validity"


@dataclass(frozen=True)
class AlphaFit:
    """Best-fit coupling with the weighted RMS over the fit window."""

    alpha: float
    goodness: float
    within_validity: bool


@dataclass(frozen=True)
class MatchResult:
    alpha: float
    window: tuple[float, float]
    goodness: float
    stitched: TimeSeries
    t_cross: float
    factor: float


def _lvne_on(times: np.ndarray, params: DimerParams, lam: float) -> np.ndarray:
    cfg = IntegratorConfig.for_params(params, lam, t_max=float(times[-1]))
    return propagate_lvne(RHO_INITIAL, params, lam, times, cfg).values


def fit_alpha(
    pimc: TimeSeries,
    params: DimerParams,
    T: float,
    window: tuple[float, float],
    alpha_max: float = 1.0,
) -> AlphaFit:
    """Minimize sum_i ((Pi_LvNE(t_i; alpha) - Pi_PIMC(t_i)) / sigma_i)^2 over
    alpha in [0, alpha_max] (caller passes 2x the physical alpha)."""
    sub = pimc.window(*window)
    if len(sub) < 5:
        raise FitError("overlap window must contain at least 5 PIMC points")
    if sub.errors is None or not np.any(sub.errors > 0):
        raise FitError("PIMC errors are all zero; cannot weight the fit")
    sigma = np.where(sub.errors > 0, sub.errors, sub.errors[sub.errors > 0].min())
    times = sub.times
    values = sub.values

    def goodness(alpha: float) -> float:
        lv = _lvne_on(times, params, math.pi * alpha * T)
        return float(np.sqrt(np.mean(((lv - values) / sigma) ** 2)))

    # coarse bracket, then golden section on the bracketing interval
    grid = np.linspace(0.0, alpha_max, 9)
    obj = [goodness(a) for a in grid]
    i = int(np.argmin(obj))
    if i == len(grid) - 1:
        raise FitError("non-unimodal objective; widen bounds")
    lo = grid[max(i - 1, 0)]
    hi = grid[i + 1]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = goodness(c), goodness(d)
    while b - a > 1e-5:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = goodness(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = goodness(d)
    alpha = 0.5 * (a + b)
    g = goodness(alpha)
    return AlphaFit(alpha=float(alpha), goodness=g, within_validity=g <= VALIDITY_RMS)


def stitch(pimc: TimeSeries, lvne_extension: TimeSeries, t_cross: float) -> TimeSeries:
    """PIMC for t <= t_cross, LvNE beyond, with a single multiplicative rescale
    of the LvNE branch pinned at the crossover point.

    The rescale factor must lie within the 3-sigma relative band of the PIMC
    value at the crossover; the extension inherits that point's error bar.
    """
    keep = pimc.times <= t_cross + 1e-12
    if not np.any(keep):
        raise StitchError("no PIMC point at or before t_cross")
    i_c = int(np.nonzero(keep)[0][-1])
    t_c = float(pimc.times[i_c])
    if lvne_extension.times[0] > t_c or lvne_extension.times[-1] <= t_c:
        raise StitchError("LvNE extension does not cover the crossover point")
    lv_at_c = float(np.interp(t_c, lvne_extension.times, lvne_extension.values))
    if lv_at_c == 0.0:
        raise StitchError("LvNE extension vanishes at the crossover point")
    p_at_c = float(pimc.values[i_c])
    factor = p_at_c / lv_at_c
    sigma_rel = 0.0
    if pimc.errors is not None and p_at_c != 0.0:
        sigma_rel = float(pimc.errors[i_c]) / abs(p_at_c)
    if abs(factor - 1.0) > 3.0 * sigma_rel + 1e-12:
        raise StitchError(
            f"inconsistent stitch: rescale factor {factor:.6f} outside "
            f"[1 - 3*{sigma_rel:.2e}, 1 + 3*{sigma_rel:.2e}]"
        )
    ext = lvne_extension.times > t_c
    times = np.concatenate([pimc.times[keep], lvne_extension.times[ext]])
    values = np.concatenate([pimc.values[keep], factor * lvne_extension.values[ext]])
    sigma_c = float(pimc.errors[i_c]) if pimc.errors is not None else 0.0
    err_head = pimc.errors[keep] if pimc.errors is not None else np.zeros(int(keep.sum()))
    errors = np.concatenate([err_head, np.full(int(ext.sum()), sigma_c)])
    return TimeSeries(times, values, errors)


def match_and_stitch(
    pimc: TimeSeries,
    params: DimerParams,
    T: float,
    window: tuple[float, float] | None = None,
    t_max: float = 60.0,
    n_points: int = 601,
    alpha_max: float = 1.0,
) -> MatchResult:
    """Fit alpha on the overlap window (default: last half of the PIMC times),
    extend with the LvNE to t_max, and stitch at the last PIMC time."""
    if window is None:
        window = (0.5 * float(pimc.times[-1]), float(pimc.times[-1]))
    fit = fit_alpha(pimc, params, T, window, alpha_max=alpha_max)
    t_cross = float(pimc.times[-1])
    ext_times = np.linspace(0.0, t_max, n_points)
    ext_times = np.union1d(ext_times, pimc.times)
    lv = TimeSeries(ext_times, _lvne_on(ext_times, params, math.pi * fit.alpha * T))
    stitched = stitch(pimc, lv, t_cross)
    keep = pimc.times <= t_cross + 1e-12
    i_c = int(np.nonzero(keep)[0][-1])
    lv_at_c = float(np.interp(pimc.times[i_c], lv.times, lv.values))
    factor = float(pimc.values[i_c]) / lv_at_c
    return MatchResult(
        alpha=fit.alpha,
        window=window,
        goodness=fit.goodness,
        stitched=stitched,
        t_cross=t_cross,
        factor=factor,
    )
