"""Fully incoherent limit: transfer-matrix master equation and rate fitting.

dp/dt = -T p with T = [[Et, -Vt], [-Vt, Et + Gt]]; eigenvalues are real decay
rates and the (1,1) propagator element is the classical survival probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError
from .series import TimeSeries


@dataclass(frozen=True)
class ClassicalRates:
    """Inverse-time rates: diagonal escape Et >= 0, hopping Vt > 0,
    trapping Gt >= 0."""

    Et: float
    Vt: float
    Gt: float

    def __post_init__(self):
        if not (math.isfinite(self.Et) and self.Et >= 0):
            raise ValueError("Et must be finite and >= 0")
        if not (math.isfinite(self.Vt) and self.Vt > 0):
            raise ValueError("Vt must be finite and > 0")
        if not (math.isfinite(self.Gt) and self.Gt >= 0):
            raise ValueError("Gt must be finite and >= 0")

    def transfer_matrix(self) -> np.ndarray:
        return np.array([[self.Et, -self.Vt], [-self.Vt, self.Et + self.Gt]])


def classical_eigensystem(rates: ClassicalRates):
    """Real eigenvalues lambda_+- = Et + Gt/2 +- sqrt(Vt^2 + Gt^2/4) of the
    transfer matrix, with unit eigenvectors (columns, '+' first)."""
    psi = math.asinh(rates.Gt / (2.0 * rates.Vt))
    root = rates.Vt * math.cosh(psi)  # sqrt(Vt^2 + Gt^2/4)
    lam = np.array([rates.Et + 0.5 * rates.Gt + root, rates.Et + 0.5 * rates.Gt - root])
    vecs = np.empty((2, 2))
    for a, v in enumerate((
        (math.exp(-0.5 * psi), -math.exp(0.5 * psi)),
        (math.exp(0.5 * psi), math.exp(-0.5 * psi)),
    )):
        arr = np.array(v)
        vecs[:, a] = arr / np.linalg.norm(arr)
    return lam, vecs


def classical_survival(rates: ClassicalRates, t: float) -> float:
    """P(t) = exp(-t(Et + Gt/2)) cosh(psi + t Vt cosh psi)/cosh psi,
    psi = arcsinh(Gt/2Vt); evaluated in the overflow-safe two-exponential form."""
    if t < 0:
        raise ValueError("t must be >= 0")
    psi = math.asinh(rates.Gt / (2.0 * rates.Vt))
    root = rates.Vt * math.cosh(psi)
    lam_p = rates.Et + 0.5 * rates.Gt + root
    lam_m = rates.Et + 0.5 * rates.Gt - root
    return (math.exp(psi - lam_m * t) + math.exp(-psi - lam_p * t)) / (2.0 * math.cosh(psi))


def _survival_vec(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    et, vt, gt = x
    psi = np.arcsinh(gt / (2.0 * vt))
    root = np.sqrt(vt * vt + 0.25 * gt * gt)
    lam_p = et + 0.5 * gt + root
    lam_m = et + 0.5 * gt - root
    return (np.exp(psi - lam_m * t) + np.exp(-psi - lam_p * t)) / (2.0 * np.cosh(psi))


def _initial_guess(series: TimeSeries) -> np.ndarray:
    t, v = series.times, series.values
    # long-time slope of -log P -> Gt/2 for Et ~ Vt
    tail = t > 0.5 * t[-1]
    pos = tail & (v > 0)
    if pos.sum() >= 3:
        gt0 = max(2.0 * np.polyfit(t[pos], -np.log(v[pos]), 1)[0], 1e-3)
    else:
        gt0 = 0.1
    # time scale of the initial oscillation-free decay
    below = np.nonzero(v < 0.75 * v[0])[0]
    scale = t[below[0]] if below.size and t[below[0]] > 0 else max(t[-1] / 4.0, 1e-3)
    v0 = max(1.0 / scale, gt0)
    return np.array([v0, v0, gt0])


def fit_classical_rates(series: TimeSeries):
    """Damped Gauss-Newton (Levenberg-Marquardt) fit of the classical survival
    law to a time series; residuals are weighted by 1/stderr when available.

    Returns (ClassicalRates, residual_norm).
    """
    if len(series) < 20:
        raise FitError("need at least 20 points to fit classical rates")
    if np.any(series.values <= 0):
        raise FitError("series must be positive to fit classical rates")
    t, v = series.times, series.values
    if series.errors is not None and np.any(series.errors > 0):
        w = np.where(series.errors > 0, series.errors, series.errors[series.errors > 0].min())
    else:
        w = np.ones_like(v)

    def resid(x):
        return (_survival_vec(x, t) - v) / w

    res = least_squares(resid, _initial_guess(series), method="lm", max_nfev=2000)
    if not res.success:
        raise FitError(f"rate fit did not converge; residual {np.linalg.norm(res.fun):.3e}")
    et, vt, gt = res.x
    if et < 0 or vt <= 0 or gt < 0:
        raise FitError("model mismatch: fitted rates are negative")
    return ClassicalRates(Et=float(et), Vt=float(vt), Gt=float(gt)), float(np.linalg.norm(res.fun))
