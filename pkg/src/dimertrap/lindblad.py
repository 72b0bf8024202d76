"""LvNE with trapping and site-projector dephasing.

rhs:  d rho/dt = -i[H0, rho] - {Gamma_op, rho} - 2*lambda*(rho - diag rho),
Gamma_op = Gamma |2><2|. The dissipator damps coherences at rate 2*lambda and
leaves populations untouched; the trap leaks trace at rate 2*Gamma*rho_22.
Propagation is fixed-step classical RK4 for reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, IntegrationError
from .model import DimerParams
from .series import TimeSeries

TRACE_TOL = 1e-9
PSD_TOL = 1e-10


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings; dt in 1/V units."""

    dt: float = 1e-3
    t_max: float = 10.0
    method: str = "rk4"

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be > 0")
        if self.method != "rk4":
            raise ValueError("only fixed-step rk4 is supported")

    @classmethod
    def for_params(cls, params: DimerParams, lam: float, t_max: float) -> "IntegratorConfig":
        """Default step 1e-3, shrunk to 0.01/max(V, Gamma, lambda, 1) if stiffer."""
        dt = min(1e-3, 0.01 / max(params.V, params.Gamma, lam, 1.0))
        return cls(dt=dt, t_max=t_max)


def lvne_rhs(rho: np.ndarray, params: DimerParams, lam: float) -> np.ndarray:
    """Right-hand side of the LvNE for a 2x2 density matrix."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    h0 = params.bare_hamiltonian()
    gamma_op = np.array([[0.0, 0.0], [0.0, params.Gamma]], dtype=complex)
    drho = -1j * (h0 @ rho - rho @ h0)
    drho -= gamma_op @ rho + rho @ gamma_op
    drho -= 2.0 * lam * (rho - np.diag(np.diag(rho)))
    return drho


def check_density_matrix(rho: np.ndarray, t: float) -> None:
    """Hermiticity, bounded trace and positive semidefiniteness within tolerance."""
    if not np.all(np.isfinite(rho.view(float))):
        raise IntegrationError(f"non-finite density matrix at t={t}")
    if abs(rho[0, 1] - np.conj(rho[1, 0])) > 1e-12:
        raise IntegrationError(f"hermiticity lost at t={t}")
    tr = rho[0, 0].real + rho[1, 1].real
    if tr < -TRACE_TOL or tr > 1.0 + TRACE_TOL:
        raise IntegrationError(f"trace {tr} out of [0, 1] at t={t}")
    half = 0.5 * (rho[0, 0].real - rho[1, 1].real)
    disc = math.sqrt(half * half + abs(rho[0, 1]) ** 2)
    if 0.5 * tr - disc < -PSD_TOL:
        raise IntegrationError(f"negative eigenvalue at t={t}")


def _rhs_scalar(state, V, G, dec):
    """RHS on the real state (rho11, rho22, Re rho12, Im rho12)."""
    r11, r22, x, y = state
    return (
        2.0 * V * y,
        -2.0 * V * y - 2.0 * G * r22,
        -dec * x,
        -V * (r11 - r22) - dec * y,
    )


def _rk4_step(state, h, V, G, dec):
    k1 = _rhs_scalar(state, V, G, dec)
    s2 = tuple(s + 0.5 * h * k for s, k in zip(state, k1))
    k2 = _rhs_scalar(s2, V, G, dec)
    s3 = tuple(s + 0.5 * h * k for s, k in zip(state, k2))
    k3 = _rhs_scalar(s3, V, G, dec)
    s4 = tuple(s + h * k for s, k in zip(state, k3))
    k4 = _rhs_scalar(s4, V, G, dec)
    return tuple(
        s + h / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for s, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


def propagate_lvne(
    rho0: np.ndarray,
    params: DimerParams,
    lam: float,
    grid: np.ndarray,
    cfg: IntegratorConfig,
    return_rho: bool = False,
):
    """Propagate rho0 on the time grid; returns Pi(t) = rho_11(t) as a TimeSeries.

    Grid intervals are subdivided into equal steps no longer than cfg.dt, so
    every grid time is hit exactly. With return_rho=True additionally returns
    the density matrices at the grid times (n, 2, 2).
    """
    grid = np.asarray(grid, dtype=float)
    if grid[0] < 0 or grid[-1] > cfg.t_max * (1 + 1e-12):
        raise ValueError("grid must lie within [0, t_max]")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0, grid[0])

    V, G = params.V, params.Gamma
    dec = G + 2.0 * lam  # coherence decay rate
    state = (rho0[0, 0].real, rho0[1, 1].real, rho0[0, 1].real, rho0[0, 1].imag)

    out = np.empty(grid.size)
    rhos = np.empty((grid.size, 2, 2), dtype=complex) if return_rho else None
    t_prev = None
    for i, t in enumerate(grid):
        if t_prev is not None and t > t_prev:
            n = max(1, math.ceil((t - t_prev) / cfg.dt - 1e-12))
            h = (t - t_prev) / n
            for _ in range(n):
                state = _rk4_step(state, h, V, G, dec)
        elif t_prev is None and t > 0:
            n = max(1, math.ceil(t / cfg.dt - 1e-12))
            h = t / n
            for _ in range(n):
                state = _rk4_step(state, h, V, G, dec)
        t_prev = t
        r11, r22, x, y = state
        rho = np.array([[r11, x + 1j * y], [x - 1j * y, r22]], dtype=complex)
        check_density_matrix(rho, t)
        out[i] = r11
        if return_rho:
            rhos[i] = rho
    series = TimeSeries(grid, out)
    return (series, rhos) if return_rho else series


def pi11_trapfree_closed(V: float, lam: float, t: float) -> float:
    """Trap-free transition probability pi^(0)_{1,1}(t) for Gamma = 0.

    1/2 + (exp(-lam t)/2) [lam sin(t mu)/mu + cos(t mu)], mu = sqrt(4V^2 - lam^2);
    continues through lam = 2V (series) and lam > 2V (hyperbolic branch).
    """
    if t < 0 or lam < 0 or V <= 0:
        raise ValueError("require t >= 0, lam >= 0, V > 0")
    mu2 = 4.0 * V * V - lam * lam
    mu = np.sqrt(complex(mu2))
    z = mu * t
    if abs(mu) < 1e-6:
        # sin(z)/mu = t * (1 - z^2/6 + z^4/120)
        sinc = t * (1.0 - z * z / 6.0 + z ** 4 / 120.0)
    else:
        sinc = np.sin(z) / mu
    val = 0.5 + 0.5 * math.exp(-lam * t) * (lam * sinc + np.cos(z)).real
    return float(val)


def survival_approx(params: DimerParams, lam: float, t: float) -> float:
    """Weak-coupling product form:
    exp(-Gamma t) [1/2 + (exp(-lam t)/2)(cos 2Vt + (lam/2V) sin 2Vt)]."""
    if t < 0 or lam < 0:
        raise ValueError("require t >= 0, lam >= 0")
    G, V = params.Gamma, params.V
    if G >= 2.0 * V:
        raise ValueError("requires Gamma < 2V")
    osc = math.cos(2.0 * V * t) + lam / (2.0 * V) * math.sin(2.0 * V * t)
    return math.exp(-G * t) * (0.5 + 0.5 * math.exp(-lam * t) * osc)


def fit_decay_rate(series: TimeSeries, window: tuple[float, float], period: float | None = None) -> float:
    """Least-squares decay rate of -log Pi(t) on [t_a, t_b].

    Oscillations are removed by a centered moving average over one oscillation
    period before the log-linear fit; pass period=None for monotone data.
    """
    t_a, t_b = window
    t = series.times
    v = series.values
    valid = np.ones(t.size, dtype=bool)
    if period is not None and period > 0 and t.size > 2:
        step = np.median(np.diff(t))
        w = int(round(period / step))
        w = max(1, w)
        if w % 2 == 0:
            w += 1
        if w > 1:
            kernel = np.full(w, 1.0 / w)
            v = np.convolve(v, kernel, mode="same")
            half = w // 2
            valid[:half] = False
            valid[t.size - half:] = False
    mask = (t >= t_a) & (t <= t_b) & valid
    if mask.sum() < 10:
        raise FitError("window contains fewer than 10 usable points")
    if np.any(v[mask] <= 0):
        raise FitError("non-positive values in fit window")
    slope = np.polyfit(t[mask], -np.log(v[mask]), 1)[0]
    return float(slope)
