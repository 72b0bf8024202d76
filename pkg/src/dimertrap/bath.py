"""Bath autocorrelation and window-integrated influence coefficients.

L(t) = (1/pi) int_0^inf dw J(w) [coth(w/2T) cos(wt) - i sin(wt)] with the
ohmic J(w) = 2*pi*alpha*w*exp(-w/omega_c). Influence coefficients are double
integrals of L over slice windows; swapping integration order turns each one
into a single frequency quadrature with an analytic window factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureError
from .model import BathParams

_CUT_DECADES = 45.0  # exp(-45) ~ 3e-20: integrand support is [0, 45*omega_c]


def _coth(x: float) -> float:
    if x < 1e-8:
        return 1.0 / x
    return 1.0 / math.tanh(x)


def _quad_checked(func, a, b, freq=0.0, weight=None, what="bath quadrature"):
    """quad wrapper raising QuadratureError when the error estimate is poor."""
    kwargs = dict(epsabs=1e-12, epsrel=1e-10, limit=500)
    if weight is not None and freq != 0.0:
        val, err = quad(func, a, b, weight=weight, wvar=freq, **kwargs)
    else:
        val, err = quad(func, a, b, **kwargs)
    if err > max(1e-8 * abs(val), 1e-9):
        raise QuadratureError(f"{what}: achieved tolerance {err:.2e} for value {val:.3e}")
    return val


def bath_autocorrelation(bath: BathParams, t: float) -> complex:
    """Caldeira-Leggett bath correlation L(t), adaptive quadrature."""
    a, wc, T = bath.alpha, bath.omega_c, bath.T
    if a == 0.0:
        return 0.0 + 0.0j
    cut = _CUT_DECADES * wc

    def f_sym(w):  # (1/pi) J(w) coth(w/2T); -> 4*alpha*T as w -> 0
        if w < 1e-8:
            return 4.0 * a * T
        return 2.0 * a * w * math.exp(-w / wc) * _coth(0.5 * w / T)

    def f_asym(w):  # (1/pi) J(w)
        return 2.0 * a * w * math.exp(-w / wc)

    re = _quad_checked(f_sym, 0.0, cut, freq=t, weight="cos", what="Re L(t)")
    if t == 0.0:
        im = 0.0
    else:
        im = -_quad_checked(f_asym, 0.0, cut, freq=t, weight="sin", what="Im L(t)")
    return complex(re, im)


@dataclass(frozen=True)
class BathCorrelationTable:
    """Influence coefficients eta_{kk'} for P slices of width dt.

    eta depends on (k, k') only through d = k - k'; ``eta_delta[d]`` holds the
    coefficient for lag d (d = 0 is the ordered half-square diagonal window).
    """

    P: int
    dt: float
    eta_delta: np.ndarray
    bath: BathParams

    def eta(self, k: int, kp: int) -> complex:
        if not (0 <= kp <= k <= self.P):
            raise IndexError("need 0 <= k' <= k <= P")
        return complex(self.eta_delta[k - kp])

    def matrix(self) -> np.ndarray:
        """Dense lower-triangular (P+1, P+1) table."""
        m = np.zeros((self.P + 1, self.P + 1), dtype=complex)
        for k in range(self.P + 1):
            for kp in range(k + 1):
                m[k, kp] = self.eta_delta[k - kp]
        return m


def influence_coefficients(bath: BathParams, t_total: float, P: int) -> BathCorrelationTable:
    """Window-integrated influence coefficients, dt = t_total / P.

    Off-diagonal (d >= 1): the window double integral of L(t - t') over
    [k dt, (k+1) dt] x [k' dt, (k'+1) dt] reduces to
    (1/pi) int dw J(w) (4 sin^2(w dt/2) / w^2) [coth(w/2T) cos(w d dt) - i sin(w d dt)].
    Diagonal (d = 0, ordered half-square):
    (1/pi) int dw (J(w)/w^2) [coth(w/2T)(1 - cos(w dt)) - i (w dt - sin(w dt))].
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if not (t_total > 0):
        raise ValueError("t_total must be > 0")
    a, wc, T = bath.alpha, bath.omega_c, bath.T
    dt = t_total / P
    eta = np.zeros(P + 1, dtype=complex)
    if a == 0.0:
        return BathCorrelationTable(P, dt, eta, bath)
    cut = _CUT_DECADES * wc

    def diag_re(w):  # -> 2*alpha*T*dt^2 as w -> 0
        if w < 1e-8:
            return 2.0 * a * T * dt * dt
        return 2.0 * a * math.exp(-w / wc) / w * _coth(0.5 * w / T) * (1.0 - math.cos(w * dt))

    def diag_im(w):  # -> -alpha*w^2*dt^3/3 as w -> 0
        if w < 1e-8:
            return -a * w * w * dt ** 3 / 3.0
        return -2.0 * a * math.exp(-w / wc) / w * (w * dt - math.sin(w * dt))

    eta[0] = complex(
        _quad_checked(diag_re, 0.0, cut, what="eta_00 real"),
        _quad_checked(diag_im, 0.0, cut, what="eta_00 imag"),
    )

    def window(w):  # 2*alpha*exp(-w/wc) * 4 sin^2(w dt/2) / w
        if w < 1e-8:
            return 2.0 * a * w * dt * dt
        s = math.sin(0.5 * w * dt)
        return 2.0 * a * math.exp(-w / wc) * 4.0 * s * s / w

    for d in range(1, P + 1):
        freq = d * dt

        def win_sym(w):  # -> 4*alpha*T*dt^2 as w -> 0
            if w < 1e-8:
                return 4.0 * a * T * dt * dt
            return window(w) * _coth(0.5 * w / T)

        re = _quad_checked(win_sym, 0.0, cut, freq=freq, weight="cos", what=f"eta lag {d} real")
        im = -_quad_checked(window, 0.0, cut, freq=freq, weight="sin", what=f"eta lag {d} imag")
        eta[d] = complex(re, im)

    table = BathCorrelationTable(P, dt, eta, bath)
    if table.eta_delta[0].real < 0:
        raise QuadratureError("diagonal influence coefficient has negative real part")
    return table
