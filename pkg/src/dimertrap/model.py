"""Dimer model: parameters, non-Hermitian spectral solver, closed-form survival.

Node 1 (index 0) carries the initial excitation; node 2 (index 1) is the trap.
The total Hamiltonian is H = H0 - i*Gamma |2><2| with H0 = E*1 - V*sigma_x,
so the trap decays amplitude (eigenvalues E +- sqrt(V^2 - Gamma^2/4) - i*Gamma/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalPointError, OverdampedError


@dataclass(frozen=True)
class DimerParams:
    """System parameters in units hbar = k_B = 1: onsite energy E, coupling V > 0,
    trapping strength Gamma >= 0."""

    E: float = 1.0
    V: float = 1.0
    Gamma: float = 0.1

    def __post_init__(self):
        if not math.isfinite(self.E):
            raise ValueError("E must be finite")
        if not (self.V > 0 and math.isfinite(self.V)):
            raise ValueError("V must be > 0")
        if not (self.Gamma >= 0 and math.isfinite(self.Gamma)):
            raise ValueError("Gamma must be >= 0")

    def bare_hamiltonian(self) -> np.ndarray:
        """Trap-free H0 = E*1 - V*sigma_x."""
        return np.array([[self.E, -self.V], [-self.V, self.E]], dtype=complex)

    def hamiltonian(self) -> np.ndarray:
        """Full non-Hermitian H = H0 - i*Gamma |2><2|."""
        h = self.bare_hamiltonian()
        h[1, 1] -= 1j * self.Gamma
        return h


@dataclass(frozen=True)
class BathParams:
    """Ohmic Caldeira-Leggett bath with exponential cutoff:
    J(w) = 2*pi*alpha*w*exp(-w/omega_c), temperature T (k_B = 1)."""

    alpha: float = 0.0
    omega_c: float = 5.0
    T: float = 1.0

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be >= 0")
        if not (self.omega_c > 0 and math.isfinite(self.omega_c)):
            raise ValueError("omega_c must be > 0")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("T must be > 0")

    def lambda_rate(self) -> float:
        """Markovian dephasing rate lambda = pi * alpha * T."""
        return math.pi * self.alpha * self.T

    def spectral_density(self, omega):
        """J(omega) for omega >= 0; zero for negative arguments."""
        w = np.asarray(omega, dtype=float)
        j = 2.0 * math.pi * self.alpha * w * np.exp(-w / self.omega_c)
        return np.where(w >= 0, j, 0.0)


@dataclass(frozen=True)
class Spectrum2:
    """Complex eigenvalues with bi-orthonormal right/left eigenvectors.

    ``right[:, a]`` is |Phi_a>, ``left[:, a]`` is |tilde-Phi_a>, ordered so
    index 0 is the less-damped ('+') branch. They satisfy
    <tilde-Phi_a|Phi_b> = delta_ab and sum_a |Phi_a><tilde-Phi_a| = 1.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray


def eigensystem(params: DimerParams) -> Spectrum2:
    """Analytic eigensystem of the non-Hermitian 2x2 dimer Hamiltonian.

    Valid for any Gamma >= 0 except the exceptional point Gamma = 2V, where
    the matrix is defective and the bi-orthonormal basis does not exist.
    """
    E, V, G = params.E, params.V, params.Gamma
    if G == 2.0 * V:
        raise ExceptionalPointError("exceptional point: bi-orthonormal basis undefined")
    c = E - 0.5j * G
    d = 0.5j * G
    s = np.sqrt(complex(V * V - 0.25 * G * G))  # = sqrt(V^2 + d^2)
    eigvals = np.array([c + s, c - s])

    # (H - (c +- s)) v = 0  with H = c*1 + d*sigma_z - V*sigma_x
    # gives v_+- proportional to (V, d -+ s).
    right = np.empty((2, 2), dtype=complex)
    left = np.empty((2, 2), dtype=complex)
    for a, sa in enumerate((s, -s)):
        v = np.array([V, d - sa], dtype=complex)
        v = v / np.linalg.norm(v)
        # deterministic phase: first component real and non-negative
        v = v * np.exp(-1j * np.angle(v[0]))
        # H is complex symmetric, so the left row vector is v / (v . v)
        u = v / (v @ v)
        right[:, a] = v
        left[:, a] = np.conj(u)
    return Spectrum2(eigvals, right, left)


def transition_probability(params: DimerParams, j: int, k: int, t: float) -> float:
    """|<k| exp(-iHt) |j>|^2 from the spectral decomposition.

    Nodes are 1-based (1 = initial node, 2 = trap node); t >= 0.
    """
    if j not in (1, 2) or k not in (1, 2):
        raise ValueError("nodes must be 1 or 2")
    if t < 0:
        raise ValueError("t must be >= 0")
    spec = eigensystem(params)
    amp = 0.0 + 0.0j
    for a in range(2):
        amp += (
            np.exp(-1j * spec.eigenvalues[a] * t)
            * spec.right[k - 1, a]
            * np.conj(spec.left[j - 1, a])
        )
    return float(abs(amp) ** 2)


def survival_closed_form(params: DimerParams, t: float) -> float:
    """Closed-form survival Pi(t) = pi_{1,1}(t) for 0 <= Gamma < 2V, lambda = 0.

    Pi(t) = exp(-Gamma t) cos^2(phi - t V cos phi) / cos^2 phi with
    phi = arcsin(Gamma / 2V). The decaying sign convention makes the phase
    enter as (phi - t V cos phi); this reproduces exp(-iHt) exactly.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    G, V = params.Gamma, params.V
    if G >= 2.0 * V:
        raise OverdampedError("overdamped regime: closed form Pi(t) not applicable")
    phi = math.asin(G / (2.0 * V))
    c = math.cos(phi)
    return math.exp(-G * t) * math.cos(phi - t * V * c) ** 2 / (c * c)
