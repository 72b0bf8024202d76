"""Real-time path-integral dynamics of the trapped, bath-coupled dimer.

Discretization: forward/backward node strings with exact free-dimer short-time
propagators and window-integrated influence coefficients; the spin is constant
on each of the P slice windows, so lag-d coefficients enter for d = 0..P-1 and
the shared endpoint contributes only through the propagators. The bath couples
through sigma_z with charges sigma/2, which reproduces the Markovian dephasing
rate lambda = pi*alpha*T in the weak-coupling limit.

``exact_path_sum`` enumerates every path (desk scale, the MC oracle);
``run_pimc`` is Metropolis sampling with |W| as stationary density and a
trap-free reference weight W0 as sign normalization: the trap-free survival
summed over endpoints is exactly 1 at every P, so <W0/|W|> estimates 1/Z.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bath import BathCorrelationTable, influence_coefficients
from .errors import ErgodicityError, ExceptionalPointError, SignCollapseError
from .kernels import backend
from .model import BathParams, DimerParams, eigensystem
from .series import TimeSeries

MAX_ENUM_SLICES = 12
P_CAP = 64
_CHUNK = 256  # sweeps per kernel call; fixed for reproducibility
_VAR_FLOOR = 1e-30


@dataclass(frozen=True)
class KeldyshPath:
    """Forward/backward spin strings (+1 = node 1, -1 = node 2) sharing both
    endpoints: spin +1 at slice 0, the spin of node ``endpoint`` at slice P."""

    forward: np.ndarray
    backward: np.ndarray
    endpoint: int

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int8)
        bwd = np.asarray(self.backward, dtype=np.int8)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "backward", bwd)
        if fwd.shape != bwd.shape or fwd.ndim != 1 or fwd.size < 2:
            raise ValueError("forward/backward must be 1-d arrays of equal length >= 2")
        if not (set(np.unique(fwd)) | set(np.unique(bwd))) <= {-1, 1}:
            raise ValueError("spins must be +-1")
        if self.endpoint not in (1, 2):
            raise ValueError("endpoint node must be 1 or 2")
        end_spin = 1 if self.endpoint == 1 else -1
        if fwd[0] != 1 or bwd[0] != 1:
            raise ValueError("paths must start at node 1 (spin +1)")
        if fwd[-1] != end_spin or bwd[-1] != end_spin:
            raise ValueError("paths must close on the endpoint node")

    @property
    def slices(self) -> int:
        return self.forward.size - 1


@dataclass(frozen=True)
class McConfig:
    """Metropolis run geometry: total sweeps per chain, burn-in, independent
    chains with one 64-bit seed each, and the bin count for error estimation."""

    sweeps: int
    burn_in: int
    chains: int
    seeds: tuple[int, ...]
    bins: int = 32

    def __post_init__(self):
        if self.chains != len(self.seeds):
            raise ValueError("chains must equal len(seeds)")
        if not (self.sweeps > self.burn_in >= 0):
            raise ValueError("need sweeps > burn_in >= 0")
        if self.bins < 2:
            raise ValueError("need bins >= 2")

    @classmethod
    def from_seed(cls, seed: int, chains: int = 4, sweeps: int = 100_000,
                  burn_in: int = 1_000, bins: int = 32) -> "McConfig":
        seeds = np.random.SeedSequence(seed).generate_state(chains, dtype=np.uint64)
        return cls(sweeps=sweeps, burn_in=burn_in, chains=chains,
                   seeds=tuple(int(s) for s in seeds), bins=bins)


def default_slices(t: float, V: float = 1.0) -> int:
    """P = ceil(t*V/0.1), capped at 64 with a warning."""
    p = max(1, math.ceil(t * V / 0.1 - 1e-12))
    if p > P_CAP:
        warnings.warn(f"slice count {p} capped at {P_CAP}; dt exceeds 0.1/V")
        p = P_CAP
    return p


def free_propagator_matrix(params: DimerParams, dt: float) -> np.ndarray:
    """exp(-iH dt) via the spectral decomposition; scaling-and-squaring expm
    at the exceptional point Gamma = 2V."""
    try:
        spec = eigensystem(params)
    except ExceptionalPointError:
        return scipy.linalg.expm(-1j * params.hamiltonian() * dt)
    phases = np.exp(-1j * spec.eigenvalues * dt)
    return (spec.right * phases) @ spec.left.conj().T


def free_propagator_element(params: DimerParams, n: int, n_from: int, dt: float,
                            direction: str = "forward") -> complex:
    """<n|exp(-iH dt)|n'> (forward) or <n'|exp(+iH^dagger dt)|n> (backward);
    the two are complex conjugates of each other even for Gamma != 0."""
    if n not in (1, 2) or n_from not in (1, 2):
        raise ValueError("nodes must be 1 or 2")
    if not dt > 0:
        raise ValueError("dt must be > 0")
    el = free_propagator_matrix(params, dt)[n - 1, n_from - 1]
    if direction == "forward":
        return complex(el)
    if direction == "backward":
        return complex(np.conj(el))
    raise ValueError("direction must be 'forward' or 'backward'")


def _eta_unit_spin(table: BathCorrelationTable, P: int) -> np.ndarray:
    """Lag coefficients rescaled from sigma/2 charges to unit +-1 spins."""
    return table.eta_delta[:P] / 4.0


def influence_phase(path: KeldyshPath, table: BathCorrelationTable) -> complex:
    """Phi[path] with sigma/2 charges over slices 0..P-1."""
    P = path.slices
    if table.P != P:
        raise ValueError("path and table disagree on slice count")
    eta = _eta_unit_spin(table, P)
    sf = path.forward[:P].astype(float)
    sb = path.backward[:P].astype(float)
    phi = 0.0 + 0.0j
    for k in range(P):
        x = sf[k] - sb[k]
        if x == 0.0:
            continue
        for kp in range(k + 1):
            e = eta[k - kp]
            phi += x * (e * sf[kp] - np.conj(e) * sb[kp])
    return complex(phi)


def path_weight(path: KeldyshPath, table: BathCorrelationTable,
                params: DimerParams) -> complex:
    """Forward propagators x conjugated backward propagators x exp(-Phi)."""
    P = path.slices
    kf = free_propagator_matrix(params, table.dt)
    f_idx = ((1 - path.forward) // 2).astype(np.intp)
    b_idx = ((1 - path.backward) // 2).astype(np.intp)
    amp = 1.0 + 0.0j
    for k in range(P):
        amp *= kf[f_idx[k + 1], f_idx[k]]
    for k in range(P):
        amp *= np.conj(kf[b_idx[k + 1], b_idx[k]])
    return complex(amp * np.exp(-influence_phase(path, table)))


def exact_path_sum(params: DimerParams, bath: BathParams, t: float, P: int):
    """Deterministic sum over all 2^(2(P-1)+1) discretized paths.

    Returns (pi_{1,1}(t), pi_{2,1}(t)). Desk-scale oracle: refuses P > 12.
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if P > MAX_ENUM_SLICES:
        raise ValueError(
            f"P={P} needs {2 ** (2 * (P - 1) + 1)} paths; exact sum is limited "
            f"to P <= {MAX_ENUM_SLICES}"
        )
    if not t > 0:
        raise ValueError("t must be > 0")
    dt = t / P
    kf = free_propagator_matrix(params, dt)
    table = influence_coefficients(bath, t, P)
    eta = _eta_unit_spin(table, P)

    n_int = P - 1
    nbits = 2 * n_int + 1
    count = 1 << nbits
    total = np.zeros(2, dtype=complex)
    chunk = 1 << 16
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count), dtype=np.int64)
        fn = np.zeros((idx.size, P + 1), dtype=np.intp)
        bn = np.zeros((idx.size, P + 1), dtype=np.intp)
        for k in range(1, P):
            fn[:, k] = (idx >> (k - 1)) & 1
            bn[:, k] = (idx >> (n_int + k - 1)) & 1
        end = (idx >> (2 * n_int)) & 1
        fn[:, P] = end
        bn[:, P] = end

        amp = np.ones(idx.size, dtype=complex)
        for k in range(P):
            amp *= kf[fn[:, k + 1], fn[:, k]]
        for k in range(P):
            amp *= np.conj(kf[bn[:, k + 1], bn[:, k]])

        if bath.alpha != 0.0:
            sf = 1.0 - 2.0 * fn[:, :P]
            sb = 1.0 - 2.0 * bn[:, :P]
            phi = np.zeros(idx.size, dtype=complex)
            x = sf - sb
            for k in range(P):
                for kp in range(k + 1):
                    e = eta[k - kp]
                    phi += x[:, k] * (e * sf[:, kp] - np.conj(e) * sb[:, kp])
            amp = amp * np.exp(-phi)

        total[0] += amp[end == 0].sum()
        total[1] += amp[end == 1].sum()
    return float(total[0].real), float(total[1].real)


@dataclass(frozen=True)
class PimcResult:
    """Survival and trapped-node populations with standard errors, plus the
    measured average sign and slice count per grid time."""

    pi11: TimeSeries
    pi21: TimeSeries
    avg_sign: np.ndarray
    slices: np.ndarray


def _chain_stats(accum: np.ndarray):
    """Ratio estimates + jackknife variances from per-bin accumulators."""
    rows = accum[accum[:, 8] > 0]
    nbins = rows.shape[0]
    tot = rows.sum(axis=0)
    den = tot[4]
    count = tot[8]
    pi = np.array([tot[0] / den, tot[2] / den])
    den_mean = den / count
    sign = math.sqrt(tot[6] ** 2 + tot[7] ** 2) / count
    if nbins < 2:
        return pi, np.zeros(2), den_mean, 0.0, sign
    # leave-one-bin-out jackknife for the two ratios and the denominator mean
    loo_den = den - rows[:, 4]
    loo_cnt = count - rows[:, 8]
    jk1 = (tot[0] - rows[:, 0]) / loo_den
    jk2 = (tot[2] - rows[:, 2]) / loo_den
    jkd = loo_den / loo_cnt
    fac = (nbins - 1) / nbins
    var = np.array([
        fac * np.sum((jk1 - jk1.mean()) ** 2),
        fac * np.sum((jk2 - jk2.mean()) ** 2),
    ])
    den_var = fac * np.sum((jkd - jkd.mean()) ** 2)
    return pi, var, den_mean, den_var, sign


def _run_chain(seed_material, P, kf, k0, eta, mc: McConfig):
    kf_re = np.ascontiguousarray(kf.real)
    kf_im = np.ascontiguousarray(kf.imag)
    k0_re = np.ascontiguousarray(k0.real)
    k0_im = np.ascontiguousarray(k0.imag)
    kabs = np.ascontiguousarray(np.abs(kf))
    eta_re = np.ascontiguousarray(eta.real)
    eta_im = np.ascontiguousarray(eta.imag)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed_material)))
    f = np.zeros(P + 1, dtype=np.int8)
    b = np.zeros(P + 1, dtype=np.int8)
    phi = np.zeros(2)
    nmeas = mc.sweeps - mc.burn_in
    nbins = min(mc.bins, nmeas)
    accum = np.zeros((nbins, 9))
    n_moves = 3 * (P - 1) + 1

    burn_accepted = 0
    done = 0
    while done < mc.sweeps:
        if done < mc.burn_in:
            n = min(_CHUNK, mc.burn_in - done)
        else:
            n = min(_CHUNK, mc.sweeps - done)
        phi[0], phi[1] = backend.compute_phi(f, b, eta_re, eta_im, P)
        moves = rng.integers(0, n_moves, size=n * n_moves, dtype=np.int64)
        unifs = rng.random(n * n_moves)
        bins = np.empty(n, dtype=np.int64)
        for i in range(n):
            g = done + i
            bins[i] = -1 if g < mc.burn_in else ((g - mc.burn_in) * nbins) // nmeas
        acc = backend.run_chunk(f, b, kf_re, kf_im, k0_re, k0_im, kabs,
                                eta_re, eta_im, moves, unifs, phi, accum, bins, P)
        if done < mc.burn_in:
            burn_accepted += acc
        done += n
    if mc.burn_in > 0 and burn_accepted == 0:
        raise ErgodicityError("no accepted moves during burn-in")
    return _chain_stats(accum)


def _merge_chains(stats):
    """Inverse-variance merge, folded deterministically in seed order."""
    pi = np.zeros(2)
    err = np.zeros(2)
    for comp in range(2):
        w = np.array([1.0 / (s[1][comp] + _VAR_FLOOR) for s in stats])
        est = np.array([s[0][comp] for s in stats])
        pi[comp] = float(np.sum(w * est) / np.sum(w))
        var = 1.0 / np.sum(w)
        err[comp] = math.sqrt(var) if var > _VAR_FLOOR * 10 else 0.0
    den = float(np.mean([s[2] for s in stats]))
    den_sigma = math.sqrt(sum(s[3] for s in stats)) / len(stats)
    sign = float(np.mean([s[4] for s in stats]))
    return pi, err, den, den_sigma, sign


def _max_workers(chains: int) -> int:
    cap = os.environ.get("DIMERTRAP_THREADS")
    cap = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(chains, cap))


def run_pimc(
    params: DimerParams,
    bath: BathParams,
    grid,
    mc: McConfig,
    P_of_t=None,
) -> PimcResult:
    """Metropolis PIMC of pi_{1,1}(t) and pi_{2,1}(t) on the grid.

    Each grid time is an independent simulation; P_of_t may be None (default
    rule), a callable t -> P, or a sequence of slice counts. Chains run as
    independent workers (thread count capped by DIMERTRAP_THREADS) and are
    merged in seed order, so output does not depend on scheduling.
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    pi1 = np.zeros(n)
    pi2 = np.zeros(n)
    e1 = np.zeros(n)
    sign = np.ones(n)
    slices = np.zeros(n, dtype=int)

    k0_params = DimerParams(E=params.E, V=params.V, Gamma=0.0)
    for i, t in enumerate(grid):
        if t == 0.0:
            pi1[i] = 1.0
            continue
        if P_of_t is None:
            P = default_slices(t, params.V)
        elif callable(P_of_t):
            P = int(P_of_t(t))
        else:
            P = int(P_of_t[i])
        slices[i] = P
        dt = t / P
        kf = free_propagator_matrix(params, dt)
        k0 = free_propagator_matrix(k0_params, dt)
        table = influence_coefficients(bath, t, P)
        eta = _eta_unit_spin(table, P)

        seed_mats = [(s, i) for s in mc.seeds]
        if len(seed_mats) == 1:
            stats = [_run_chain(seed_mats[0], P, kf, k0, eta, mc)]
        else:
            with ThreadPoolExecutor(max_workers=_max_workers(mc.chains)) as pool:
                futures = [pool.submit(_run_chain, sm, P, kf, k0, eta, mc)
                           for sm in seed_mats]
                stats = [fut.result() for fut in futures]
        pi, err, den, den_sigma, avg_sign = _merge_chains(stats)
        if abs(den) < 3.0 * den_sigma:
            raise SignCollapseError(
                f"sign collapse at t={t}: normalization {den:.3e} +- {den_sigma:.3e}, "
                f"average sign {avg_sign:.3e}",
                average_sign=avg_sign,
            )
        pi1[i], pi2[i] = pi
        e1[i] = err[0]
        sign[i] = avg_sign
    return PimcResult(
        pi11=TimeSeries(grid, pi1, e1),
        pi21=TimeSeries(grid, pi2),
        avg_sign=sign,
        slices=slices,
    )
