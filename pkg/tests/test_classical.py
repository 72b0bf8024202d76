"""Tests for the incoherent transfer-matrix limit and rate fitting."""

import math

import numpy as np
import pytest

from dimertrap.classical import (
    ClassicalRates,
    classical_eigensystem,
    classical_survival,
    fit_classical_rates,
)
from dimertrap.errors import FitError
from dimertrap.series import TimeSeries

RATES = ClassicalRates(Et=1.0, Vt=1.0, Gt=0.2)


def test_rate_validation():
    with pytest.raises(ValueError):
        ClassicalRates(Et=-0.1, Vt=1.0, Gt=0.2)
    with pytest.raises(ValueError):
        ClassicalRates(Et=1.0, Vt=0.0, Gt=0.2)
    with pytest.raises(ValueError):
        ClassicalRates(Et=1.0, Vt=1.0, Gt=-0.2)


def test_transfer_matrix():
    m = RATES.transfer_matrix()
    np.testing.assert_allclose(m, [[1.0, -1.0], [-1.0, 1.2]])


def test_eigenvalues_frozen_reference():
    # Et = Vt = 1, Gt = 0.2: lambda_+- = 1.1 +- sqrt(1.01)
    lam, _ = classical_eigensystem(RATES)
    assert lam[0] == pytest.approx(2.1049875621, abs=1e-9)
    assert lam[1] == pytest.approx(0.0950124379, abs=1e-9)


def test_eigensystem_matches_dense_solver():
    rates = ClassicalRates(Et=0.7, Vt=1.3, Gt=0.9)
    lam, vecs = classical_eigensystem(rates)
    m = rates.transfer_matrix()
    ref = np.sort(np.linalg.eigvals(m).real)
    np.testing.assert_allclose(np.sort(lam), ref, atol=1e-12)
    for a in range(2):
        np.testing.assert_allclose(m @ vecs[:, a], lam[a] * vecs[:, a], atol=1e-12)
        assert np.linalg.norm(vecs[:, a]) == pytest.approx(1.0, abs=1e-12)


def test_survival_matches_matrix_exponential():
    import scipy.linalg

    for t in (0.0, 0.5, 2.0, 10.0):
        u = scipy.linalg.expm(-RATES.transfer_matrix() * t)
        assert classical_survival(RATES, t) == pytest.approx(u[0, 0], abs=1e-12)


def test_survival_overflow_safe_at_long_times():
    # the naive cosh form overflows near t ~ 710; the two-exponential form must not
    val = classical_survival(ClassicalRates(Et=1.0, Vt=1.0, Gt=0.2), 2000.0)
    assert 0.0 <= val < 1e-60


def test_survival_negative_time_rejected():
    with pytest.raises(ValueError):
        classical_survival(RATES, -0.5)


def test_fit_recovers_exact_rates():
    t = np.linspace(0.05, 8.0, 60)
    v = np.array([classical_survival(RATES, x) for x in t])
    fit, resid = fit_classical_rates(TimeSeries(t, v))
    assert fit.Et == pytest.approx(1.0, abs=1e-6)
    assert fit.Vt == pytest.approx(1.0, abs=1e-6)
    assert fit.Gt == pytest.approx(0.2, abs=1e-6)
    assert resid < 1e-8


def test_fit_with_noise_recovers_within_five_percent():
    t = np.linspace(0.05, 40.0, 200)
    v = np.array([classical_survival(RATES, x) for x in t])
    rng = np.random.default_rng(0)
    noisy = np.abs(v * (1.0 + 0.01 * rng.standard_normal(v.size)))
    fit, _ = fit_classical_rates(TimeSeries(t, noisy, 0.01 * v))
    assert fit.Et == pytest.approx(1.0, rel=0.05)
    assert fit.Vt == pytest.approx(1.0, rel=0.05)
    assert fit.Gt == pytest.approx(0.2, rel=0.05)


def test_fit_rejects_bad_input():
    t = np.linspace(0.1, 2.0, 10)
    v = np.exp(-t)
    with pytest.raises(FitError):
        fit_classical_rates(TimeSeries(t, v))  # too few points
    t = np.linspace(0.1, 2.0, 30)
    v = np.exp(-t)
    v[5] = 0.0
    with pytest.raises(FitError):
        fit_classical_rates(TimeSeries(t, v))  # non-positive values
