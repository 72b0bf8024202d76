"""Tests for coupling refit and short-to-long-time stitching."""

import math

import numpy as np
import pytest

from dimertrap.errors import FitError, StitchError
from dimertrap.lindblad import IntegratorConfig, propagate_lvne
from dimertrap.matching import fit_alpha, match_and_stitch, stitch
from dimertrap.model import DimerParams
from dimertrap.series import TimeSeries

PARAMS = DimerParams(E=1.0, V=1.0, Gamma=0.1)
RHO0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


def _lvne_series(alpha, times, sigma=0.005):
    lam = math.pi * alpha
    cfg = IntegratorConfig(dt=1e-3, t_max=float(times[-1]))
    values = propagate_lvne(RHO0, PARAMS, lam, times, cfg).values
    return TimeSeries(times, values, np.full(times.size, sigma))


def test_fit_alpha_recovers_known_coupling():
    times = np.linspace(0.5, 6.0, 12)
    pseudo = _lvne_series(0.1, times)
    fit = fit_alpha(pseudo, PARAMS, T=1.0, window=(0.5, 6.0), alpha_max=0.5)
    assert fit.alpha == pytest.approx(0.1, abs=2e-3)
    assert fit.goodness < 0.1
    assert fit.within_validity


def test_fit_alpha_insensitive_to_window_choice():
    times = np.linspace(0.5, 8.0, 16)
    pseudo = _lvne_series(0.25, times)
    fit = fit_alpha(pseudo, PARAMS, T=1.0, window=(2.0, 8.0), alpha_max=1.0)
    assert fit.alpha == pytest.approx(0.25, abs=5e-3)


def test_fit_alpha_requires_points_and_errors():
    times = np.linspace(0.5, 6.0, 12)
    pseudo = _lvne_series(0.1, times)
    with pytest.raises(FitError):
        fit_alpha(pseudo, PARAMS, T=1.0, window=(5.9, 6.0))  # < 5 points
    bare = TimeSeries(times, pseudo.values, np.zeros(times.size))
    with pytest.raises(FitError):
        fit_alpha(bare, PARAMS, T=1.0, window=(0.5, 6.0))


def test_fit_alpha_detects_boundary_minimum():
    # data generated far above alpha_max pushes the optimum to the right edge
    times = np.linspace(0.5, 6.0, 12)
    pseudo = _lvne_series(0.5, times)
    with pytest.raises(FitError, match="widen bounds"):
        fit_alpha(pseudo, PARAMS, T=1.0, window=(0.5, 6.0), alpha_max=0.05)


def test_stitch_concatenates_and_rescales():
    times = np.linspace(0.5, 5.0, 10)
    pimc = _lvne_series(0.1, times, sigma=0.01)
    ext_times = np.linspace(0.0, 20.0, 201)
    ext = TimeSeries(ext_times, _lvne_series(0.1, ext_times, sigma=0.0).values)
    out = stitch(pimc, ext, t_cross=5.0)
    assert out.times[0] == 0.5
    assert out.times[-1] == 20.0
    assert np.all(np.diff(out.times) > 0)
    # head is the PIMC branch unchanged
    np.testing.assert_allclose(out.values[: len(pimc)], pimc.values)
    # extension carries the crossover error bar
    assert np.all(out.errors[len(pimc):] == pimc.errors[-1])


def test_stitch_rejects_inconsistent_branches():
    times = np.linspace(0.5, 5.0, 10)
    pimc = _lvne_series(0.1, times, sigma=1e-4)
    ext_times = np.linspace(0.0, 20.0, 201)
    wrong = TimeSeries(ext_times, 1.3 * _lvne_series(0.1, ext_times).values)
    with pytest.raises(StitchError, match="rescale factor"):
        stitch(pimc, wrong, t_cross=5.0)


def test_stitch_requires_coverage():
    times = np.linspace(0.5, 5.0, 10)
    pimc = _lvne_series(0.1, times)
    short = TimeSeries(np.linspace(0.0, 3.0, 31),
                       _lvne_series(0.1, np.linspace(0.0, 3.0, 31)).values)
    with pytest.raises(StitchError):
        stitch(pimc, short, t_cross=5.0)
    with pytest.raises(StitchError):
        stitch(pimc, short, t_cross=0.1)


def test_match_and_stitch_end_to_end():
    times = np.linspace(0.5, 6.0, 12)
    pseudo = _lvne_series(0.1, times, sigma=0.005)
    result = match_and_stitch(pseudo, PARAMS, T=1.0, t_max=30.0)
    assert result.alpha == pytest.approx(0.1, abs=5e-3)
    assert result.t_cross == 6.0
    assert abs(result.factor - 1.0) < 0.01
    assert result.stitched.times[-1] == 30.0
    # long-time branch decays roughly like exp(-Gamma t)
    tail = result.stitched.window(20.0, 30.0)
    slope = np.polyfit(tail.times, -np.log(tail.values), 1)[0]
    assert slope == pytest.approx(0.1, rel=0.1)
