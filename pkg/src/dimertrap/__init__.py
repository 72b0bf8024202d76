"""Excitation trapping in a dissipative dimer.

Three dynamical descriptions of the same system: non-Hermitian closed forms,
the Lindblad-form LvNE, and numerically exact real-time path-integral Monte
Carlo, plus the incoherent classical limit and short-to-long-time stitching.
"""

from .bath import BathCorrelationTable, bath_autocorrelation, influence_coefficients
from .classical import (
    ClassicalRates,
    classical_eigensystem,
    classical_survival,
    fit_classical_rates,
)
from .kernels import backend_name
from .lindblad import (
    IntegratorConfig,
    fit_decay_rate,
    lvne_rhs,
    pi11_trapfree_closed,
    propagate_lvne,
    survival_approx,
)
from .matching import MatchResult, fit_alpha, stitch
from .model import (
    BathParams,
    DimerParams,
    Spectrum2,
    eigensystem,
    survival_closed_form,
    transition_probability,
)
from .pimc import (
    KeldyshPath,
    McConfig,
    PimcResult,
    default_slices,
    exact_path_sum,
    free_propagator_element,
    path_weight,
    run_pimc,
)
from .series import TimeSeries, read_csv

__version__ = "0.1.0"
