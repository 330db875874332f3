"""Robust clustering of stationary time series through their spectral densities.

Pipeline: simulate or load series (:mod:`tsrfc.sim`, :mod:`tsrfc.io`),
estimate normalized lag-window spectra (:mod:`tsrfc.spectral`), represent
them as B-spline curves (:mod:`tsrfc.fda`), and cluster with the trimmed,
variance-constrained functional mixture (:mod:`tsrfc.rfc`) or the
total-variation hierarchical baselines (:mod:`tsrfc.baselines`).
"""

from .baselines import hsm_cluster, tvd, tvd_cluster
from .evaluation import adjusted_rand_index, ccr, rand_index, score_partition
from .fda import BSplineBasis, PenaltyConfig, build_basis, fit_curves, gram_matrix, penalized_fit
from .partition import Partition
from .pipeline import SpectralData, prepare
from .rfc import RFCConfig, RFCFitError, RFCModel, enforce_constraints, posterior_assign, rfc_fit, select_dims
from .sim import AR2Spec, ScenarioSpec, TimeSeries, ar2_coeffs, generate_scenario, simulate_ar2
from .spectral import LagWindowConfig, SpectralDensity, estimate_spectrum, normalize

__version__ = "0.1.0"
