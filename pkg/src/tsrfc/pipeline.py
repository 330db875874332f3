"""Series -> normalized spectra -> spline coefficients, in one call."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fda import BSplineBasis, PenaltyConfig, build_basis, fit_curves, gram_matrix
from .spectral import LagWindowConfig, SpectralDensity, density_matrix, estimate_normalized


@dataclass
class SpectralData:
    densities: list[SpectralDensity]
    freqs: np.ndarray
    values: np.ndarray     # (n, grid) normalized densities
    basis: BSplineBasis
    coeffs: np.ndarray     # (n, n_basis)
    gram: np.ndarray


def prepare(series, lag: LagWindowConfig = LagWindowConfig(), n_knots: int = 14,
            degree: int = 3, penalty: PenaltyConfig = PenaltyConfig()) -> SpectralData:
    densities = estimate_normalized(series, lag)
    freqs, values = density_matrix(densities)
    ws = series[0].ws
    basis = build_basis((0.0, ws / 2), n_knots, degree)
    coeffs = fit_curves(freqs, values, basis, penalty)
    return SpectralData(densities, freqs, values, basis, coeffs, gram_matrix(basis))
