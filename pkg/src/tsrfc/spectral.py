"""Lag-window (Parzen) spectral density estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import AR2Coeffs, TimeSeries


@dataclass(frozen=True)
class SpectralDensity:
    freqs: np.ndarray
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.ndim != 1 or f.shape != v.shape:
            raise ValueError("freqs and values must be 1-d arrays of equal length")
        if f.size < 2 or np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be strictly increasing with >= 2 points")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and nonnegative")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "values", v)

    def area(self) -> float:
        return float(np.trapezoid(self.values, self.freqs))


@dataclass(frozen=True)
class LagWindowConfig:
    """Truncation lag and output grid of the lag-window estimator.

    ``max_lag=None`` means T // 10, i.e. m = 100 for T = 1000.
    """

    max_lag: int | None = None
    grid_size: int = 512

    def __post_init__(self):
        if self.max_lag is not None and self.max_lag < 1:
            raise ValueError("max_lag must be a positive integer")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")

    def lag_for(self, T: int) -> int:
        m = self.max_lag if self.max_lag is not None else max(1, T // 10)
        if m >= T:
            raise ValueError(f"max_lag={m} must be smaller than the series length {T}")
        return m


def frequency_grid(grid_size: int = 512, ws: float = 1.0) -> np.ndarray:
    """``grid_size`` equispaced frequencies in (0, ws/2], right end included."""
    return (ws / 2) * np.arange(1, grid_size + 1) / grid_size


def autocovariance(ts, max_lag: int) -> np.ndarray:
    """Biased sample autocovariances for lags 0..max_lag (divisor T)."""
    x = np.asarray(ts.values if isinstance(ts, TimeSeries) else ts, dtype=float)
    T = x.size
    if not 0 <= max_lag < T:
        raise ValueError(f"max_lag must be in [0, T) = [0, {T}), got {max_lag}")
    d = x - x[0]  # exact zeros for a constant series
    d = d - d.mean()
    return np.array([d[: T - k] @ d[k:] for k in range(max_lag + 1)]) / T


def parzen_weight(u):
    """Parzen lag window on [-1, 1]; accepts scalars or arrays."""
    u = np.abs(np.asarray(u, dtype=float))
    if np.any(u > 1):
        raise ValueError("Parzen window is defined only for |u| <= 1")
    w = np.where(u <= 0.5, 1 - 6 * u**2 + 6 * u**3, 2 * (1 - u) ** 3)
    return w if w.ndim else float(w)


def _lag_window_values(acov: np.ndarray, freqs: np.ndarray, ws: float) -> np.ndarray:
    m = acov.size - 1
    k = np.arange(1, m + 1)
    w = parzen_weight(k / m) * acov[1:]
    cos = np.cos(2 * np.pi * np.outer(freqs / ws, k))
    f = (acov[0] + 2 * cos @ w) / (2 * math.pi)
    return np.maximum(f, 0.0)


def estimate_spectrum(ts: TimeSeries, cfg: LagWindowConfig = LagWindowConfig()) -> SpectralDensity:
    """Parzen lag-window estimate on ``cfg.grid_size`` points of (0, ws/2].

    Raises ``ValueError`` for a constant series, whose estimate is identically
    zero and cannot be normalized.
    """
    m = cfg.lag_for(len(ts))
    acov = autocovariance(ts, m)
    if acov[0] <= 0:
        raise ValueError("zero-variance series has no spectral density")
    freqs = frequency_grid(cfg.grid_size, ts.ws)
    return SpectralDensity(freqs, _lag_window_values(acov, freqs, ts.ws))


def normalize(sd: SpectralDensity) -> SpectralDensity:
    area = sd.area()
    if not area > 0:
        raise ValueError("cannot normalize a density with zero area")
    return SpectralDensity(sd.freqs, sd.values / area, normalized=True)


def ar2_true_spectrum(coeffs: AR2Coeffs, grid, ws: float = 1.0) -> SpectralDensity:
    """Closed-form AR(2) spectrum ``sigma^2 / (2 pi) / |1 - u1 z - u2 z^2|^2``."""
    grid = np.asarray(grid, dtype=float)
    z = np.exp(-2j * np.pi * grid / ws)
    h = 1 - coeffs.u1 * z - coeffs.u2 * z**2
    return SpectralDensity(grid, coeffs.sigma**2 / (2 * math.pi) / np.abs(h) ** 2)


def estimate_normalized(series, cfg: LagWindowConfig = LagWindowConfig()) -> list[SpectralDensity]:
    """Estimate and normalize a batch of series."""
    return [normalize(estimate_spectrum(ts, cfg)) for ts in series]


def density_matrix(densities) -> tuple[np.ndarray, np.ndarray]:
    """Stack densities sharing one grid into ``(freqs, values[n, grid])``."""
    freqs = densities[0].freqs
    for d in densities[1:]:
        if d.freqs.shape != freqs.shape or not np.array_equal(d.freqs, freqs):
            raise ValueError("densities are not on a shared frequency grid")
    return freqs, np.vstack([d.values for d in densities])
