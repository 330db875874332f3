"""AR(2) processes, AR(2) mixtures and the labelled contamination scenarios.

Every random draw goes through :class:`numpy.random.Generator` objects built
from a :class:`numpy.random.SeedSequence`.  Scenario series get their own
substream keyed by (group, index), so adding series to one group never
changes the draws of another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

SCHEMES = ("clean", "i", "ii", "iii")

# substream group keys
_GROUP_CLUSTER_1 = 0
_GROUP_CLUSTER_2 = 1
_GROUP_CONTAM = 2


@dataclass(frozen=True)
class AR2Spec:
    """Root parameterization of an AR(2) process.

    Parameters
    ----------
    nu : float
        Modal frequency, in the same units as ``ws``; must lie in (0, ws/2).
    M : float
        Modulus of the (complex conjugate) characteristic roots, > 1.
    ws : float
        Sampling frequency in Hertz.
    """

    nu: float
    M: float
    ws: float = 1.0

    def __post_init__(self):
        if not self.ws > 0:
            raise ValueError(f"sampling frequency must be positive, got {self.ws}")
        if not self.M > 1:
            raise ValueError(f"root modulus must exceed 1 for causality, got {self.M}")
        if not 0 < self.nu < self.ws / 2:
            raise ValueError(f"nu must lie in (0, ws/2) = (0, {self.ws / 2}), got {self.nu}")


@dataclass(frozen=True)
class AR2Coeffs:
    u1: float
    u2: float
    sigma: float = 1.0

    def roots(self) -> np.ndarray:
        """Roots of ``1 - u1*y - u2*y**2``."""
        if self.u2 == 0:
            if self.u1 == 0:
                return np.array([], dtype=complex)
            return np.array([1.0 / self.u1], dtype=complex)
        return np.roots([-self.u2, -self.u1, 1.0]).astype(complex)

    def is_causal(self) -> bool:
        return bool(np.all(np.abs(self.roots()) > 1.0))


@dataclass(frozen=True)
class MixtureSpec:
    components: tuple[AR2Spec, ...]
    weights: tuple[float, ...]
    noise_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.components) == 0:
            raise ValueError("a mixture needs at least one component")
        if len(self.components) != len(self.weights):
            raise ValueError("components and weights must have equal length")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    ws: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a time series needs at least two observations")
        if not np.all(np.isfinite(v)):
            raise ValueError("time series values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ScenarioSpec:
    """One cell of the simulation design.

    ``mixture_weights`` are the a_1, a_2 used for schemes (ii) and (iii).
    """

    scheme: str = "clean"
    n_per_cluster: int = 50
    n_contaminating: int = 11
    T: int = 1000
    seed: int = 0
    burn_in: int = 500
    mixture_weights: tuple[float, float] = (1.0, 1.0)
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "clean":
            object.__setattr__(self, "n_contaminating", 0)
        elif self.n_contaminating < 1:
            raise ValueError("contaminated schemes need n_contaminating >= 1")
        if self.n_per_cluster < 1:
            raise ValueError("n_per_cluster must be positive")
        if self.T < 2:
            raise ValueError("series length must be at least 2")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        object.__setattr__(self, "mixture_weights", tuple(float(w) for w in self.mixture_weights))


def ar2_coeffs(spec: AR2Spec) -> AR2Coeffs:
    """Map (nu, M, ws) to AR coefficients with roots M*exp(+-i*2*pi*nu/ws)."""
    omega0 = 2.0 * math.pi * spec.nu / spec.ws
    return AR2Coeffs(u1=2.0 * math.cos(omega0) / spec.M, u2=-1.0 / spec.M**2, sigma=1.0)


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _simulate_ar2(coeffs: AR2Coeffs, T: int, burn_in: int, rng: np.random.Generator) -> np.ndarray:
    eps = rng.standard_normal(T + burn_in) * coeffs.sigma
    # X_t - u1 X_{t-1} - u2 X_{t-2} = eps_t, zero initial state
    x = lfilter([1.0], [1.0, -coeffs.u1, -coeffs.u2], eps)
    return x[burn_in:]


def simulate_ar2(coeffs: AR2Coeffs, T: int = 1000, burn_in: int = 500, seed=None,
                 ws: float = 1.0) -> TimeSeries:
    """Simulate ``X_t = u1 X_{t-1} + u2 X_{t-2} + eps_t`` with Gaussian innovations.

    The first ``burn_in`` samples are dropped. ``seed`` may be an int, a
    ``SeedSequence`` or an existing ``Generator``.
    """
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    if T < 2:
        raise ValueError("T must be at least 2")
    if not coeffs.is_causal():
        raise ValueError(f"non-causal AR(2) coefficients: roots {coeffs.roots()}")
    rng = _as_generator(seed)
    return TimeSeries(_simulate_ar2(coeffs, T, burn_in, rng), ws=ws)


def simulate_mixture(spec: MixtureSpec, T: int = 1000, burn_in: int = 500, seed=None) -> TimeSeries:
    """Weighted sum of independent AR(2) processes plus white noise."""
    rng = _as_generator(seed)
    ws = spec.components[0].ws
    x = np.zeros(T)
    for comp, w in zip(spec.components, spec.weights):
        y = _simulate_ar2(ar2_coeffs(comp), T, burn_in, rng)
        x += w * y
    if spec.noise_sd > 0:
        x += spec.noise_sd * rng.standard_normal(T)
    return TimeSeries(x, ws=ws)


def _substream(seed: int, group: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(group, index)))


def generate_scenario(spec: ScenarioSpec) -> tuple[list[TimeSeries], np.ndarray]:
    """Simulate one labelled data set.

    Returns the series and their labels: 1 and 2 for the two clean groups
    (nu = 0.21 and 0.22, M = 1.15), 0 for contaminating series.
    """
    series: list[TimeSeries] = []
    labels: list[int] = []
    T, burn = spec.T, spec.burn_in

    for group, nu, label in ((_GROUP_CLUSTER_1, 0.21, 1), (_GROUP_CLUSTER_2, 0.22, 2)):
        coeffs = ar2_coeffs(AR2Spec(nu=nu, M=1.15))
        for i in range(spec.n_per_cluster):
            series.append(simulate_ar2(coeffs, T, burn, _substream(spec.seed, group, i)))
            labels.append(label)

    for i in range(spec.n_contaminating):
        rng = _substream(spec.seed, _GROUP_CONTAM, i)
        if spec.scheme == "i":
            nu = rng.uniform(0.20, 0.25)
            ts = simulate_ar2(ar2_coeffs(AR2Spec(nu=nu, M=1.2)), T, burn, rng)
        elif spec.scheme == "ii":
            mix = MixtureSpec((AR2Spec(0.20, 1.05), AR2Spec(0.25, 1.1)),
                              spec.mixture_weights, spec.noise_sd)
            ts = simulate_mixture(mix, T, burn, rng)
        else:
            nu1 = rng.uniform(0.19, 0.22)
            nu2 = rng.uniform(0.24, 0.26)
            mix = MixtureSpec((AR2Spec(nu1, 1.05), AR2Spec(nu2, 1.1)),
                              spec.mixture_weights, spec.noise_sd)
            ts = simulate_mixture(mix, T, burn, rng)
        series.append(ts)
        labels.append(0)

    return series, np.asarray(labels, dtype=int)


def as_matrix(series: Sequence[TimeSeries]) -> np.ndarray:
    """Stack equal-length series into an (n, T) array."""
    return np.vstack([s.values for s in series])
