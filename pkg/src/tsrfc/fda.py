"""Cubic B-spline representation of spectral densities.

Curves are stored as coefficient vectors over a fixed :class:`BSplineBasis`.
Inner products between curves reduce to ``c @ W @ d`` with ``W`` the Gram
matrix of the basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import BSpline


@dataclass(frozen=True)
class PenaltyConfig:
    lam: float = 3e-6
    penalty_order: int = 2

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("smoothing parameter must be nonnegative")
        if self.penalty_order < 0:
            raise ValueError("penalty_order must be nonnegative")


@dataclass(frozen=True)
class FunctionalDatum:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be a finite 1-d vector")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    """Clamped B-spline basis on ``[lo, hi]`` with equispaced interior knots.

    ``knots`` is the full knot vector; the boundary knots are repeated
    ``degree + 1`` times.
    """

    degree: int
    knots: np.ndarray

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def n_basis(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.knots)

    @cached_property
    def _spline(self) -> BSpline:
        return BSpline(self.knots, np.eye(self.n_basis), self.degree, extrapolate=False)

    def design(self, points, deriv: int = 0) -> np.ndarray:
        """Matrix of basis values (or derivatives), shape ``(len(points), n_basis)``."""
        x = np.atleast_1d(np.asarray(points, dtype=float))
        lo, hi = self.domain
        span = hi - lo
        if np.any(x < lo - 1e-12 * span) or np.any(x > hi + 1e-12 * span):
            raise ValueError(f"evaluation points must lie in the basis domain [{lo}, {hi}]")
        x = np.clip(x, lo, hi)
        spl = self._spline if deriv == 0 else self._spline.derivative(deriv)
        out = spl(x)
        return np.nan_to_num(out, copy=False)

    def describe(self) -> dict:
        return {"degree": self.degree, "knots": self.knots.tolist(), "n_basis": self.n_basis}


def build_basis(domain=(0.0, 0.5), n_interior_knots: int = 14, degree: int = 3) -> BSplineBasis:
    lo, hi = (float(v) for v in domain)
    if not hi > lo:
        raise ValueError(f"degenerate domain [{lo}, {hi}]")
    if n_interior_knots < 1:
        raise ValueError("need at least one interior knot")
    if degree < 1:
        raise ValueError("degree must be at least 1")
    interior = np.linspace(lo, hi, n_interior_knots + 2)[1:-1]
    knots = np.concatenate([np.full(degree + 1, lo), interior, np.full(degree + 1, hi)])
    return BSplineBasis(degree=degree, knots=knots)


def _quadrature(basis: BSplineBasis, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over the knot spans."""
    gx, gw = np.polynomial.legendre.leggauss(n_points)
    bp = basis.breakpoints
    a, b = bp[:-1, None], bp[1:, None]
    nodes = (0.5 * (b - a) * gx + 0.5 * (b + a)).ravel()
    weights = (0.5 * (b - a) * gw).ravel()
    return nodes, weights


def _product_integral(basis: BSplineBasis, deriv: int) -> np.ndarray:
    # the integrand is a piecewise polynomial of degree 2*(degree - deriv);
    # degree+1 Gauss points per span integrate it exactly
    nodes, weights = _quadrature(basis, basis.degree + 1)
    B = basis.design(nodes, deriv)
    M = B.T @ (weights[:, None] * B)
    return 0.5 * (M + M.T)


def gram_matrix(basis: BSplineBasis) -> np.ndarray:
    """``W[a, b] = integral of B_a * B_b`` over the domain."""
    return _product_integral(basis, 0)


def penalty_matrix(basis: BSplineBasis, order: int = 2) -> np.ndarray:
    """Roughness penalty ``P[a, b] = integral of B_a^(order) * B_b^(order)``."""
    if order > basis.degree:
        return np.zeros((basis.n_basis, basis.n_basis))
    return _product_integral(basis, order)


def basis_integrals(basis: BSplineBasis) -> np.ndarray:
    nodes, weights = _quadrature(basis, basis.degree + 1)
    return weights @ basis.design(nodes)


class SingularFitError(np.linalg.LinAlgError):
    """Raised when the penalized normal equations are numerically singular."""


def _smoother(basis: BSplineBasis, freqs: np.ndarray, cfg: PenaltyConfig) -> tuple[np.ndarray, np.ndarray]:
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size < basis.n_basis:
        raise ValueError(f"grid has {freqs.size} points, fewer than the {basis.n_basis} basis functions")
    B = basis.design(freqs)
    A = B.T @ B
    if cfg.lam > 0:
        A = A + cfg.lam * penalty_matrix(basis, cfg.penalty_order)
    if np.linalg.cond(A) > 1e13:
        raise SingularFitError("penalized normal equations are singular; "
                               "increase the grid resolution or the smoothing parameter")
    return A, B


def penalized_fit(sd, basis: BSplineBasis, cfg: PenaltyConfig = PenaltyConfig()) -> FunctionalDatum:
    """Penalized least-squares B-spline fit to a gridded density."""
    A, B = _smoother(basis, sd.freqs, cfg)
    return FunctionalDatum(np.linalg.solve(A, B.T @ sd.values))


def fit_curves(freqs, values, basis: BSplineBasis, cfg: PenaltyConfig = PenaltyConfig()) -> np.ndarray:
    """Batch version of :func:`penalized_fit`; ``values`` is ``(n, grid)``.

    Returns the ``(n, n_basis)`` coefficient matrix.
    """
    A, B = _smoother(basis, freqs, cfg)
    return np.linalg.solve(A, B.T @ np.atleast_2d(values).T).T


def eval_function(fd, basis: BSplineBasis, points) -> np.ndarray:
    coeffs = fd.coeffs if isinstance(fd, FunctionalDatum) else np.asarray(fd, dtype=float)
    return basis.design(points) @ coeffs.T


def inner_product(c, d, W) -> float:
    return float(np.asarray(c) @ W @ np.asarray(d))
