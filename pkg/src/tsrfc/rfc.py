"""Robust functional clustering: trimmed, variance-constrained mixture of
principal-component score models.

Curves are B-spline coefficient vectors ``x``.  With ``W`` the Gram matrix of
the basis, inner products are ``x @ W @ y``.  The fit works internally in the
whitened coordinates ``z = W^{1/2} x`` where that inner product is Euclidean,
so per-cluster principal directions are ordinary eigenvectors of the
weighted covariance of ``z``.  Directions reported in :class:`ClusterParams`
are mapped back to coefficient space (``W``-orthonormal).

Each cluster's score density is Gaussian with variances
``a_1g >= ... >= a_qg`` on its first ``q_g`` scores and a common ``b_g`` on
scores ``q_g+1..p``.  Across clusters ``max a / min a <= d1`` and
``max b / min b <= d2``.

Iteration (one initialization)::

    T-step  keep the ceil(n(1-alpha)) curves with the largest mixture density
    E-step  responsibilities of the kept curves
    M-step  weights, means, eigendecompositions, optimally truncated variances

With ``p`` smaller than the basis dimension the score density only sees a
p-dimensional projection, and the leading-eigenvector update does not
maximize it: the trimmed objective can drop between iterations.  The default
keeps the plain eigenvector update, which is what finds the groups.  With
``monotone_guard=True`` a candidate that lowers the objective is replaced by
a generalized EM step along the previous directions (weights, means and
variances only), so the objective never decreases; in practice that run
tends to lock onto directions picked by the random start.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .fda import BSplineBasis, FunctionalDatum, gram_matrix
from .partition import Partition

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2 * math.pi)
_EXHAUSTIVE_BUDGET = 16


def _logsumexp(a: np.ndarray, axis: int = -1, keepdims: bool = False) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return out if keepdims else np.squeeze(out, axis=axis)


class RFCFitError(RuntimeError):
    """No initialization produced a usable fit."""


@dataclass(frozen=True)
class RFCConfig:
    """Settings of one robust functional clustering fit.

    Parameters
    ----------
    K : int
        Number of clusters.
    alpha : float
        Trimming proportion in [0, 0.5); ``floor(n * alpha)`` curves are trimmed.
    d1, d2 : float
        Bounds (>= 1) on the across-cluster ratio of main and residual variances.
    p : int or None
        Number of principal-component scores per cluster (default 6);
        ``None`` uses every dimension of the basis.
    q : tuple of int or None
        Main dimensions per cluster.  ``None`` selects them by BIC over
        ``1..q_max``.
    q_max : int
        Upper bound for the BIC search.
    n_init, max_iter, tol : int, int, float
        Random starts, EM iterations per start, relative convergence threshold.
    seed : int
    var_floor : float
        Lower bound applied to raw variances before truncation.
    min_cluster_weight : float
        A cluster whose summed responsibility drops below this is empty and
        the initialization is redrawn.
    max_redraws : int
        Redraws allowed per initialization after empty clusters.
    monotone_guard : bool
        Reject eigenvector updates that lower the trimmed objective (see the
        module docstring).
    """

    K: int = 2
    alpha: float = 0.0
    d1: float = 3.0
    d2: float = 3.0
    p: int | None = 6
    q: tuple[int, ...] | None = None
    q_max: int = 3
    n_init: int = 100
    max_iter: int = 20
    tol: float = 1e-10
    seed: int = 0
    var_floor: float = 1e-12
    min_cluster_weight: float = 1.0
    max_redraws: int = 10
    monotone_guard: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if not 0 <= self.alpha < 0.5:
            raise ValueError("alpha must lie in [0, 0.5)")
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("constraint constants d1, d2 must be >= 1")
        if self.n_init < 1 or self.max_iter < 1:
            raise ValueError("n_init and max_iter must be positive")
        if self.q_max < 1:
            raise ValueError("q_max must be positive")
        if self.q is not None:
            q = tuple(int(v) for v in self.q)
            if len(q) != self.K:
                raise ValueError(f"q needs one entry per cluster ({self.K}), got {len(q)}")
            if min(q) < 1:
                raise ValueError("every q_g must be >= 1")
            object.__setattr__(self, "q", q)

    def resolve_p(self, n_basis: int) -> int:
        p = n_basis if self.p is None else self.p
        if not 2 <= p <= n_basis:
            raise ValueError(f"p must lie in [2, {n_basis}], got {p}")
        return p

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["q"] = None if self.q is None else list(self.q)
        return d


@dataclass(frozen=True)
class ClusterParams:
    pi: float
    mean_coeffs: np.ndarray
    directions: np.ndarray  # (n_basis, p), W-orthonormal columns
    a: np.ndarray
    b: float
    q: int

    @property
    def variances(self) -> np.ndarray:
        p = self.directions.shape[1]
        return np.concatenate([self.a, np.full(p - self.q, self.b)])

    def to_dict(self) -> dict:
        return {
            "pi": float(self.pi),
            "mean_coeffs": self.mean_coeffs.tolist(),
            "directions": self.directions.tolist(),
            "a": self.a.tolist(),
            "b": float(self.b),
            "q": int(self.q),
        }


@dataclass(frozen=True)
class RFCModel:
    clusters: tuple[ClusterParams, ...]
    loglik: float
    bic: float
    n_params: int
    config: RFCConfig
    history: tuple[float, ...] = ()

    @property
    def K(self) -> int:
        return len(self.clusters)

    @property
    def q(self) -> tuple[int, ...]:
        return tuple(c.q for c in self.clusters)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "clusters": [c.to_dict() for c in self.clusters],
            "loglik": float(self.loglik),
            "bic": float(self.bic),
            "n_params": int(self.n_params),
            "history": [float(v) for v in self.history],
        }


# --------------------------------------------------------------------------
# score model


def score_curve(x, g: ClusterParams, W: np.ndarray) -> np.ndarray:
    """Principal-component scores ``<x - mean_g, psi_jg>`` for j = 1..p."""
    x = _coeffs(x)
    return (x - g.mean_coeffs) @ W @ g.directions


def log_score_density(scores: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Sum of independent centred normal log densities over the last axis."""
    variances = np.asarray(variances, dtype=float)
    if np.any(variances <= 0):
        raise ValueError("variances must be positive")
    scores = np.asarray(scores, dtype=float)
    return -0.5 * (np.sum(np.log(variances)) + variances.size * _LOG_2PI) \
        - 0.5 * np.sum(scores**2 / variances, axis=-1)


def curve_density(x, g: ClusterParams, W: np.ndarray) -> float:
    """Log of the cluster-``g`` score density of curve ``x``."""
    return float(log_score_density(score_curve(x, g, W), g.variances))


# --------------------------------------------------------------------------
# optimal truncation


def truncation_objective(raw, truncated, weights) -> float:
    """``sum w * (log t + r / t)``, the profiled negative log-likelihood of the
    raw variances ``r`` replaced by ``t``."""
    raw, truncated, weights = (np.asarray(v, dtype=float) for v in (raw, truncated, weights))
    return float(np.sum(weights * (np.log(truncated) + raw / truncated)))


def truncate_variances(raw, weights, d: float) -> np.ndarray:
    """Optimal truncation of a block of variances to a max/min ratio <= d.

    Returns ``clip(raw, m, d*m)`` with the threshold ``m`` minimizing
    :func:`truncation_objective`.  On every interval between consecutive
    breakpoints ``{r, r/d}`` the objective is ``A log m + B / m + const``,
    minimized at ``m = B / A``; the global minimizer is the best of these
    interval optima and the breakpoints themselves.
    """
    raw = np.asarray(raw, dtype=float)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), raw.shape)
    if raw.size == 0:
        return raw.copy()
    if d < 1:
        raise ValueError("ratio bound d must be >= 1")
    if np.any(raw < 0):
        raise ValueError("variances must be nonnegative")
    if not np.any(raw > 0):
        raise ValueError("cannot truncate an all-zero variance block")
    return _truncate_rows(raw[None], weights[None], d)[0]


def _truncate_rows(raw: np.ndarray, weights: np.ndarray, d: float) -> np.ndarray:
    """Row-wise :func:`truncate_variances` for ``(R, L)`` arrays (no validation)."""
    out = raw.copy()
    todo = raw.max(axis=1) > d * raw.min(axis=1)
    if not todo.any():
        return out
    r, w = raw[todo], weights[todo]
    breaks = np.sort(np.concatenate([r, r / d], axis=1), axis=1)
    # zero variances give zero breakpoints; the threshold must stay positive
    smallest = np.where(breaks > 0, breaks, np.inf).min(axis=1, keepdims=True)
    breaks = np.where(breaks > 0, breaks, smallest)
    edges = np.concatenate([breaks[:, :1] / 2, breaks, breaks[:, -1:] * 2], axis=1)
    lo, hi = edges[:, :-1], edges[:, 1:]
    mid = 0.5 * (lo + hi)[:, :, None]
    rr, ww = r[:, None, :], w[:, None, :]
    low = rr < mid
    high = rr > d * mid
    wsum = (ww * (low | high)).sum(axis=2)
    num = (ww * rr * (low + high / d)).sum(axis=2)
    interior = np.clip(num / np.where(wsum > 0, wsum, 1.0), lo, hi)
    interior = np.where(wsum > 0, interior, lo)
    cand = np.concatenate([breaks, interior], axis=1)[:, :, None]
    T = np.clip(rr, cand, d * cand)
    objs = (ww * (np.log(T) + rr / T)).sum(axis=2)
    m = cand[np.arange(cand.shape[0]), np.argmin(objs, axis=1)]
    out[todo] = np.clip(r, m, d * m)
    return out


def enforce_constraints(raw_a: Sequence, raw_b, weights, d1: float, d2: float,
                        b_weights=None) -> tuple[list[np.ndarray], np.ndarray]:
    """Constrain main variances (ratio <= d1) and residual variances (ratio <= d2).

    Parameters
    ----------
    raw_a : sequence of arrays
        Main variances of each cluster.
    raw_b : array
        Residual variance of each cluster.
    weights : array
        Cluster sizes ``n_g``; every main variance of cluster g gets weight ``n_g``.
    b_weights : array, optional
        Weights for the residual block, defaulting to ``weights``.  The EM fit
        passes ``n_g * (p - q_g)`` since ``b_g`` is shared by that many scores.
    """
    weights = np.asarray(weights, dtype=float)
    raw_b = np.asarray(raw_b, dtype=float)
    sizes = [len(a) for a in raw_a]
    flat_a = np.concatenate([np.asarray(a, dtype=float) for a in raw_a]) if raw_a else np.empty(0)
    flat_w = np.repeat(weights, sizes)
    new_a = truncate_variances(flat_a, flat_w, d1)
    new_b = truncate_variances(raw_b, weights if b_weights is None else b_weights, d2)
    split = np.split(new_a, np.cumsum(sizes)[:-1])
    return split, new_b


# --------------------------------------------------------------------------
# fitting


def _coeffs(x) -> np.ndarray:
    return x.coeffs if isinstance(x, FunctionalDatum) else np.asarray(x, dtype=float)


def coefficient_matrix(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        X = np.asarray(data, dtype=float)
    else:
        X = np.vstack([_coeffs(x) for x in data])
    if X.ndim != 2:
        raise ValueError("data must be a list of curves or an (n, n_basis) matrix")
    return X


@dataclass
class _State:
    """Parameters of a batch of starts, in whitened coordinates."""

    pi: np.ndarray          # (I, K)
    means: np.ndarray       # (I, K, nb)
    dirs: np.ndarray        # (I, K, nb, p)
    var: np.ndarray         # (I, K, p)

    def take(self, i: int) -> "_State":
        return _State(self.pi[i:i + 1], self.means[i:i + 1], self.dirs[i:i + 1], self.var[i:i + 1])

    def where(self, mask: np.ndarray, other: "_State") -> "_State":
        """Rows of ``self`` where ``mask`` holds, of ``other`` elsewhere."""
        def pick(x, y):
            return np.where(mask.reshape((-1,) + (1,) * (x.ndim - 1)), x, y)
        return _State(pick(self.pi, other.pi), pick(self.means, other.means),
                      pick(self.dirs, other.dirs), pick(self.var, other.var))


class _Problem:
    """One data set and one choice of main dimensions ``q``.

    All methods work on a batch of ``I`` random starts at once; arrays carry
    the start index on their first axis.
    """

    def __init__(self, X: np.ndarray, W: np.ndarray, cfg: RFCConfig, q: tuple[int, ...]):
        self.X = X
        self.n, self.nb = X.shape
        evals, evecs = np.linalg.eigh(0.5 * (W + W.T))
        if evals.min() <= 0:
            raise ValueError("Gram matrix is not positive definite")
        self.W = W
        self.W_half = (evecs * np.sqrt(evals)) @ evecs.T
        self.W_half_inv = (evecs / np.sqrt(evals)) @ evecs.T
        self.Z = X @ self.W_half
        self.cfg = cfg
        self.K = cfg.K
        self.p = cfg.resolve_p(self.nb)
        self.q = np.asarray(q, dtype=int)
        if np.any(self.q >= self.p):
            raise ValueError(f"every q_g must be < p = {self.p}")
        self.n_trim = int(math.floor(self.n * cfg.alpha))
        self.h = self.n - self.n_trim
        if self.h < self.K * 2:
            raise ValueError("too few untrimmed curves for the number of clusters")

    # -- likelihood pieces

    def log_dens(self, st: _State) -> np.ndarray:
        """(I, n, K) array of log pi_g + log f_g(x_i)."""
        D = self.Z[None, None] - st.means[:, :, None, :]
        s = D @ st.dirs
        quad = (s**2 / st.var[:, :, None, :]).sum(axis=3)
        const = np.log(st.pi) - 0.5 * (np.log(st.var).sum(axis=2) + self.p * _LOG_2PI)
        return (const[:, :, None] - 0.5 * quad).transpose(0, 2, 1)

    def trim(self, ld: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Retained-curve masks, mixture log densities and trimmed objectives."""
        mix = _logsumexp(ld, axis=2)
        order = np.argsort(-mix, axis=1, kind="stable")
        keep = np.zeros(mix.shape, bool)
        np.put_along_axis(keep, order[:, : self.h], True, axis=1)
        return keep, mix, np.where(keep, mix, 0.0).sum(axis=1)

    def responsibilities(self, ld: np.ndarray, keep: np.ndarray) -> np.ndarray:
        post = np.exp(ld - _logsumexp(ld, axis=2, keepdims=True))
        return np.where(keep[:, :, None], post, 0.0)

    def q_value(self, st: _State, tau: np.ndarray) -> np.ndarray:
        return (tau * self.log_dens(st)).sum(axis=(1, 2))

    # -- M-step pieces

    def _constrain(self, eig: np.ndarray, ng: np.ndarray) -> np.ndarray:
        """Split leading eigenvalues into main and residual variances and
        truncate both blocks across clusters."""
        eig = np.maximum(eig, self.cfg.var_floor)
        q, p = self.q, self.p
        raw_a = np.concatenate([eig[:, g, : q[g]] for g in range(self.K)], axis=1)
        w_a = np.repeat(ng, q, axis=1)
        raw_b = np.stack([eig[:, g, q[g]:p].mean(axis=1) for g in range(self.K)], axis=1)
        a = _truncate_rows(raw_a, w_a, self.cfg.d1)
        b = _truncate_rows(raw_b, ng * (p - q), self.cfg.d2)
        var = np.repeat(b[:, :, None], p, axis=2)
        start = 0
        for g in range(self.K):
            var[:, g, : q[g]] = a[:, start:start + q[g]]
            start += q[g]
        return var

    def _moments(self, tau: np.ndarray):
        ng = tau.sum(axis=1)                                   # (I, K)
        empty = (ng < self.cfg.min_cluster_weight).any(axis=1)
        safe = np.where(ng > 0, ng, 1.0)
        means = (tau.transpose(0, 2, 1) @ self.Z) / safe[:, :, None]
        D = self.Z[None, None] - means[:, :, None, :]          # (I, K, n, nb)
        weighted = D * tau.transpose(0, 2, 1)[:, :, :, None]
        covs = weighted.transpose(0, 1, 3, 2) @ D / safe[:, :, None, None]
        return ng, safe, means, covs, empty

    def pca_step(self, tau: np.ndarray) -> tuple[_State, np.ndarray]:
        """Weights, means, leading eigenvectors and truncated eigenvalues.

        Also returns the starts in which some cluster came out empty.
        """
        ng, safe, means, covs, empty = self._moments(tau)
        evals, evecs = np.linalg.eigh(0.5 * (covs + covs.transpose(0, 1, 3, 2)))
        # eigh sorts ascending; keep the p largest, largest first
        evals = evals[..., ::-1][..., : self.p]
        dirs = evecs[..., ::-1][..., : self.p]
        pi = safe / safe.sum(axis=1, keepdims=True)
        return _State(pi, means, dirs, self._constrain(evals, safe)), empty

    def fixed_direction_step(self, tau: np.ndarray, old: _State, ld_old: np.ndarray) -> _State:
        """Update weights, means and variances along the current directions.

        Each piece maximizes the expected complete-data objective given the
        directions; a start whose value would still drop keeps ``old``.
        """
        ng, safe, means, covs, _ = self._moments(tau)
        rq = ((covs @ old.dirs) * old.dirs).sum(axis=2)
        pi = safe / safe.sum(axis=1, keepdims=True)
        new = _State(pi, means, old.dirs, self._constrain(rq, safe))
        better = self.q_value(new, tau) >= (tau * ld_old).sum(axis=(1, 2))
        return new.where(better, old)

    # -- driver

    def initial_state(self, rngs: Sequence[np.random.Generator]) -> tuple[_State, np.ndarray]:
        size = max(2, min(self.p + 2, self.n // self.K))
        tau = np.zeros((len(rngs), self.n, self.K))
        for i, rng in enumerate(rngs):
            perm = rng.permutation(self.n)
            for g in range(self.K):
                tau[i, perm[g * size:(g + 1) * size], g] = 1.0
        return self.pca_step(tau)

    def run(self, st: _State, trace: list | None = None):
        """EM iterations for a batch of starts.

        Returns the final states, an ``(I, max_iter + 1)`` array of trimmed
        objectives (NaN after a start stops), the number of completed
        iterations per start, and the starts abandoned because a cluster
        emptied.  Visited states are appended to ``trace`` when given.
        """
        I = st.pi.shape[0]
        ld = self.log_dens(st)
        keep, _, obj = self.trim(ld)
        hist = np.full((I, self.cfg.max_iter + 1), np.nan)
        hist[:, 0] = obj
        n_iter = np.zeros(I, dtype=int)
        active = np.ones(I, bool)
        dead = np.zeros(I, bool)
        rows = np.arange(I)
        for _ in range(self.cfg.max_iter):
            if not active.any():
                break
            tau = self.responsibilities(ld, keep)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                cand, empty = self.pca_step(tau)
                ld_c = self.log_dens(cand)
                keep_c, _, obj_c = self.trim(ld_c)
                if self.cfg.monotone_guard:
                    drop = obj_c < obj
                    if drop.any():
                        alt = self.fixed_direction_step(tau, st, ld)
                        cand = alt.where(drop, cand)
                        ld_c = self.log_dens(cand)
                        keep_c, _, obj_c = self.trim(ld_c)
            dead |= active & empty
            upd = active & ~empty
            converged = np.abs(obj_c - obj) <= self.cfg.tol * np.abs(obj)
            st = cand.where(upd, st)
            ld = np.where(upd[:, None, None], ld_c, ld)
            keep = np.where(upd[:, None], keep_c, keep)
            obj = np.where(upd, obj_c, obj)
            n_iter += upd
            hist[rows[upd], n_iter[upd]] = obj[upd]
            if trace is not None:
                trace.append(st)
            active = upd & ~converged
        return st, hist, n_iter, dead

    def fit(self) -> tuple[_State, list[float], int]:
        """Best of ``n_init`` starts; a start that empties a cluster is
        redrawn with the next attempt key, up to ``max_redraws`` times."""
        attempts = {i: 0 for i in range(self.cfg.n_init)}
        pending = list(attempts)
        done: dict[int, tuple[_State, list[float]]] = {}
        while pending:
            rngs = [np.random.default_rng(np.random.SeedSequence(self.cfg.seed, spawn_key=(i, attempts[i])))
                    for i in pending]
            st0, empty0 = self.initial_state(rngs)
            st, hist, n_iter, dead = self.run(st0)
            retry = []
            for j, i in enumerate(pending):
                h = hist[j, : n_iter[j] + 1]
                if empty0[j] or dead[j] or not np.isfinite(h[-1]):
                    attempts[i] += 1
                    if attempts[i] <= self.cfg.max_redraws:
                        retry.append(i)
                    continue
                done[i] = (st.take(j), h.tolist())
            pending = retry
        if not done:
            raise RFCFitError("all initializations failed (empty clusters)")
        best = None
        for i in sorted(done):
            # strict '>' keeps the lowest start index on ties
            if best is None or done[i][1][-1] > best[1][-1]:
                best = (*done[i], i)
        return best

    def n_params(self) -> int:
        K, p, nb = self.K, self.p, self.nb
        dirs = sum(p * q - q * (q + 1) // 2 for q in self.q)
        return (K - 1) + K * nb + int(dirs) + int(self.q.sum()) + K

    def to_model(self, st: _State, history: list[float]) -> RFCModel:
        clusters = []
        for g in range(self.K):
            q = int(self.q[g])
            clusters.append(ClusterParams(
                pi=float(st.pi[0, g]),
                mean_coeffs=st.means[0, g] @ self.W_half_inv,
                directions=self.W_half_inv @ st.dirs[0, g],
                a=st.var[0, g, :q].copy(),
                b=float(st.var[0, g, q]),
                q=q,
            ))
        loglik = history[-1]
        k = self.n_params()
        bic = 2 * loglik - k * math.log(self.h)
        cfg = replace(self.cfg, q=tuple(int(v) for v in self.q))
        return RFCModel(tuple(clusters), loglik, bic, k, cfg, tuple(history))

    def partition(self, st: _State) -> Partition:
        ld = self.log_dens(st)
        keep, _, _ = self.trim(ld)
        ld, keep = ld[0], keep[0]
        post = np.exp(ld - _logsumexp(ld, axis=1, keepdims=True))
        labels = np.argmax(ld, axis=1) + 1
        labels[~keep] = 0
        return Partition(labels, ~keep, post)


def _fit_fixed_q(X, W, cfg: RFCConfig, q) -> tuple[RFCModel, Partition]:
    prob = _Problem(X, W, cfg, tuple(q))
    st, hist, _ = prob.fit()
    return prob.to_model(st, hist), prob.partition(st)


def em_path(data, W: np.ndarray, cfg: RFCConfig, start: int = 0) -> tuple[list[float], list[np.ndarray]]:
    """Trace one random start with fixed ``cfg.q``.

    Returns the trimmed objective before the first and after every
    iteration, and the ``(K, p)`` variance matrix after every M-step.
    """
    if cfg.q is None:
        raise ValueError("em_path needs fixed main dimensions cfg.q")
    prob = _Problem(coefficient_matrix(data), np.asarray(W, dtype=float), cfg, cfg.q)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(start, 0)))
    trace: list[_State] = []
    st0, empty = prob.initial_state([rng])
    _, hist, n_iter, dead = prob.run(st0, trace)
    if empty[0] or dead[0]:
        raise RFCFitError(f"start {start} produced an empty cluster")
    return hist[0, : n_iter[0] + 1].tolist(), [st.var[0].copy() for st in trace]


def _resolve_gram(basis, W):
    if W is not None:
        return np.asarray(W, dtype=float)
    if basis is None:
        raise ValueError("need either a basis or its Gram matrix")
    return gram_matrix(basis)


def rfc_fit(data, basis: BSplineBasis | None = None, cfg: RFCConfig = RFCConfig(),
            W: np.ndarray | None = None) -> tuple[RFCModel, Partition]:
    """Fit the trimmed constrained mixture; best of ``cfg.n_init`` random starts.

    ``data`` is a list of :class:`FunctionalDatum` or an ``(n, n_basis)``
    coefficient matrix.  When ``cfg.q`` is ``None`` the main dimensions are
    chosen by :func:`select_dims`.

    The returned partition labels trimmed curves 0; ``posteriors`` holds the
    posterior probabilities of every curve.
    """
    X = coefficient_matrix(data)
    W = _resolve_gram(basis, W)
    if cfg.q is None:
        _, model, part = select_dims(X, basis, cfg, W=W)
        return model, part
    return _fit_fixed_q(X, W, cfg, cfg.q)


def _q_candidates(K: int, q_max: int):
    return itertools.product(range(1, q_max + 1), repeat=K)


def select_dims(data, basis: BSplineBasis | None = None, cfg: RFCConfig = RFCConfig(),
                W: np.ndarray | None = None) -> tuple[tuple[int, ...], RFCModel, Partition]:
    """Choose per-cluster main dimensions by BIC.

    Searches every assignment in ``{1..q_max}^K`` when ``K * q_max <= 16``;
    otherwise does a greedy ascent, raising one cluster's q at a time while
    BIC improves.
    """
    X = coefficient_matrix(data)
    W = _resolve_gram(basis, W)
    p = cfg.resolve_p(X.shape[1])
    q_max = min(cfg.q_max, p - 1)
    fits: dict[tuple[int, ...], tuple[RFCModel, Partition]] = {}

    def fit(q):
        if q not in fits:
            fits[q] = _fit_fixed_q(X, W, replace(cfg, q=None), q)
            logger.debug("q=%s bic=%.3f", q, fits[q][0].bic)
        return fits[q]

    if cfg.K * q_max <= _EXHAUSTIVE_BUDGET:
        for q in _q_candidates(cfg.K, q_max):
            fit(q)
    else:
        q = (1,) * cfg.K
        best_bic = fit(q)[0].bic
        improved = True
        while improved:
            improved = False
            for g in range(cfg.K):
                if q[g] >= q_max:
                    continue
                trial = q[:g] + (q[g] + 1,) + q[g + 1:]
                if fit(trial)[0].bic > best_bic:
                    q, best_bic, improved = trial, fit(trial)[0].bic, True
    # max BIC, ties to the first candidate in search order
    best_q = max(fits, key=lambda k: (fits[k][0].bic, -list(fits).index(k)))
    model, part = fits[best_q]
    return best_q, model, part


def posterior_assign(model: RFCModel, data, W: np.ndarray) -> Partition:
    """Assign every curve, trimmed or not, to its maximum-posterior cluster.

    Ties go to the smallest cluster index.
    """
    X = coefficient_matrix(data)
    ld = np.column_stack([
        math.log(c.pi) + log_score_density((X - c.mean_coeffs) @ W @ c.directions, c.variances)
        for c in model.clusters
    ])
    post = np.exp(ld - _logsumexp(ld, axis=1, keepdims=True))
    return Partition(np.argmax(ld, axis=1) + 1, np.zeros(X.shape[0], bool), post)


def trimmed_objective(model: RFCModel, data, W: np.ndarray) -> tuple[float, np.ndarray]:
    """Trimmed mixture log-likelihood of ``data`` under ``model`` and the
    retained-curve mask it implies."""
    X = coefficient_matrix(data)
    n = X.shape[0]
    h = n - int(math.floor(n * model.config.alpha))
    ld = np.column_stack([
        math.log(c.pi) + log_score_density((X - c.mean_coeffs) @ W @ c.directions, c.variances)
        for c in model.clusters
    ])
    mix = _logsumexp(ld, axis=1)
    keep = np.zeros(n, bool)
    keep[np.argsort(-mix, kind="stable")[:h]] = True
    return float(mix[keep].sum()), keep
