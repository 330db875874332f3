"""Hierarchical comparison methods based on the total variation distance.

``tvd_cluster`` is agglomerative clustering on a fixed TVD dissimilarity
matrix (complete or average linkage).  ``hsm_cluster`` is the hierarchical
spectral merger: after each merge the new cluster gets a representative
spectrum, either the mean of its members' densities ("average") or the
estimate from the concatenation of its members' series ("single"), and the
distance matrix shrinks by one.

Merge ties go to the lexicographically smallest pair of active slots, where
a merged cluster keeps the smaller of its two slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import Partition, relabel_by_first_appearance
from .sim import TimeSeries
from .spectral import LagWindowConfig, SpectralDensity, density_matrix, estimate_spectrum, normalize

LINKAGES = ("complete", "average")
HSM_OPTIONS = ("average", "single")


def _check_normalized(*densities: SpectralDensity, atol: float = 1e-6):
    for d in densities:
        if not d.normalized and abs(d.area() - 1) > atol:
            raise ValueError("TVD needs unit-area densities; call normalize() first")


def tvd(f: SpectralDensity, g: SpectralDensity) -> float:
    """One minus the common area under two normalized densities.

    For unit-area inputs ``1 - int min(f, g) = 0.5 * int |f - g|`` under the
    same trapezoid weights; the second form is used because it is exactly
    zero for identical inputs and carries no rounding from the normalization.
    """
    if f.freqs.shape != g.freqs.shape or not np.array_equal(f.freqs, g.freqs):
        raise ValueError("densities are on different frequency grids")
    _check_normalized(f, g)
    return _tvd_values(f.values, g.values, f.freqs)


def _tvd_values(fv, gv, freqs) -> float | np.ndarray:
    return np.clip(0.5 * np.trapezoid(np.abs(fv - gv), freqs, axis=-1), 0.0, 1.0)


def tvd_matrix(densities) -> np.ndarray:
    _check_normalized(*densities)
    freqs, V = density_matrix(densities)
    n = V.shape[0]
    D = np.zeros((n, n))
    for i in range(n - 1):
        D[i, i + 1:] = _tvd_values(V[i], V[i + 1:], freqs)
    return D + D.T


@dataclass
class MergeTree:
    """Agglomeration history in scipy's linkage layout.

    Row ``s`` of ``merges`` holds ``(id_a, id_b, height, size)``; leaves are
    ids ``0..n-1`` and the cluster formed at step ``s`` gets id ``n + s``.
    """

    n: int
    merges: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))

    def cut(self, K: int) -> np.ndarray:
        """Flat labels 1..K after the first ``n - K`` merges."""
        if not 1 <= K <= self.n:
            raise ValueError(f"K must be in [1, {self.n}], got {K}")
        parent = list(range(self.n + len(self.merges)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for s in range(self.n - K):
            a, b = int(self.merges[s, 0]), int(self.merges[s, 1])
            parent[find(a)] = self.n + s
            parent[find(b)] = self.n + s
        roots = [find(i) for i in range(self.n)]
        return relabel_by_first_appearance(roots)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "merges": [{"a": int(a), "b": int(b), "height": float(h), "size": int(s)}
                       for a, b, h, s in self.merges],
        }


def _argmin_pair(D: np.ndarray, active: np.ndarray) -> tuple[int, int]:
    idx = np.flatnonzero(active)
    sub = D[np.ix_(idx, idx)]
    iu = np.triu_indices(idx.size, k=1)
    k = int(np.argmin(sub[iu]))  # first minimum in row-major order
    return int(idx[iu[0][k]]), int(idx[iu[1][k]])


def agglomerate(D: np.ndarray, linkage: str = "complete") -> MergeTree:
    """Full agglomeration on a fixed dissimilarity matrix (Lance-Williams updates)."""
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    D = np.array(D, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n) or not np.allclose(D, D.T):
        raise ValueError("dissimilarity matrix must be square and symmetric")
    np.fill_diagonal(D, np.inf)
    active = np.ones(n, bool)
    size = np.ones(n, dtype=int)
    ids = np.arange(n)
    merges = np.zeros((n - 1, 4))
    for s in range(n - 1):
        i, j = _argmin_pair(D, active)
        h = D[i, j]
        if linkage == "complete":
            new = np.maximum(D[i], D[j])
        else:
            new = (size[i] * D[i] + size[j] * D[j]) / (size[i] + size[j])
        merges[s] = (min(ids[i], ids[j]), max(ids[i], ids[j]), h, size[i] + size[j])
        D[i, :] = new
        D[:, i] = new
        D[i, i] = np.inf
        active[j] = False
        D[j, :] = np.inf
        D[:, j] = np.inf
        size[i] += size[j]
        ids[i] = n + s
    return MergeTree(n, merges)


def hierarchical_cluster(D: np.ndarray, linkage: str = "complete", K: int = 2) -> Partition:
    n = np.asarray(D).shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K must be in [1, {n}], got {K}")
    return Partition(agglomerate(D, linkage).cut(K))


def tvd_cluster(densities, linkage: str = "complete", K: int = 2) -> tuple[Partition, MergeTree]:
    """TVDClust: agglomerative clustering of normalized densities on the TVD matrix."""
    tree = agglomerate(tvd_matrix(densities), linkage)
    return Partition(tree.cut(K)), tree


def hsm_cluster(series, option: str = "average", K: int = 2,
                cfg: LagWindowConfig = LagWindowConfig(),
                densities=None) -> tuple[Partition, MergeTree]:
    """Hierarchical spectral merger, stopped when ``K`` clusters remain.

    ``densities`` may be passed to reuse already-estimated normalized
    spectra of ``series``.  With ``option="single"`` the representative of a
    merged cluster is re-estimated from its members' series concatenated in
    index order, using the same lag-window configuration.
    """
    if option not in HSM_OPTIONS:
        raise ValueError(f"option must be one of {HSM_OPTIONS}, got {option!r}")
    series = list(series)
    n = len(series)
    if not 1 <= K <= n:
        raise ValueError(f"K must be in [1, {n}], got {K}")
    if densities is None:
        densities = [normalize(estimate_spectrum(ts, cfg)) for ts in series]
    freqs, reps = density_matrix(densities)
    reps = reps.copy()

    D = tvd_matrix(densities)
    np.fill_diagonal(D, np.inf)
    active = np.ones(n, bool)
    members: list[list[int]] = [[i] for i in range(n)]
    ids = np.arange(n)
    merges = []
    for s in range(n - K):
        i, j = _argmin_pair(D, active)
        merges.append((min(ids[i], ids[j]), max(ids[i], ids[j]), D[i, j],
                       len(members[i]) + len(members[j])))
        members[i] = sorted(members[i] + members[j])
        members[j] = []
        active[j] = False
        D[j, :] = np.inf
        D[:, j] = np.inf
        ids[i] = n + s
        if option == "average":
            reps[i] = densities_mean(densities, members[i])
        else:
            ws = series[members[i][0]].ws
            joined = TimeSeries(np.concatenate([series[k].values for k in members[i]]), ws=ws)
            reps[i] = normalize(estimate_spectrum(joined, _fixed_lag(cfg, len(series[members[i][0]])))).values
        others = np.flatnonzero(active)
        others = others[others != i]
        d = _tvd_values(reps[i], reps[others], freqs)
        D[i, others] = d
        D[others, i] = d

    labels = np.zeros(n, dtype=int)
    for slot in np.flatnonzero(active):
        labels[members[slot]] = slot + 1
    tree = MergeTree(n, np.asarray(merges, dtype=float).reshape(-1, 4))
    return Partition(relabel_by_first_appearance(labels)), tree


def densities_mean(densities, idx) -> np.ndarray:
    """Pointwise arithmetic mean of the member density vectors."""
    return np.mean([densities[k].values for k in idx], axis=0)


def _fixed_lag(cfg: LagWindowConfig, T_single: int) -> LagWindowConfig:
    # keep the truncation lag of the original series after concatenation
    return LagWindowConfig(max_lag=cfg.lag_for(T_single), grid_size=cfg.grid_size)
