"""External validity indices: correct classification rate, Rand and adjusted Rand."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .partition import Partition

_EXHAUSTIVE_MAX_K = 8


def _labels(p) -> np.ndarray:
    if isinstance(p, Partition):
        return p.labels
    arr = np.asarray(p)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a partition must be a non-empty 1-d label vector")
    return arr


def _check_pair(p1, p2) -> tuple[np.ndarray, np.ndarray]:
    a, b = _labels(p1), _labels(p2)
    if a.size != b.size:
        raise ValueError(f"partitions have different lengths ({a.size} vs {b.size})")
    return a, b


def contingency(p1, p2) -> np.ndarray:
    a, b = _check_pair(p1, p2)
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def ccr(pred, truth) -> float:
    """Correct classification rate under the best one-to-one label matching.

    When the label sets differ in size the smaller one is mapped injectively
    into the larger; items in unmatched clusters count as errors.
    """
    table = contingency(pred, truth)
    n = int(table.sum())
    if table.shape[0] > table.shape[1]:
        table = table.T
    r, c = table.shape
    if r <= _EXHAUSTIVE_MAX_K and c <= _EXHAUSTIVE_MAX_K:
        best = max(sum(table[i, cols[i]] for i in range(r))
                   for cols in itertools.permutations(range(c), r))
    else:
        rows, cols = linear_sum_assignment(table, maximize=True)
        best = int(table[rows, cols].sum())
    return best / n


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def _pair_counts(p1, p2) -> tuple[int, int, int, int]:
    table = contingency(p1, p2)
    n = int(table.sum())
    both = int(_comb2(table).sum())
    rows = int(_comb2(table.sum(axis=1)).sum())
    cols = int(_comb2(table.sum(axis=0)).sum())
    return n * (n - 1) // 2, both, rows, cols


def rand_index(p1, p2) -> float:
    total, both, rows, cols = _pair_counts(p1, p2)
    if total == 0:
        return 1.0
    agree = total + 2 * both - rows - cols
    return agree / total


def adjusted_rand_index(p1, p2) -> float:
    """Hubert-Arabie adjusted Rand index, computed in exact rational arithmetic.

    Returns 1.0 when the index is undefined (both partitions trivial).
    """
    total, both, rows, cols = _pair_counts(p1, p2)
    if total == 0:
        return 1.0
    expected = Fraction(rows * cols, total)
    maximum = Fraction(rows + cols, 2)
    if maximum == expected:
        return 1.0
    return float((both - expected) / (maximum - expected))


def _select(pred, truth, drop_truth_zero: bool, posterior_labels=None, trimmed_as_class=False):
    p, t = _check_pair(pred, truth)
    p = p.copy()
    if posterior_labels is not None and not trimmed_as_class:
        post = _labels(posterior_labels)
        mask = p == 0
        p[mask] = post[mask]
    keep = t != 0 if drop_truth_zero else np.ones(t.size, bool)
    return p[keep], t[keep]


def score_partition(pred, truth, *, posterior_labels=None, drop_truth_zero: bool = True,
                    trimmed_as_class: bool = False) -> dict:
    """CCR, RI and ARI of ``pred`` against ``truth``.

    Trimmed predictions (label 0) are replaced by ``posterior_labels`` unless
    ``trimmed_as_class`` is set, in which case 0 is scored as a class of its
    own.  With ``drop_truth_zero`` items whose true label is 0 (contamination)
    are left out.
    """
    p, t = _select(pred, truth, drop_truth_zero, posterior_labels, trimmed_as_class)
    return {
        "n": int(p.size),
        "ccr": ccr(p, t),
        "rand_index": rand_index(p, t),
        "ari": adjusted_rand_index(p, t),
    }
