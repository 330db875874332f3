"""Independent reference computations shared by the unit and acceptance tests.

Each oracle takes the slow, obviously-correct route: enumeration of pairs or
label permutations, or a dense grid search.
"""

import itertools
from fractions import Fraction

import numpy as np


def brute_ccr(pred, truth):
    """Best accuracy over all injective relabelings of the smaller label set."""
    pl, tl = sorted(set(pred)), sorted(set(truth))
    small, big = (pl, tl) if len(pl) <= len(tl) else (tl, pl)
    best = 0
    for image in itertools.permutations(big, len(small)):
        m = dict(zip(small, image))
        if small is pl:
            hits = sum(m[p] == t for p, t in zip(pred, truth))
        else:
            hits = sum(m[t] == p for p, t in zip(pred, truth))
        best = max(best, hits)
    return best / len(pred)


def brute_pairs(a, b):
    """Pair counts: total, agreements, together in both, together in a, together in b."""
    agree = same_both = same_a = same_b = 0
    pairs = list(itertools.combinations(range(len(a)), 2))
    for i, j in pairs:
        sa, sb = a[i] == a[j], b[i] == b[j]
        agree += sa == sb
        same_both += sa and sb
        same_a += sa
        same_b += sb
    return len(pairs), agree, same_both, same_a, same_b


def brute_rand(a, b):
    total, agree, *_ = brute_pairs(a, b)
    return agree / total


def brute_ari(a, b):
    """Adjusted Rand index in exact rational arithmetic, 1 when undefined."""
    total, _, both, sa, sb = brute_pairs(a, b)
    exp = Fraction(sa * sb, total)
    mx = Fraction(sa + sb, 2)
    if mx == exp:
        return 1.0
    return float((both - exp) / (mx - exp))


def grid_truncation_objective(raw, weights, d, n_grid=10_000):
    """Smallest ``sum w (log t + r / t)`` over ``t = clip(r, m, d m)`` for
    ``n_grid`` log-spaced thresholds ``m`` spanning every breakpoint."""
    raw = np.asarray(raw, dtype=float)
    weights = np.asarray(weights, dtype=float)
    ms = np.geomspace(raw.min() / d, raw.max(), n_grid)[:, None]
    t = np.clip(raw[None], ms, d * ms)
    return float((weights * (np.log(t) + raw / t)).sum(axis=1).min())


def random_partition_pair(rng, n_max=12, k_max=4):
    n = int(rng.integers(2, n_max + 1))
    a = rng.integers(1, int(rng.integers(1, k_max + 1)) + 1, n)
    b = rng.integers(1, int(rng.integers(1, k_max + 1)) + 1, n)
    return a, b
