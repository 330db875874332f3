"""How the variance-ratio bound keeps the mixture away from spurious fits.

Run with ``python3 demos/constraint_effect.py``.

With trimming on, we fit the same contaminated data under a tight bound
(d = 3), a loose one (d = 10) and effectively none (d = 1e10), and print the
cluster variances each fit ends with.  Without a bound the main variances
drift apart during the iterations and every start settles in a poorer local
optimum: the unbounded fit ends with a lower trimmed likelihood and a lower
classification rate than the bounded one, although the bounded solution is
admissible for it too.
"""

import numpy as np

from tsrfc import RFCConfig, ScenarioSpec, generate_scenario, posterior_assign, prepare, rfc_fit, score_partition


def main(seed: int = 41):
    series, truth = generate_scenario(ScenarioSpec(scheme="iii", seed=seed))
    data = prepare(series)
    for d in (3.0, 10.0, 1e10):
        cfg = RFCConfig(alpha=0.1, d1=d, d2=d, q=(2, 2), n_init=20, seed=seed)
        model, part = rfc_fit(data.coeffs, data.basis, cfg)
        post = posterior_assign(model, data.coeffs, data.gram)
        ccr = score_partition(part.labels, truth, posterior_labels=post.labels)["ccr"]
        a = np.concatenate([c.a for c in model.clusters])
        b = np.array([c.b for c in model.clusters])
        print(f"d={d:<8g} trimmed log-likelihood {model.loglik:10.2f}  CCR {ccr:.3f}")
        print(f"           main variances {np.array2string(a, precision=3)}  ratio {a.max() / a.min():.3g}")
        print(f"           residual variances {np.array2string(b, precision=4)}  ratio {b.max() / b.min():.3g}")


if __name__ == "__main__":
    main()
