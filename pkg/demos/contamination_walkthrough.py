"""Why trimming matters: one contaminated data set, three clusterings.

Run with ``python3 demos/contamination_walkthrough.py``.

Two groups of 50 AR(2) series peak at 0.21 and 0.22 cycles per sample.
Eleven more series belong to neither group: each peaks at a random frequency
between 0.20 and 0.25 and has a broader peak.  We estimate
their spectra, turn them into spline curves and cluster them three ways:
the plain mixture, the mixture that discards the 10% least plausible curves,
and the total-variation hierarchical baseline.
"""

import numpy as np

from tsrfc import RFCConfig, ScenarioSpec, generate_scenario, posterior_assign, prepare, rfc_fit, score_partition, tvd_cluster


def main(seed: int = 11):
    series, truth = generate_scenario(ScenarioSpec(scheme="i", seed=seed))
    contaminant = truth == 0
    print(f"{len(series)} series: {np.sum(truth == 1)} + {np.sum(truth == 2)} in the two groups, "
          f"{contaminant.sum()} contaminating")

    data = prepare(series)
    peaks = data.freqs[np.argmax(data.values, axis=1)]
    for label, name in ((1, "group 1"), (2, "group 2"), (0, "contaminating")):
        print(f"  median spectral peak, {name:13s}: {np.median(peaks[truth == label]):.3f}")

    print("\nmixture fits (main dimensions chosen by BIC, 20 random starts):")
    for alpha in (0.0, 0.1):
        cfg = RFCConfig(alpha=alpha, d1=3.0, d2=3.0, n_init=20, seed=seed)
        model, part = rfc_fit(data.coeffs, data.basis, cfg)
        post = posterior_assign(model, data.coeffs, data.gram)
        scores = score_partition(part.labels, truth, posterior_labels=post.labels)
        caught = int((part.trimmed & contaminant).sum())
        print(f"  alpha={alpha:<4} q={model.q}  CCR={scores['ccr']:.3f}  "
              f"trimmed {int(part.trimmed.sum())} curves, {caught} of them contaminating")

    part, _ = tvd_cluster(data.densities, "complete", 2)
    scores = score_partition(part.labels, truth)
    print(f"\nTVD hierarchical (complete linkage): CCR={scores['ccr']:.3f}")
    print("Without trimming, one cluster absorbs the broad contaminating spectra "
          "and the two real groups end up sharing the other.")


if __name__ == "__main__":
    main()
