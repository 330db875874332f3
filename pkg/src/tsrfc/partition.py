from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Partition:
    """Hard cluster labels for n items.

    Labels are 1..K; 0 marks a trimmed item.  ``posteriors`` (n x K) is only
    filled in by model-based methods.
    """

    labels: np.ndarray
    trimmed: np.ndarray | None = None
    posteriors: np.ndarray | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-d")
        object.__setattr__(self, "labels", labels)
        trimmed = np.zeros(labels.size, bool) if self.trimmed is None else np.asarray(self.trimmed, bool)
        object.__setattr__(self, "trimmed", trimmed)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def n_clusters(self) -> int:
        return int(np.unique(self.labels[self.labels > 0]).size)

    def to_dict(self) -> dict:
        out = {
            "labels": self.labels.tolist(),
            "trimmed": np.flatnonzero(self.trimmed).tolist(),
        }
        if self.posteriors is not None:
            out["posteriors"] = np.asarray(self.posteriors).tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        labels = np.asarray(d["labels"], dtype=int)
        trimmed = np.zeros(labels.size, bool)
        trimmed[np.asarray(d.get("trimmed", []), dtype=int)] = True
        post = d.get("posteriors")
        return cls(labels, trimmed, None if post is None else np.asarray(post, dtype=float))


def relabel_by_first_appearance(labels) -> np.ndarray:
    """Map arbitrary cluster ids to 1..K in order of first occurrence."""
    labels = np.asarray(labels)
    out = np.empty(labels.size, dtype=int)
    mapping: dict = {}
    for i, lab in enumerate(labels.tolist()):
        if lab not in mapping:
            mapping[lab] = len(mapping) + 1
        out[i] = mapping[lab]
    return out
