"""Chi-square histogram distance and nearest-neighbor classification."""

from dataclasses import dataclass

import numpy as np


@dataclass
class ReferenceSet:
    """Training histograms stacked row-wise with their class labels."""

    histograms: np.ndarray  # (n, d)
    labels: np.ndarray      # (n,)

    def __post_init__(self):
        self.histograms = np.asarray(self.histograms, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.histograms.ndim != 2 or len(self.histograms) == 0:
            raise ValueError("reference set must hold at least one histogram")
        if len(self.labels) != len(self.histograms):
            raise ValueError("label count does not match histogram count")

    @property
    def dims(self):
        return self.histograms.shape[1]


def chi2(h, k):
    """Chi-square distance sum (h_i - k_i)^2 / (h_i + k_i); 0/0 bins
    contribute zero."""
    h = np.asarray(h, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if h.shape != k.shape:
        raise ValueError(f"histogram length mismatch: {h.shape} vs {k.shape}")
    denom = h + k
    num = (h - k) ** 2
    return float(np.sum(np.divide(num, denom, out=np.zeros_like(num),
                                  where=denom != 0)))


def chi2_all(query, refs):
    """Chi-square distances from one query to every reference row."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape[0] != refs.dims:
        raise ValueError(f"query length {q.shape[0]} != reference dims {refs.dims}")
    denom = refs.histograms + q
    num = (refs.histograms - q) ** 2
    return np.divide(num, denom, out=np.zeros_like(num),
                     where=denom != 0).sum(axis=1)


def nn_classify(query, refs):
    """(predicted label, distance) of the nearest reference; ties go to the
    lowest reference index."""
    dists = chi2_all(query, refs)
    idx = int(np.argmin(dists))
    return int(refs.labels[idx]), float(dists[idx])


def evaluate(queries, query_labels, refs):
    """Classify every query; returns (accuracy, confusion matrix).

    Confusion rows are true classes, columns predicted classes, indexed by
    raw label value up to the largest label seen.
    """
    queries = np.asarray(queries, dtype=np.float64)
    query_labels = np.asarray(query_labels, dtype=np.int64)
    if len(queries) == 0:
        raise ValueError("no queries to evaluate")
    n_classes = int(max(query_labels.max(), refs.labels.max())) + 1
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    correct = 0
    for q, true in zip(queries, query_labels):
        pred, _ = nn_classify(q, refs)
        confusion[true, pred] += 1
        correct += int(pred == true)
    return correct / len(queries), confusion
