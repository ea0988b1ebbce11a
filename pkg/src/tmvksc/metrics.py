"""External clustering validation: contingency tables, ARI and NMI."""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class Contingency:
    table: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    n: int


def contingency(labels_a, labels_b):
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"labelings differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise DimensionError("at least two samples are required")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return Contingency(table=table, rows=table.sum(axis=1), cols=table.sum(axis=0), n=int(a.size))


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x * (x - 1.0)) / 2.0)


def ari(labels_a, labels_b):
    """Hubert-Arabie adjusted Rand index."""
    c = contingency(labels_a, labels_b)
    index = _comb2(c.table)
    sum_a = _comb2(c.rows)
    sum_b = _comb2(c.cols)
    total = c.n * (c.n - 1) / 2.0
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # both partitions trivial (one cluster or all singletons) and equal in kind
        return 1.0
    return float((index - expected) / (max_index - expected))


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(labels_a, labels_b):
    """Mutual information normalised by ``sqrt(H(A) H(B))``, in nats."""
    c = contingency(labels_a, labels_b)
    h_a = _entropy(c.rows, c.n)
    h_b = _entropy(c.cols, c.n)
    if h_a == 0.0 or h_b == 0.0:
        return 1.0 if h_a == h_b else 0.0
    nz = c.table > 0
    pij = c.table[nz] / c.n
    outer = np.outer(c.rows, c.cols)[nz] / float(c.n) ** 2
    mi = float(np.sum(pij * np.log(pij / outer)))
    return float(np.clip(mi / np.sqrt(h_a * h_b), 0.0, 1.0))
