"""Canonical clusterings and contingency tables.

A clustering is stored as dense integer labels in first-occurrence order, so
equality up to relabeling becomes plain sequence equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Clustering",
    "ContingencyTable",
    "canonicalize",
    "canonicalize_labels",
    "contingency_table",
    "num_clusters",
]


def canonicalize_labels(raw) -> np.ndarray:
    """Renumber arbitrary identifiers to 0,1,2,... in order of first occurrence."""
    arr = np.asarray(raw)
    if arr.ndim != 1:
        raise ValueError(f"labels must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("cannot canonicalize an empty label sequence")
    if arr.dtype.kind in "iu":
        uniq, first, inv = np.unique(arr, return_index=True, return_inverse=True)
        rank = np.empty(uniq.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(uniq.size)
        return rank[inv].astype(np.int64)
    seen: dict = {}
    out = np.empty(arr.size, dtype=np.int64)
    for i, v in enumerate(arr.tolist()):
        out[i] = seen.setdefault(v, len(seen))
    return out


class Clustering:
    """A partition of n units; ``labels`` is canonical and immutable."""

    __slots__ = ("labels",)

    def __init__(self, labels):
        lab = canonicalize_labels(labels)
        lab.setflags(write=False)
        self.labels = lab

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return self.labels.shape == other.labels.shape and bool(
            np.array_equal(self.labels, other.labels)
        )

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        return f"Clustering(n={self.n}, k={self.k})"


def canonicalize(raw_labels) -> Clustering:
    """Wrap raw identifiers into a canonical Clustering."""
    return Clustering(raw_labels)


def num_clusters(c: Clustering) -> int:
    return c.k


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulation of two clusterings of the same units.

    counts[i, j] is the number of units in cluster i of the first clustering
    and cluster j of the second; marginals and the grand total are derived.
    """

    counts: np.ndarray
    row_sums: np.ndarray = field(init=False)
    col_sums: np.ndarray = field(init=False)
    n00: int = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValueError("counts must be a 2-d matrix")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_sums", counts.sum(axis=1))
        object.__setattr__(self, "col_sums", counts.sum(axis=0))
        object.__setattr__(self, "n00", int(counts.sum()))


def contingency_table(a: Clustering, b: Clustering) -> ContingencyTable:
    if a.n != b.n:
        raise ValueError(f"clusterings cover different unit counts: {a.n} vs {b.n}")
    ka, kb = a.k, b.k
    flat = a.labels * kb + b.labels
    counts = np.bincount(flat, minlength=ka * kb).reshape(ka, kb)
    return ContingencyTable(counts)
