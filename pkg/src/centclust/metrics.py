"""Clustering comparison metrics on contingency tables.

The exact distance d counts the units left unmatched by the best one-to-one
pairing of clusters, minimized over relabelings:

    d(I, II) = [n00 - max_assignment(counts)] / n00

where the maximization runs over one-to-one row-to-column matchings of the
contingency table (rectangular tables are padded with zero rows or columns).
The directed approximation replaces the matching with unconstrained row maxima,

    dt(I, II) = 1 - (sum_i max_j n_ij) / n00,

and the symmetrized approximation is dh = max{dt(I,II), dt(II,I)}.  Row-max
sums dominate any injective assignment sum, so dh <= d always holds, with
equality exactly when some direction's maxima can be picked injectively.

All values are formed by a single division of integer quantities by n00, so
identical integer numerators compare bitwise equal across operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clusterings import Clustering, ContingencyTable, contingency_table

__all__ = [
    "DistanceResult",
    "approx_distance",
    "distance_matrix",
    "distance_upper_bound",
    "exact_distance",
    "table_approx_distance",
    "table_exact_distance",
]


@dataclass(frozen=True)
class DistanceResult:
    """A distance value in [0, 1] plus how it was computed.

    ``directed_pair`` carries the two directed approximations when
    kind == "approx" and is None for exact results.
    """

    value: float
    kind: str
    directed_pair: tuple[float, float] | None = None

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"distance {self.value} outside [0, 1]")
        if self.kind not in ("exact", "approx"):
            raise ValueError(f"unknown kind {self.kind!r}")


def _assignment_sum(counts: np.ndarray) -> int:
    k = max(counts.shape)
    sq = np.zeros((k, k), dtype=np.int64)
    sq[: counts.shape[0], : counts.shape[1]] = counts
    rows, cols = linear_sum_assignment(sq, maximize=True)
    return int(sq[rows, cols].sum())


def table_exact_distance(table: ContingencyTable) -> DistanceResult:
    """Exact distance from a prebuilt contingency table."""
    best = _assignment_sum(table.counts)
    return DistanceResult((table.n00 - best) / table.n00, "exact")


def table_approx_distance(table: ContingencyTable) -> DistanceResult:
    """Symmetrized row-max/column-max distance from a prebuilt table."""
    n00 = table.n00
    row = (n00 - int(table.counts.max(axis=1).sum())) / n00
    col = (n00 - int(table.counts.max(axis=0).sum())) / n00
    return DistanceResult(max(row, col), "approx", (row, col))


def exact_distance(a: Clustering, b: Clustering) -> DistanceResult:
    return table_exact_distance(contingency_table(a, b))


def approx_distance(a: Clustering, b: Clustering) -> DistanceResult:
    return table_approx_distance(contingency_table(a, b))


def distance_upper_bound(n00: int, k: int) -> float:
    """Largest distance attainable between two k-cluster partitions of n00
    units, 1 - m*k/n00 with m = floor(n00/k^2); attained by the equal-cell
    table and shared by both metrics."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if n00 < 1:
        raise ValueError("n00 must be a positive integer")
    m = n00 // (k * k)
    return (n00 - m * k) / n00


def distance_matrix(samples, kind: str = "approx") -> np.ndarray:
    """Symmetric pairwise distance matrix over a sequence of clusterings."""
    if kind == "exact":
        table_fn = table_exact_distance
    elif kind == "approx":
        table_fn = table_approx_distance
    else:
        raise ValueError(f"unknown kind {kind!r}")
    samples = list(samples)
    ns = {c.n for c in samples}
    if len(ns) > 1:
        raise ValueError(f"clusterings cover different unit counts: {sorted(ns)}")
    m = len(samples)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = table_fn(contingency_table(samples[i], samples[j])).value
            out[i, j] = out[j, i] = d
    return out
