"""K-means baseline: Lloyd iteration with seeded random-row initialization."""

from __future__ import annotations

import numpy as np

from .clusterings import Clustering
from .data import Dataset


def _as_rows(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.rows
    rows = np.asarray(data, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    return rows


def _plusplus_centers(rows, k, rng):
    n = rows.shape[0]
    chosen = [int(rng.integers(n))]
    for _ in range(k - 1):
        d2 = ((rows[:, None, :] - rows[chosen][None]) ** 2).sum(-1).min(axis=1)
        total = d2.sum()
        if total > 0:
            chosen.append(int(rng.choice(n, p=d2 / total)))
        else:
            chosen.append(int(rng.integers(n)))
    return rows[chosen].copy()


def kmeans(data, k, seed, max_iters: int = 100, plusplus: bool = False) -> Clustering:
    """Cluster rows into k groups; returns the canonical clustering.

    Initial centers are k distinct rows sampled uniformly (k-means++ weighting
    with plusplus=True).  Iteration stops when assignments stabilize or after
    max_iters sweeps.  A cluster left empty by an assignment step is reseeded
    with the point farthest from its current center, so all k clusters come
    back nonempty whenever the data has at least k distinct rows.
    """
    rows = _as_rows(data)
    n = rows.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n = {n}, got k = {k}")
    if max_iters < 1:
        raise ValueError(f"need max_iters >= 1, got {max_iters}")
    rng = np.random.default_rng(seed)
    if plusplus:
        centers = _plusplus_centers(rows, k, rng)
    else:
        centers = rows[rng.choice(n, size=k, replace=False)].copy()

    prev = None
    for _ in range(max_iters):
        sq = ((rows[:, None, :] - centers[None]) ** 2).sum(-1)
        assign = sq.argmin(axis=1)
        for _attempt in range(k):
            empty = np.setdiff1d(np.arange(k), assign)
            if empty.size == 0:
                break
            own = sq[np.arange(n), assign]
            for c in empty:
                j = int(own.argmax())
                centers[c] = rows[j]
                own[j] = -1.0
            sq = ((rows[:, None, :] - centers[None]) ** 2).sum(-1)
            assign = sq.argmin(axis=1)
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        for c in range(k):
            sel = assign == c
            if sel.any():
                centers[c] = rows[sel].mean(axis=0)
    return Clustering(assign)
