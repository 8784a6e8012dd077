"""Posterior summaries computed from a trace of sampled clusterings.

Every summary here treats the trace as an empirical distribution over
clusterings and works through the pairwise distance matrix.  Neighborhoods
are open balls: a trace point j lies in the ball of radius r around i when
d(i, j) < r, so a point always lies in its own ball for any positive radius.
Region radii are reported as integer multiples of a resolution step zeta,
which keeps the fast paths bit-identical to the literal grow-by-one-step
procedures they replace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import approx_distance, distance_matrix, exact_distance
from .trace import ClusteringTrace


@dataclass
class ModeReport:
    """Modes found by scanning neighborhood radii over a trace.

    mode_indices are positions in the trace, in order of first detection;
    the first entry is the global mode estimate.  epsilons holds the radius
    at which each mode was first recorded and neighborhood_probs the ball
    probability at that radius.  curves[j] gives mode j's ball probability
    across the whole grid, for plotting.
    """

    mode_indices: list
    epsilons: list
    neighborhood_probs: list
    grid: np.ndarray
    curves: np.ndarray


@dataclass
class RegionReport:
    """A union of balls around trace points covering a target probability.

    radius_steps[j] is the radius of ball j in units of zeta, so its radius
    is radius_steps[j] * zeta exactly as floats.  members lists the trace
    positions covered by the union, ascending.
    """

    center_indices: list
    radius_steps: list
    radii: list
    zeta: float
    target_prob: float
    achieved_prob: float
    members: np.ndarray


def trace_distance_matrix(trace, kind="approx"):
    """Pairwise distances between all trace entries, computed once per
    distinct clustering and broadcast to duplicates."""
    ids = {}
    positions = []
    for entry in trace:
        positions.append(ids.setdefault(entry.clustering, len(ids)))
    small = distance_matrix(list(ids), kind=kind)
    return small[np.ix_(positions, positions)]


def _resolve_dmat(trace, kind, dmat):
    if dmat is None:
        return trace_distance_matrix(trace, kind=kind)
    dmat = np.asarray(dmat, dtype=float)
    n = len(trace)
    if dmat.shape != (n, n):
        raise ValueError(f"distance matrix shape {dmat.shape} does not match trace length {n}")
    return dmat


def empirical_central_clustering(trace, epsilon, kind="approx", dmat=None):
    """Trace index maximizing the epsilon-ball probability, with the
    probability attained.  Ties go to the earliest index."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    dmat = _resolve_dmat(trace, kind, dmat)
    counts = (dmat < epsilon).sum(axis=1)
    idx = int(np.argmax(counts))
    return idx, counts[idx] / len(trace)


def detect_modes(trace, epsilon_grid, kind="approx", dmat=None):
    """Scan an ascending grid of ball radii and collect the maximizers.

    At each radius the trace points attaining the maximal ball count are
    candidate modes; a candidate at distance exactly zero from an already
    recorded mode is the same clustering and is merged.  A radius is skipped
    as uninformative when no ball reaches size two, or when every ball has
    the same size without that size being explained by exact duplication
    (a flat landscape over genuinely distinct clusterings says nothing
    about which of them is central).
    """
    if len(trace) == 0:
        raise ValueError("trace is empty")
    grid = np.unique(np.asarray(epsilon_grid, dtype=float))
    if grid.size == 0 or grid[0] <= 0:
        raise ValueError("epsilon grid must be nonempty and positive")
    dmat = _resolve_dmat(trace, kind, dmat)
    n = len(trace)
    zero_counts = (dmat == 0.0).sum(axis=1)

    mode_indices, epsilons, probs = [], [], []
    for eps in grid:
        counts = (dmat < eps).sum(axis=1)
        cmax = int(counts.max())
        if cmax < 2:
            continue
        attainers = np.flatnonzero(counts == cmax)
        if counts.min() == cmax and not np.all(zero_counts == cmax):
            continue
        for i in attainers:
            i = int(i)
            if mode_indices and dmat[i, mode_indices].min() == 0.0:
                continue
            mode_indices.append(i)
            epsilons.append(float(eps))
            probs.append(cmax / n)

    curves = np.empty((len(mode_indices), grid.size))
    for row, i in enumerate(mode_indices):
        curves[row] = [(dmat[i] < eps).sum() / n for eps in grid]
    return ModeReport(mode_indices, epsilons, probs, grid, curves)


def _steps_to_cover(dist, zeta):
    """Smallest positive integer m with dist < m * zeta, under the same
    float products a step-by-step loop would evaluate."""
    m = int(dist / zeta) + 1
    while m > 1 and dist < (m - 1) * zeta:
        m -= 1
    while not dist < m * zeta:
        m += 1
    return m


def _check_region_args(target_prob, zeta):
    if not 0.0 < target_prob < 1.0:
        raise ValueError(f"target probability must lie in (0, 1), got {target_prob}")
    if zeta <= 0:
        raise ValueError(f"zeta must be positive, got {zeta}")


def credible_region(trace, center, target_prob, zeta, kind="approx", dmat=None):
    """Smallest ball around a trace point reaching the target probability.

    The radius grows in steps of zeta; the result is the first radius whose
    ball holds at least target_prob of the trace.  Implemented through the
    per-point covering steps, which agrees bit for bit with growing the
    radius one step at a time.
    """
    _check_region_args(target_prob, zeta)
    n = len(trace)
    if not 0 <= center < n:
        raise ValueError(f"center index {center} out of range for trace of length {n}")
    dmat = _resolve_dmat(trace, kind, dmat)
    steps = np.array([_steps_to_cover(d, zeta) for d in dmat[center]])
    rank = min(max(int(np.ceil(target_prob * n)), 1), n)
    m = int(np.sort(steps)[rank - 1])
    members = np.flatnonzero(steps <= m)
    return RegionReport([center], [m], [m * zeta], zeta, target_prob,
                        len(members) / n, members)


def hpd_region(trace, mode_indices, target_prob, zeta, kind="approx",
               grow="nearest", dmat=None):
    """Union of balls around the given modes reaching the target probability.

    Balls start empty and grow in steps of zeta.  Each uncovered trace
    point, taken in trace order, grows the ball of its nearest mode (ties
    to the earlier mode; grow="all" grows every ball together) one step at
    a time until the point is covered, and the union's probability is
    checked after every step so the first covering configuration is kept.
    Growth jumps directly between radii at which some point enters a ball;
    in between the union does not change, so the result is identical to the
    literal one-step loop.
    """
    _check_region_args(target_prob, zeta)
    n = len(trace)
    modes = [int(j) for j in mode_indices]
    if not modes:
        raise ValueError("at least one mode index is required")
    for j in modes:
        if not 0 <= j < n:
            raise ValueError(f"mode index {j} out of range for trace of length {n}")
    if grow not in ("nearest", "all"):
        raise ValueError(f"grow must be 'nearest' or 'all', got {grow!r}")
    dmat = _resolve_dmat(trace, kind, dmat)

    cover = np.array([[_steps_to_cover(d, zeta) for d in dmat[j]] for j in modes])
    steps = np.zeros(len(modes), dtype=int)
    covered = np.zeros(n, dtype=bool)
    done = False

    def count():
        return int(covered.sum())

    for p in range(n):
        if covered[p] or done:
            continue
        if grow == "nearest":
            j = int(np.argmin(dmat[modes, p]))
            thresholds = np.unique(cover[j, ~covered])
            for t in thresholds[(thresholds > steps[j]) & (thresholds <= cover[j, p])]:
                steps[j] = int(t)
                covered |= cover[j] <= steps[j]
                if count() / n >= target_prob:
                    done = True
                    break
        else:
            need = (cover - steps[:, None]).min(axis=0)
            thresholds = np.unique(need[~covered])
            for t in thresholds[(thresholds > 0) & (thresholds <= need[p])]:
                grown = steps + int(t)
                covered |= (cover <= grown[:, None]).any(axis=0)
                if count() / n >= target_prob:
                    steps = grown
                    done = True
                    break
            else:
                steps = steps + int(need[p])

    members = np.flatnonzero((cover <= steps[:, None]).any(axis=0))
    return RegionReport(modes, [int(s) for s in steps],
                        [int(s) * zeta for s in steps], zeta, target_prob,
                        len(members) / n, members)


def region_contains(trace, region, clustering, kind="approx"):
    """Whether a clustering, not necessarily from the trace, falls inside
    the union of open balls a region describes."""
    dist = exact_distance if kind == "exact" else approx_distance
    for center, steps in zip(region.center_indices, region.radius_steps):
        if dist(trace[int(center)].clustering, clustering).value < steps * region.zeta:
            return True
    return False


def filter_trace_by_k(trace, k):
    """Subtrace of entries with exactly k clusters, with their original
    positions.  Raises when no entry matches, listing the counts present."""
    indices = np.array([i for i, e in enumerate(trace) if e.k == k], dtype=int)
    if indices.size == 0:
        avail = sorted({e.k for e in trace})
        raise ValueError(
            f"no trace entries with {k} clusters; "
            f"available cluster counts: {', '.join(str(a) for a in avail)}")
    sub = ClusteringTrace([trace[int(i)] for i in indices], trace.meta)
    return sub, indices


def conditional_central_clustering(trace, k, epsilon_grid, kind="approx", dmat=None):
    """Mode scan restricted to trace entries with exactly k clusters.

    Ball probabilities are relative to the subtrace; reported mode indices
    refer to positions in the original trace.
    """
    sub, indices = filter_trace_by_k(trace, k)
    if dmat is not None:
        dmat = np.asarray(dmat, dtype=float)[np.ix_(indices, indices)]
    report = detect_modes(sub, epsilon_grid, kind=kind, dmat=dmat)
    report.mode_indices = [int(indices[i]) for i in report.mode_indices]
    return report


def median_clustering(trace, kind="approx", dmat=None):
    """Trace index minimizing the summed distance to every other entry.
    Ties go to the earliest index."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    dmat = _resolve_dmat(trace, kind, dmat)
    return int(np.argmin(dmat.sum(axis=1)))


def quantile_clustering(trace, center, q, kind="approx", dmat=None):
    """Trace index at the q-th quantile of distance from a center entry.

    q=0 picks the nearest entry (the center itself) and q=1 the farthest;
    the rank is ceil(q * N) clamped to [1, N], with stable ordering so
    equal distances resolve to the earliest index.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile must lie in [0, 1], got {q}")
    n = len(trace)
    if not 0 <= center < n:
        raise ValueError(f"center index {center} out of range for trace of length {n}")
    dmat = _resolve_dmat(trace, kind, dmat)
    order = np.argsort(dmat[center], kind="stable")
    rank = min(max(int(np.ceil(q * n)), 1), n)
    return int(order[rank - 1])


def cluster_count_distribution(trace, members=None):
    """Empirical distribution of the number of clusters, optionally over a
    subset of trace positions."""
    if members is None:
        ks = [e.k for e in trace]
    else:
        ks = [trace[int(i)].k for i in members]
    if not ks:
        raise ValueError("no trace entries to summarize")
    total = len(ks)
    return {k: ks.count(k) / total for k in sorted(set(ks))}
