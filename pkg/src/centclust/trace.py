"""Clustering traces: the ordered record of kept MCMC iterations, plus text
persistence for traces and standalone clustering files.

Trace file format (one header line, then one line per kept iteration):

    #cc-trace v1 n=<n> seed=<seed> burnin=<b> thin=<t>
    iter=<i> k=<k> alpha=<a> labels=<l0,l1,...>

Alpha values are written with repr so the round trip is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clusterings import Clustering

__all__ = [
    "ClusteringTrace",
    "TraceEntry",
    "TraceMeta",
    "load_clustering_file",
    "load_trace",
    "save_clustering_file",
    "save_trace",
    "trace_summary",
]

_FORMAT_TAG = "#cc-trace v1"


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    clustering: Clustering
    k: int
    alpha: float


@dataclass(frozen=True)
class TraceMeta:
    n: int
    seed: int | None
    burn_in: int
    thinning: int
    config_hash: str | None = None


class ClusteringTrace:
    """Ordered post-burn-in clusterings with their iteration metadata."""

    def __init__(self, entries, meta: TraceMeta):
        entries = list(entries)
        if any(e.clustering.n != meta.n for e in entries):
            raise ValueError("trace entries disagree with meta about the unit count")
        iters = [e.iteration for e in entries]
        if any(b <= a for a, b in zip(iters, iters[1:])):
            raise ValueError("trace entries must be in increasing iteration order")
        self.entries = entries
        self.meta = meta

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> TraceEntry:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    @property
    def clusterings(self):
        return [e.clustering for e in self.entries]


def _entry_line(e: TraceEntry) -> str:
    labels = ",".join(str(int(v)) for v in e.clustering.labels)
    return f"iter={e.iteration} k={e.k} alpha={e.alpha!r} labels={labels}"


def _parse_entry(line: str, lineno: int, path) -> TraceEntry:
    try:
        fields = dict(part.split("=", 1) for part in line.split())
        clustering = Clustering([int(v) for v in fields["labels"].split(",")])
        return TraceEntry(
            iteration=int(fields["iter"]),
            clustering=clustering,
            k=clustering.k,
            alpha=float(fields["alpha"]) if "alpha" in fields else float("nan"),
        )
    except (KeyError, ValueError) as err:
        raise ValueError(f"{path}:{lineno}: malformed trace entry ({err})") from None


def save_trace(trace: ClusteringTrace, path) -> None:
    meta = trace.meta
    seed = "none" if meta.seed is None else meta.seed
    with open(path, "w") as fh:
        fh.write(
            f"{_FORMAT_TAG} n={meta.n} seed={seed} "
            f"burnin={meta.burn_in} thin={meta.thinning}\n"
        )
        for e in trace.entries:
            fh.write(_entry_line(e) + "\n")


def load_trace(path) -> ClusteringTrace:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if not parts or parts[0] != "#cc-trace":
            raise ValueError(f"{path}: not a clustering trace file")
        if len(parts) < 2 or parts[1] != "v1":
            raise ValueError(
                f"{path}: unsupported trace version {' '.join(parts[:2])!r}, "
                f"expected {_FORMAT_TAG!r}"
            )
        try:
            kv = dict(p.split("=", 1) for p in parts[2:])
            meta = TraceMeta(
                n=int(kv["n"]),
                seed=None if kv["seed"] == "none" else int(kv["seed"]),
                burn_in=int(kv["burnin"]),
                thinning=int(kv["thin"]),
            )
        except (KeyError, ValueError):
            raise ValueError(f"{path}: malformed trace header {header!r}") from None
        entries = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            entries.append(_parse_entry(line, lineno, path))
    return ClusteringTrace(entries, meta)


def save_clustering_file(clusterings, path, iterations=None) -> None:
    """Write standalone clustering lines ``iter=<i> k=<k> labels=<...>``."""
    if isinstance(clusterings, Clustering):
        clusterings = [clusterings]
    if iterations is None:
        iterations = range(len(clusterings))
    with open(path, "w") as fh:
        for it, c in zip(iterations, clusterings):
            labels = ",".join(str(int(v)) for v in c.labels)
            fh.write(f"iter={it} k={c.k} labels={labels}\n")


def load_clustering_file(path) -> list[Clustering]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            out.append(_parse_entry(line, lineno, path).clustering)
    if not out:
        raise ValueError(f"{path}: no clustering lines found")
    return out


def trace_summary(trace: ClusteringTrace) -> dict:
    """Plain per-trace diagnostics: cluster-count and alpha series plus how
    many distinct clusterings the trace visited."""
    ks = np.array([e.k for e in trace], dtype=np.int64)
    alphas = np.array([e.alpha for e in trace])
    distinct = len({e.clustering for e in trace})
    return {
        "length": len(trace),
        "k_series": ks,
        "alpha_series": alphas,
        "k_min": int(ks.min()) if len(trace) else None,
        "k_max": int(ks.max()) if len(trace) else None,
        "distinct_clusterings": distinct,
    }
