"""Datasets, synthetic mixture generation, delimited persistence."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clusterings import Clustering


@dataclass(frozen=True)
class Dataset:
    """An n x d matrix of finite reals with optional column names."""

    rows: np.ndarray
    column_names: tuple | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError(f"dataset must be a nonempty n x d matrix, got shape {rows.shape}")
        if not np.isfinite(rows).all():
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "rows", rows)
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != rows.shape[1]:
                raise ValueError(
                    f"{len(names)} column names for {rows.shape[1]} columns")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def generate_mixture_1d(n, means, sigma, seed):
    """Draw n observations from an equal-weight mixture of 1-D normals.

    Each unit picks a component uniformly, then draws N(means[c], sigma^2).
    Returns (Dataset, Clustering) where the clustering holds the ground-truth
    component memberships.
    """
    means = np.asarray(means, dtype=float).ravel()
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if means.size < 1:
        raise ValueError("need at least one component mean")
    if not sigma > 0:
        raise ValueError(f"need sigma > 0, got {sigma}")
    rng = np.random.default_rng(seed)
    comp = rng.integers(0, means.size, size=n)
    values = means[comp] + sigma * rng.standard_normal(n)
    return Dataset(values[:, None]), Clustering(comp)


def feature_subset(data: Dataset, columns) -> Dataset:
    """Dataset restricted to the given column indices, in the given order."""
    cols = [int(c) for c in columns]
    for c in cols:
        if not 0 <= c < data.d:
            raise ValueError(f"column {c} out of range for d={data.d}")
    names = None
    if data.column_names is not None:
        names = tuple(data.column_names[c] for c in cols)
    return Dataset(data.rows[:, cols], column_names=names)


def save_dataset(data: Dataset, path) -> None:
    """Comma-separated values at 17 significant digits, header line only when
    the dataset has column names."""
    lines = []
    if data.column_names is not None:
        lines.append(",".join(data.column_names))
    for row in data.rows:
        lines.append(",".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_row(cells, width, lineno, path):
    if width is not None and len(cells) != width:
        raise ValueError(
            f"{path}: line {lineno}: expected {width} columns, found {len(cells)}")
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise ValueError(f"{path}: line {lineno}: non-numeric cell") from None


def load_dataset(path) -> Dataset:
    """Read a comma-separated dataset, auto-detecting a header line.

    The first line is a header exactly when at least one of its cells is not
    numeric; malformed rows are reported with their 1-based line number.
    """
    path = Path(path)
    raw = path.read_text().splitlines()
    lines = [(i + 1, line.strip()) for i, line in enumerate(raw) if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty dataset file")
    names = None
    first_cells = [c.strip() for c in lines[0][1].split(",")]
    try:
        [float(c) for c in first_cells]
    except ValueError:
        names = tuple(first_cells)
        lines = lines[1:]
        if not lines:
            raise ValueError(f"{path}: header but no data rows") from None
    width = len(first_cells)
    rows = [_parse_row([c.strip() for c in line.split(",")], width, lineno, path)
            for lineno, line in lines]
    return Dataset(np.array(rows, dtype=float), column_names=names)
