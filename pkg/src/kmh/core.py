"""Shared domain types: dataset container, partitions, and the Adjusted Rand Index."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SCATTER_LABEL = 0


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DataMatrix:
    """n observations by p features, dense and finite."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {values.shape}")
        n, p = values.shape
        if n < 2 or p < 1:
            raise ValueError(f"need at least 2 observations and 1 feature, got {n}x{p}")
        if not np.all(np.isfinite(values)):
            raise ValueError("data contains NaN or Inf entries")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Partition:
    """Cluster label per observation: ids 1..K, with 0 reserved for scatter."""

    labels: np.ndarray
    K: int = field(default=-1)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d array")
        if labels.size < 1:
            raise ValueError("empty label array")
        if labels.min() < 0:
            raise ValueError("labels must be >= 0 (0 is the scatter id)")
        positive = np.unique(labels[labels > 0])
        k = int(positive.size)
        if k > 0 and not np.array_equal(positive, np.arange(1, k + 1)):
            raise ValueError(f"cluster ids must be exactly 1..{k}, got {positive.tolist()}")
        if self.K == -1:
            object.__setattr__(self, "K", k)
        elif self.K != k:
            raise ValueError(f"declared K={self.K} but labels contain {k} clusters")
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def has_scatter(self) -> bool:
        return bool(np.any(self.labels == SCATTER_LABEL))

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Build a partition from arbitrary nonnegative labels, renumbering ids to 1..K.

        Positive ids are mapped to 1..K in ascending order of the original id;
        0 passes through as scatter.
        """
        labels = np.asarray(labels, dtype=np.int64)
        out = np.zeros_like(labels)
        positive = np.unique(labels[labels > 0])
        for new_id, old_id in enumerate(positive, start=1):
            out[labels == old_id] = new_id
        return cls(out)


@dataclass(frozen=True)
class ContingencyTable:
    """Co-occurrence counts between the groups of two partitions."""

    counts: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _joint_labels(p1: Partition, p2: Partition, scatter: str):
    if p1.n != p2.n:
        raise ValueError(f"partition lengths differ: {p1.n} vs {p2.n}")
    if scatter not in ("include", "exclude"):
        raise ValueError(f"scatter must be 'include' or 'exclude', got {scatter!r}")
    l1, l2 = p1.labels, p2.labels
    if scatter == "exclude":
        keep = (l1 != SCATTER_LABEL) & (l2 != SCATTER_LABEL)
        l1, l2 = l1[keep], l2[keep]
    return l1, l2


def contingency(p1: Partition, p2: Partition, scatter: str = "include") -> ContingencyTable:
    """Cross-tabulate two partitions of the same observations.

    Rows index the groups of ``p1``, columns those of ``p2``, both in
    ascending label order. With ``scatter="include"`` the reserved label 0
    is counted as an ordinary group of its own.
    """
    l1, l2 = _joint_labels(p1, p2, scatter)
    rows, r_idx = np.unique(l1, return_inverse=True)
    cols, c_idx = np.unique(l2, return_inverse=True)
    counts = np.zeros((rows.size, cols.size), dtype=np.int64)
    np.add.at(counts, (r_idx, c_idx), 1)
    return ContingencyTable(_readonly(counts), _readonly(rows), _readonly(cols))


def adjusted_rand_index(p1: Partition, p2: Partition, scatter: str = "include") -> float:
    """Chance-corrected pairwise agreement between two partitions.

    Returns 1.0 iff the partitions are identical up to a relabeling of
    cluster ids; around zero for independent partitions. ``scatter``
    controls the reserved label 0: "include" treats it as one ordinary
    group (default, so every observation contributes), "exclude" compares
    only observations that are non-scatter in both partitions.
    """
    l1, l2 = _joint_labels(p1, p2, scatter)
    n = l1.size
    if n < 2:
        raise ValueError("need at least 2 jointly-compared observations")
    table = contingency(p1, p2, scatter=scatter)
    # pairs counted in floating point via m(m-1)/2: exact for counts < 2^26
    def pairs(m):
        m = np.asarray(m, dtype=float)
        return m * (m - 1.0) / 2.0

    sum_cells = pairs(table.counts).sum()
    sum_rows = pairs(table.row_marginals).sum()
    sum_cols = pairs(table.col_marginals).sum()
    total = n * (n - 1.0) / 2.0
    expected = sum_rows * sum_cols / total
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        # happens only when both partitions are all-singletons or single-group
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))
