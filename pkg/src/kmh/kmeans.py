"""Multi-start Lloyd K-means and the Diff(K)-ratio criterion for picking
candidate over-segmentation sizes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import Seed, generator, spawn
from .core import DataMatrix, Partition

MAX_SWEEPS = 100


@dataclass(frozen=True)
class KMeansResult:
    partition: Partition
    centers: np.ndarray
    wgss: float
    iterations: int

    @property
    def K(self) -> int:
        return self.partition.K


@dataclass(frozen=True)
class KrzanowskiTrace:
    """Per-K within-group scatter traces and the derived Diff/ratio sequences.

    ``diffs[i]`` is Diff(diff_k[i]) = (K-1)^(2/p) trace(K-1) - K^(2/p) trace(K);
    ``ratios[i]`` is C(ratio_k[i]) = |Diff(K)/Diff(K+1)|, defined only where
    Diff(K+1) is nonzero.
    """

    k_values: np.ndarray
    traces: np.ndarray
    diff_k: np.ndarray
    diffs: np.ndarray
    ratio_k: np.ndarray
    ratios: np.ndarray


def _count_distinct_rows(x: np.ndarray) -> int:
    return np.unique(x, axis=0).shape[0]


def _init_macqueen(x: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """K distinct observations sampled uniformly as seeds."""
    n = x.shape[0]
    order = rng.permutation(n)
    chosen: list[int] = []
    for idx in order:
        row = x[idx]
        if any(np.array_equal(row, x[c]) for c in chosen):
            continue
        chosen.append(int(idx))
        if len(chosen) == K:
            break
    return x[chosen].copy()


def _init_maximin(x: np.ndarray, K: int) -> np.ndarray:
    """Deterministic farthest-point seeding: start farthest from the grand
    mean, then repeatedly add the point maximizing distance to chosen seeds."""
    center = x.mean(axis=0)
    d2 = ((x - center) ** 2).sum(axis=1)
    chosen = [int(np.argmax(d2))]
    min_d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < K:
        nxt = int(np.argmax(min_d2))
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _sq_distances(x: np.ndarray, x_sq: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2, clipped against roundoff
    d2 = x_sq[:, None] - 2.0 * (x @ centers.T) + (centers**2).sum(axis=1)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def lloyd(
    data: DataMatrix,
    K: int,
    seed: Seed = 0,
    init: str = "macqueen",
    max_iter: int = MAX_SWEEPS,
) -> KMeansResult:
    """One K-means run: seed, then alternate assignment and mean updates
    until no label changes (or the sweep cap).

    Empty clusters are repaired by reseeding them at the observation
    farthest from its currently assigned center, keeping K fixed.
    """
    x = data.values
    n = data.n
    if K < 1 or K > n:
        raise ValueError(f"K={K} out of range for n={n}")
    if K > 1 and _count_distinct_rows(x) < K:
        raise ValueError(f"K={K} exceeds the number of distinct rows")

    if K == 1:
        center = x.mean(axis=0, keepdims=True)
        wgss = float(((x - center) ** 2).sum())
        return KMeansResult(Partition(np.ones(n, dtype=np.int64)), center, wgss, 0)

    if init == "macqueen":
        centers = _init_macqueen(x, K, generator(seed))
    elif init == "maximin":
        centers = _init_maximin(x, K)
    else:
        raise ValueError(f"unknown init {init!r}")

    x_sq = (x**2).sum(axis=1)
    labels = np.full(n, -1, dtype=np.int64)
    sweeps = 0
    while sweeps < max_iter:
        sweeps += 1
        d2 = _sq_distances(x, x_sq, centers)
        new_labels = d2.argmin(axis=1)

        counts = np.bincount(new_labels, minlength=K)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            own_d2 = d2[np.arange(n), new_labels].copy()
            for k in empty:
                far = int(np.argmax(own_d2))
                new_labels[far] = k
                own_d2[far] = -1.0  # taken; next empty cluster picks elsewhere
            counts = np.bincount(new_labels, minlength=K)

        changed = not np.array_equal(new_labels, labels)
        labels = new_labels
        sums = np.column_stack(
            [np.bincount(labels, weights=x[:, d], minlength=K) for d in range(x.shape[1])]
        )
        centers = sums / counts[:, None]
        if not changed:
            break

    wgss = float(((x - centers[labels]) ** 2).sum())
    return KMeansResult(Partition(labels + 1), centers, wgss, sweeps)


def best_of(
    data: DataMatrix,
    K: int,
    starts: int,
    seed: Seed = 0,
    init: str = "macqueen",
) -> KMeansResult:
    """Best of `starts` independent runs by within-group sum of squares.

    Run i draws its stream from child i of `seed`, so enlarging `starts`
    only adds runs (the minimum over a superset can't get worse).
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    best = None
    for child in spawn(seed, starts):
        result = lloyd(data, K, seed=child, init=init)
        if best is None or result.wgss < best.wgss:
            best = result
    return best


def krzanowski_from_traces(k_values, traces, p: int, M: int):
    """Diff/ratio bookkeeping over precomputed within-group scatter traces.

    Returns (KrzanowskiTrace, candidates): the M values of K with largest
    C_K = |Diff(K)/Diff(K+1)|, descending, ties to the smaller K. K values
    whose Diff(K+1) vanishes are excluded; fewer than M eligible K simply
    yields a shorter list.
    """
    k_values = np.asarray(k_values, dtype=np.int64)
    traces = np.asarray(traces, dtype=float)
    if k_values.size != traces.size:
        raise ValueError("k_values and traces must align")
    if k_values.size >= 2 and not np.all(np.diff(k_values) == 1):
        raise ValueError("k_values must be consecutive ascending integers")

    exponent = 2.0 / p
    diff_k, diffs = [], []
    for i in range(1, k_values.size):
        k = int(k_values[i])
        diff_k.append(k)
        diffs.append((k - 1) ** exponent * traces[i - 1] - k**exponent * traces[i])
    diff_k = np.asarray(diff_k, dtype=np.int64)
    diffs = np.asarray(diffs, dtype=float)

    ratio_k, ratios = [], []
    for i in range(diffs.size - 1):
        if diffs[i + 1] == 0.0:
            continue
        ratio_k.append(int(diff_k[i]))
        ratios.append(abs(diffs[i] / diffs[i + 1]))
    ratio_k = np.asarray(ratio_k, dtype=np.int64)
    ratios = np.asarray(ratios, dtype=float)

    order = sorted(range(ratios.size), key=lambda i: (-ratios[i], ratio_k[i]))
    candidates = [int(ratio_k[i]) for i in order[:M]]
    trace = KrzanowskiTrace(k_values, traces, diff_k, diffs, ratio_k, ratios)
    return trace, candidates


def krzanowski_candidates(
    data: DataMatrix,
    k_range,
    M: int,
    starts: int = 10,
    seed: Seed = 0,
    init: str = "macqueen",
    keep_results: bool = False,
    threads: int = 1,
):
    """Rank candidate over-segmentation sizes by the Diff(K) ratio criterion.

    Runs best-of-`starts` K-means for every K in `k_range` (consecutive
    ascending; a leading K=1 is implied when the range starts at 2, since
    the K=1 trace is just the total scatter). Returns (KrzanowskiTrace,
    candidates) and, with keep_results, also a dict K -> KMeansResult.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    k_range = [int(k) for k in k_range]
    if k_range and k_range[0] == 2:
        k_range = [1] + k_range
    if len(k_range) < 3:
        raise ValueError("k_range too short to form any Diff ratio")

    children = spawn(seed, len(k_range))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(
                pool.map(
                    lambda kc: best_of(data, kc[0], starts=starts, seed=kc[1], init=init),
                    zip(k_range, children),
                )
            )
    else:
        runs = [
            best_of(data, k, starts=starts, seed=child, init=init)
            for k, child in zip(k_range, children)
        ]
    results: dict[int, KMeansResult] = dict(zip(k_range, runs))
    traces = [res.wgss for res in runs]

    trace, candidates = krzanowski_from_traces(k_range, traces, data.p, M)
    if keep_results:
        return trace, candidates, results
    return trace, candidates
