"""Co-association consensus across candidate partitions.

The similarity matrix counts how often pairs of observations land in the
same cluster across partitions; thresholding its dendrogram estimates the
number of general-shaped clusters, and the final partition is the one most
similar (by mean Adjusted Rand Index) to all the others.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from ._rng import Seed, generator
from .core import SCATTER_LABEL, Partition, adjusted_rand_index

DEFAULT_THRESHOLD = 0.5
# linkage-choice cutoffs: co-association ensembles whose off-diagonal mass is
# modest or noisy get chained with single linkage (see estimate_kstar_once)
DEFAULT_MEAN_CUT = 0.5
DEFAULT_CV_CUT = 0.8
DEFAULT_SUBSAMPLE_CAP = 500


@dataclass(frozen=True)
class SimilarityMatrix:
    """Fraction of partitions placing each observation pair together."""

    psi: np.ndarray
    N: int
    indices: np.ndarray  # observation ids the rows/columns refer to


@dataclass(frozen=True)
class KStarEstimate:
    per_replicate: list
    median_kstar: int
    frequencies: dict


def _core_indices(partitions) -> np.ndarray:
    n = partitions[0].n
    mask = np.ones(n, dtype=bool)
    for part in partitions:
        if part.n != n:
            raise ValueError("partitions cover different observation sets")
        mask &= part.labels != SCATTER_LABEL
    return np.flatnonzero(mask)


def _psi_over(partitions, indices: np.ndarray) -> np.ndarray:
    acc = np.zeros((indices.size, indices.size), dtype=np.int32)
    for part in partitions:
        sub = part.labels[indices]
        acc += sub[:, None] == sub[None, :]
    return acc / float(len(partitions))


def build_similarity(partitions) -> SimilarityMatrix:
    """Co-association matrix over the observations that are scatter in no
    partition; entries are co-membership counts divided by N."""
    if not partitions:
        raise ValueError("need at least one partition")
    indices = _core_indices(partitions)
    return SimilarityMatrix(_psi_over(partitions, indices), len(partitions), indices)


def _count_groups(psi: np.ndarray, threshold: float, mean_cut: float, cv_cut: float) -> int:
    m = psi.shape[0]
    if m < 2:
        raise ValueError("need at least 2 observations")
    rows, cols = np.triu_indices(m, 1)
    off = psi[rows, cols]
    mean = float(off.mean())
    cv = np.inf if mean == 0 else float(off.std() / mean)
    # weak or uncertain co-association: chain cautiously with single linkage
    method = "single" if (mean < mean_cut or cv > cv_cut) else "complete"
    tree = linkage(1.0 - off, method=method)
    # pairs sitting exactly at the threshold stay linked
    flat = fcluster(tree, t=1.0 - threshold, criterion="distance")
    return int(flat.max())


def estimate_kstar_once(
    sim: SimilarityMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    mean_cut: float = DEFAULT_MEAN_CUT,
    cv_cut: float = DEFAULT_CV_CUT,
) -> int:
    """Cluster count left after cutting the 1-psi dendrogram at 1-threshold.

    Linkage is single when the off-diagonal similarities are generally
    small (mean below mean_cut) or uncertain (coefficient of variation
    above cv_cut), complete otherwise.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must be in (0, 1)")
    return _count_groups(sim.psi, threshold, mean_cut, cv_cut)


def estimate_kstar(
    partitions,
    B: int,
    subsample: int | None = None,
    seed: Seed = 0,
    threshold: float = DEFAULT_THRESHOLD,
    mean_cut: float = DEFAULT_MEAN_CUT,
    cv_cut: float = DEFAULT_CV_CUT,
) -> KStarEstimate:
    """Replicate the threshold estimate B times on random observation subsets.

    Each replicate samples `subsample` core observations uniformly without
    replacement (default min(n*, 500)), builds the co-association matrix on
    the subset, and counts groups. Reports every estimate, the frequency of
    each value, and their lower median.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    core = _core_indices(partitions)
    if subsample is None:
        subsample = min(core.size, DEFAULT_SUBSAMPLE_CAP)
    if subsample > core.size:
        raise ValueError(f"subsample={subsample} exceeds {core.size} core observations")

    rng = generator(seed)
    estimates = []
    for _ in range(B):
        chosen = np.sort(rng.choice(core, size=subsample, replace=False))
        psi = _psi_over(partitions, chosen)
        estimates.append(_count_groups(psi, threshold, mean_cut, cv_cut))

    ordered = sorted(estimates)
    median = ordered[(B - 1) // 2]
    values, counts = np.unique(estimates, return_counts=True)
    freqs = {int(v): float(c) / B for v, c in zip(values, counts)}
    return KStarEstimate(estimates, int(median), freqs)


def mean_ari_scores(partitions, scatter: str = "include"):
    """Pairwise ARI matrix (unit diagonal) and its row means."""
    N = len(partitions)
    ari = np.eye(N)
    for i in range(N):
        for j in range(i + 1, N):
            ari[i, j] = ari[j, i] = adjusted_rand_index(
                partitions[i], partitions[j], scatter=scatter
            )
    return ari, ari.mean(axis=1)


def select_best_partition(partitions, scatter: str = "include"):
    """Index and partition maximizing mean ARI against all candidates
    (self term included); ties go to the lowest index."""
    if len(partitions) < 2:
        raise ValueError("need at least 2 candidate partitions")
    _, w_bar = mean_ari_scores(partitions, scatter=scatter)
    idx = int(np.argmax(w_bar))
    return idx, partitions[idx]
