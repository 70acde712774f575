"""Co-association matrix, threshold-based group counting, and final selection."""

import numpy as np
import pytest

from kmh.core import Partition, adjusted_rand_index
from kmh.consensus import (
    SimilarityMatrix,
    build_similarity,
    estimate_kstar,
    estimate_kstar_once,
    mean_ari_scores,
    select_best_partition,
)


def parts(*label_lists):
    return [Partition.from_labels(np.asarray(l)) for l in label_lists]


def test_build_similarity_hand_count():
    sim = build_similarity(parts([1, 1, 2], [1, 2, 2]))
    assert sim.N == 2
    assert sim.psi[0, 1] == 0.5
    assert sim.psi[0, 2] == 0.0
    assert sim.psi[1, 2] == 0.5
    assert np.allclose(np.diag(sim.psi), 1.0)


def test_identical_partitions_give_block_psi():
    labels = [1, 1, 2, 2, 3]
    sim = build_similarity(parts(labels, labels, labels))
    expected = (np.asarray(labels)[:, None] == np.asarray(labels)[None, :]).astype(float)
    assert np.array_equal(sim.psi, expected)


def test_similarity_order_invariant_and_counts_integral():
    rng = np.random.default_rng(0)
    ps = parts(*[rng.integers(1, 4, size=12) for _ in range(5)])
    a = build_similarity(ps)
    b = build_similarity(ps[::-1])
    assert np.array_equal(a.psi, b.psi)
    assert np.array_equal(a.psi, a.psi.T)
    counts = a.psi * a.N
    assert np.allclose(counts, np.round(counts))


def test_scatter_excluded_from_psi():
    sim = build_similarity(parts([0, 1, 1, 2], [1, 1, 2, 0]))
    assert sim.indices.tolist() == [1, 2]
    assert sim.psi.shape == (2, 2)


def test_estimate_two_blocks():
    labels = [1] * 5 + [2] * 5
    sim = build_similarity(parts(labels, labels, labels))
    assert estimate_kstar_once(sim) == 2


def test_estimate_all_ones_gives_one():
    sim = SimilarityMatrix(np.ones((6, 6)), 4, np.arange(6))
    assert estimate_kstar_once(sim) == 1


def test_blocks_fuse_above_threshold():
    # 3 blocks with inter-block psi 0.6 > 0.5: everything fuses
    psi = np.full((9, 9), 0.6)
    for b in range(3):
        psi[3 * b : 3 * b + 3, 3 * b : 3 * b + 3] = 1.0
    sim = SimilarityMatrix(psi, 10, np.arange(9))
    assert estimate_kstar_once(sim) == 1


def test_blocks_separate_below_threshold():
    psi = np.full((9, 9), 0.3)
    for b in range(3):
        psi[3 * b : 3 * b + 3, 3 * b : 3 * b + 3] = 1.0
    sim = SimilarityMatrix(psi, 10, np.arange(9))
    assert estimate_kstar_once(sim) == 3


def test_exact_k_recovery_for_pure_ensembles():
    rng = np.random.default_rng(1)
    for k in (2, 3, 5):
        labels = rng.integers(1, k + 1, size=40)
        labels[:k] = np.arange(1, k + 1)
        ps = parts(*[labels] * 7)
        sim = build_similarity(ps)
        for threshold in (0.2, 0.5, 0.8):
            assert estimate_kstar_once(sim, threshold=threshold) == k


def test_estimate_reorder_invariance_single_regime():
    # low-mean psi routes to single linkage, where the threshold cut counts
    # graph components and is reorder-invariant even with tied entries
    rng = np.random.default_rng(2)
    labels = [rng.integers(1, 4, size=15) for _ in range(4)]
    ps = parts(*labels)
    k1 = estimate_kstar_once(build_similarity(ps))
    perm = rng.permutation(15)
    ps2 = parts(*[l[perm] for l in labels])
    k2 = estimate_kstar_once(build_similarity(ps2))
    assert k1 == k2


def test_estimate_reorder_invariance_complete_regime():
    # tie-free high-mean psi: complete linkage, still reorder-invariant
    rng = np.random.default_rng(8)
    m = 14
    base = rng.uniform(0.55, 1.0, size=(m, m))
    psi = (base + base.T) / 2
    np.fill_diagonal(psi, 1.0)
    sim = SimilarityMatrix(psi, 100, np.arange(m))
    k1 = estimate_kstar_once(sim)
    perm = rng.permutation(m)
    sim2 = SimilarityMatrix(psi[np.ix_(perm, perm)], 100, np.arange(m))
    assert estimate_kstar_once(sim2) == k1


def test_estimate_kstar_replicates():
    labels = [1] * 30 + [2] * 30
    ps = parts(labels, labels, labels)
    est = estimate_kstar(ps, B=9, subsample=20, seed=5)
    assert est.per_replicate == [2] * 9
    assert est.median_kstar == 2
    assert est.frequencies == {2: 1.0}


def test_estimate_kstar_single_full_replicate():
    labels = [1] * 10 + [2] * 10
    ps = parts(labels, labels)
    est = estimate_kstar(ps, B=1, subsample=20, seed=0)
    assert est.median_kstar == 2


def test_lower_median_convention():
    labels = [1] * 40 + [2] * 40
    noisy = list(labels)
    noisy[0] = 2
    ps = parts(labels, noisy, labels)
    est = estimate_kstar(ps, B=4, subsample=30, seed=7)
    ordered = sorted(est.per_replicate)
    assert est.median_kstar == ordered[1]


def test_select_best_majority():
    p = [1, 1, 2, 2]
    q = [1, 2, 1, 2]
    idx, best = select_best_partition(parts(p, p, q))
    assert idx == 0
    assert np.array_equal(best.labels, Partition.from_labels(np.asarray(p)).labels)


def test_select_best_tie_lowest_index():
    p = [1, 1, 2, 2]
    idx, _ = select_best_partition(parts(p, p, p))
    assert idx == 0


def test_select_best_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(15):
        ps = parts(*[rng.integers(1, 4, size=10) for _ in range(5)])
        idx, _ = select_best_partition(ps)
        scores = []
        for i in range(len(ps)):
            scores.append(
                sum(adjusted_rand_index(ps[i], ps[j]) for j in range(len(ps))) / len(ps)
            )
        assert idx == int(np.argmax(scores))


def test_select_best_relabel_invariance():
    rng = np.random.default_rng(4)
    ps = parts(*[rng.integers(1, 4, size=12) for _ in range(4)])
    idx1, _ = select_best_partition(ps)
    relabeled = []
    for p in ps:
        perm = rng.permutation(p.K) + 1
        relabeled.append(Partition.from_labels(perm[p.labels - 1]))
    idx2, _ = select_best_partition(relabeled)
    assert idx1 == idx2


def test_argument_errors():
    with pytest.raises(ValueError):
        build_similarity([])
    with pytest.raises(ValueError):
        select_best_partition(parts([1, 1, 2]))
    labels = [1] * 5 + [2] * 5
    with pytest.raises(ValueError):
        estimate_kstar(parts(labels, labels), B=0)
    with pytest.raises(ValueError):
        estimate_kstar(parts(labels, labels), B=2, subsample=99)
