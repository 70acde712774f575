"""Probabilistic distance between spherical Gaussian entities.

An entity is a K-means cluster summarized by (mean, spherical variance,
size). The distance between entities l and j is 1 - (p_lj + p_jl)/2, where
p_jl is the probability that a point drawn from l's Gaussian is closer (in
variance-scaled squared distance) to j's center than to its own. The
probabilities come from a noncentral chi-square law in the unequal-variance
case and a plain normal in the equal-variance case; a Monte-Carlo sampler of
the general quadratic-form representation serves as the validation oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln, ndtr

from ._rng import Seed, generator

# exact Poisson-mixture series below this df+ncp, normal approximation above
SERIES_LIMIT = 2000.0

# relative variance gap below which two entities count as equal-variance
EQUAL_VAR_RTOL = 1e-6

_MC_CHUNK = 250_000


@dataclass(frozen=True)
class SphericalCluster:
    """Mean vector, spherical variance and member count of one entity."""

    mean: np.ndarray
    sigma2: float
    size: int

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean contains non-finite entries")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        if self.size < 1:
            raise ValueError("size must be >= 1")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def p(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class QuadFormSpec:
    """Eigenvalues and shifted-mean coefficients of the quadratic form whose
    law gives the misclassification probability in the general case."""

    lambdas: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        lambdas = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        deltas = np.atleast_1d(np.asarray(self.deltas, dtype=float))
        if lambdas.shape != deltas.shape or lambdas.ndim != 1:
            raise ValueError("lambdas and deltas must be vectors of equal length")
        if np.any(lambdas <= 0):
            raise ValueError("all lambdas must be > 0")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "deltas", deltas)


def variance_floor(data) -> float:
    """Smallest admissible entity variance for this dataset."""
    x = data.values
    total_var = float(((x - x.mean(axis=0)) ** 2).sum()) / (data.n - 1)
    floor = 1e-8 * total_var / data.p
    return floor if floor > 0 else 1e-12


def fit_entity(data, member_indices, floor: float | None = None) -> SphericalCluster:
    """Summarize the given observations as one spherical entity.

    sigma2 is the trace of the sample covariance (divisor n-1) scaled by
    1/p, floored at a tiny fraction of the overall data variance so that
    singleton or collinear entities stay usable.
    """
    idx = np.asarray(member_indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("entity needs at least one member")
    if floor is None:
        floor = variance_floor(data)
    xs = data.values[idx]
    mean = xs.mean(axis=0)
    if idx.size == 1:
        sigma2 = floor
    else:
        total_ss = float(((xs - mean) ** 2).sum())
        sigma2 = max(total_ss / ((idx.size - 1) * data.p), floor)
    return SphericalCluster(mean, sigma2, int(idx.size))


def mahalanobis_sq(x, c: SphericalCluster) -> float:
    """Squared distance of x to the entity center, scaled by its variance."""
    x = np.asarray(x, dtype=float)
    if x.shape != c.mean.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {c.mean.shape}")
    if c.sigma2 <= 0:
        raise ValueError("sigma2 must be positive (floor it upstream)")
    diff = x - c.mean
    return float(diff @ diff / c.sigma2)


def _series_cdf(x: float, df: float, ncp: float) -> float:
    # Poisson(ncp/2) mixture of central chi-square CDFs
    if ncp == 0.0:
        return float(gammainc(df / 2.0, x / 2.0))
    m = ncp / 2.0
    i_max = int(np.ceil(m + 12.0 * np.sqrt(m) + 35.0))
    i = np.arange(i_max + 1)
    log_w = i * np.log(m) - m - gammaln(i + 1.0)
    keep = log_w > -40.0  # weights below ~4e-18 cannot move the sum
    w = np.exp(log_w[keep])
    terms = gammainc(df / 2.0 + i[keep], x / 2.0)
    return float(min(1.0, w @ terms))


def _normal_approx_cdf(x: float, df: float, ncp: float) -> float:
    mean = df + ncp
    var = 2.0 * (df + 2.0 * ncp)
    return float(ndtr((x - mean) / np.sqrt(var)))


def noncentral_chisq_cdf(x: float, df: float, ncp: float, method: str = "auto") -> float:
    """CDF of the noncentral chi-square distribution.

    method "auto" evaluates the exact Poisson-mixture series while
    df + ncp <= SERIES_LIMIT and otherwise the N(df+ncp, 2(df+2 ncp))
    approximation, which is where the exact series loses accuracy anyway.
    "series"/"normal" force one evaluator.
    """
    if df < 1:
        raise ValueError("df must be >= 1")
    if ncp < 0:
        raise ValueError("ncp must be >= 0")
    if x <= 0:
        return 0.0
    if method == "auto":
        method = "series" if df + ncp <= SERIES_LIMIT else "normal"
    if method == "series":
        return _series_cdf(x, df, ncp)
    if method == "normal":
        return _normal_approx_cdf(x, df, ncp)
    raise ValueError(f"unknown method {method!r}")


def misclass_prob(from_cluster: SphericalCluster, into_cluster: SphericalCluster) -> float:
    """Probability that a point of `from_cluster` is scored closer to
    `into_cluster`'s center than to its own.

    Equal-variance entities give Pr[N(D^2, 4 D^2) < 0] with D the
    variance-scaled center separation (0.5 at D=0 by continuity);
    otherwise the probability comes from a scaled, shifted noncentral
    chi-square with noncentrality s_l^2 ||mu_l-mu_j||^2 / (s_l^2-s_j^2)^2.
    """
    l, j = from_cluster, into_cluster
    if l.p != j.p:
        raise ValueError(f"dimension mismatch: {l.p} vs {j.p}")
    if l.sigma2 <= 0 or j.sigma2 <= 0:
        raise ValueError("entity variances must be positive")

    diff = l.mean - j.mean
    dist_sq = float(diff @ diff)
    if abs(l.sigma2 - j.sigma2) <= EQUAL_VAR_RTOL * max(l.sigma2, j.sigma2):
        if dist_sq == 0.0:
            return 0.5
        delta = np.sqrt(dist_sq / l.sigma2)
        return float(ndtr(-delta / 2.0))

    gap = l.sigma2 - j.sigma2
    x0 = j.sigma2 * dist_sq / gap**2
    ncp = l.sigma2 * dist_sq / gap**2
    cdf = noncentral_chisq_cdf(x0, l.p, ncp) if x0 > 0 else 0.0
    if gap > 0:  # scale (s_l^2/s_j^2 - 1) positive
        return cdf
    return 1.0 - cdf


def quadform_from_spherical(
    from_cluster: SphericalCluster, into_cluster: SphericalCluster
) -> QuadFormSpec:
    """Quadratic-form coefficients for a pair of spherical entities: all
    eigenvalues equal the variance ratio, deltas are the scaled mean gap."""
    l, j = from_cluster, into_cluster
    if l.p != j.p:
        raise ValueError(f"dimension mismatch: {l.p} vs {j.p}")
    lambdas = np.full(l.p, l.sigma2 / j.sigma2)
    deltas = (l.mean - j.mean) / np.sqrt(l.sigma2)
    return QuadFormSpec(lambdas, deltas)


def theorem1_mc_cdf(spec: QuadFormSpec, x: float, draws: int, seed: Seed = 0) -> float:
    """Monte-Carlo CDF of the quadratic-form law at x.

    Samples the representation sum_i [(lam_i - 1) U_i - lam_i d_i^2/(lam_i - 1)]
    over the lam_i != 1 coordinates (U_i noncentral chi-square, 1 df) plus
    sum_i d_i (2 Z_i + d_i) over the lam_i = 1 ones. Draws landing exactly
    on x count half, so atoms are scored by the continuity convention.
    """
    if draws < 10_000:
        raise ValueError("draws must be >= 10000")
    lam, delta = spec.lambdas, spec.deltas
    ne = lam != 1.0
    eq = ~ne
    lam_ne, delta_ne = lam[ne], delta[ne]
    delta_eq = delta[eq]
    shift = float((-lam_ne * delta_ne**2 / (lam_ne - 1.0)).sum())
    root_ncp = np.abs(lam_ne * delta_ne / (lam_ne - 1.0))

    rng = generator(seed)
    below = 0.0
    at = 0.0
    remaining = draws
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        remaining -= m
        y = np.full(m, shift)
        if lam_ne.size:
            z = rng.standard_normal((m, lam_ne.size))
            u = (z + root_ncp) ** 2
            y += u @ (lam_ne - 1.0)
        if delta_eq.size:
            z = rng.standard_normal((m, delta_eq.size))
            y += (2.0 * z + delta_eq) @ delta_eq
        below += np.count_nonzero(y < x)
        at += np.count_nonzero(y == x)
    return float((below + 0.5 * at) / draws)


def cluster_distance(a: SphericalCluster, b: SphericalCluster) -> float:
    """Merge distance 1 - (p_ab + p_ba)/2, symmetric and in [0, 1]."""
    return 1.0 - 0.5 * (misclass_prob(a, b) + misclass_prob(b, a))


def entity_distance_matrix(entities) -> np.ndarray:
    """Symmetric pairwise distance matrix over entities, zero diagonal."""
    K = len(entities)
    if K < 2:
        raise ValueError("need at least 2 entities")
    d = np.zeros((K, K))
    for i in range(K):
        for j in range(i + 1, K):
            d[i, j] = d[j, i] = cluster_distance(entities[i], entities[j])
    return d
