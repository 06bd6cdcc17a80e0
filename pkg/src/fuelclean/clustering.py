"""Windowed hybrid clustering that strips outlying readings.

Each window of the trace is split into two clusters, by spectral clustering
when the window is spread out (std above ``T``) or by single-linkage
agglomerative clustering otherwise. The cluster lying away from the window
median is treated as noise, blanked, and refilled by interpolation once every
window has been processed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DataError, DegenerateBandwidth, NotFilled, SingularDegree, TooShort
from .model import PipelineConfig, Trace
from .preprocess import extrapolate_midpoint, interpolate_linear

SPECTRAL = "spectral"
AGGLOMERATIVE = "agglomerative"


@dataclass(frozen=True)
class AffinityMatrix:
    entries: np.ndarray
    bandwidth: float


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    noise_label: int | None = None

    @property
    def n_clusters(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass(frozen=True)
class HybridSelector:
    """Blend weight between spectral (alpha=1) and agglomerative (alpha=0)."""

    threshold_T: float = 0.1
    tie_method: str = AGGLOMERATIVE

    def alpha(self, sigma: float) -> int:
        if sigma > self.threshold_T:
            return 1
        if sigma < self.threshold_T:
            return 0
        return 1 if self.tie_method == SPECTRAL else 0

    def method(self, sigma: float) -> str:
        return SPECTRAL if self.alpha(sigma) else AGGLOMERATIVE


@dataclass(frozen=True)
class WindowDecision:
    start: int
    stop: int
    sigma: float
    method: str
    removed: tuple[int, ...]  # positions within the trace


def default_bandwidth(values: Sequence[float] | np.ndarray) -> float:
    """Median absolute pairwise difference, or 1.0 when that is zero."""
    v = np.asarray(values, dtype=float)
    iu = np.triu_indices(v.size, k=1)
    diffs = np.abs(v[:, None] - v[None, :])[iu]
    med = float(np.median(diffs)) if diffs.size else 0.0
    return med if med > 0 else 1.0


def build_affinity(values: Sequence[float] | np.ndarray, bandwidth: float) -> AffinityMatrix:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise TooShort("affinity needs at least two values")
    if not bandwidth > 0:
        raise DegenerateBandwidth(f"bandwidth must be positive, got {bandwidth}")
    diff = v[:, None] - v[None, :]
    entries = np.exp(-(diff**2) / (2.0 * bandwidth**2))
    return AffinityMatrix(entries, float(bandwidth))


def normalized_laplacian(affinity: AffinityMatrix) -> np.ndarray:
    a = affinity.entries
    degree = a.sum(axis=1)
    if np.any(degree <= 0):
        raise SingularDegree("a point has zero total affinity")
    inv_sqrt = 1.0 / np.sqrt(degree)
    lap = -a * inv_sqrt[:, None] * inv_sqrt[None, :]
    lap[np.diag_indices_from(lap)] += 1.0
    return (lap + lap.T) / 2.0


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Renumber clusters 0, 1, ... in order of first appearance."""
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    mapping = {int(labels[first[o]]): rank for rank, o in enumerate(order)}
    return np.array([mapping[int(l)] for l in labels], dtype=np.int64)


def kmeans(points: np.ndarray, k: int, max_iter: int = 100) -> np.ndarray:
    """Lloyd's algorithm seeded by farthest-point traversal from point 0."""
    pts = np.asarray(points, dtype=float)
    centers = [pts[0]]
    dist = np.sum((pts - pts[0]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        centers.append(pts[nxt])
        dist = np.minimum(dist, np.sum((pts - pts[nxt]) ** 2, axis=1))
    c = np.array(centers)
    labels = np.full(pts.shape[0], -1)
    for _ in range(max_iter):
        d2 = np.sum((pts[:, None, :] - c[None, :, :]) ** 2, axis=2)
        new = np.argmin(d2, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = pts[labels == j]
            if members.size:
                c[j] = members.mean(axis=0)
    return labels


def spectral_cluster(
    values: Sequence[float] | np.ndarray, k: int = 2, bandwidth: float | None = None
) -> ClusterAssignment:
    v = np.asarray(values, dtype=float)
    if k < 2 or v.size < k:
        raise DataError(f"spectral clustering needs n >= k >= 2 (n={v.size}, k={k})")
    bw = default_bandwidth(v) if bandwidth is None else bandwidth
    lap = normalized_laplacian(build_affinity(v, bw))
    _, vecs = scipy.linalg.eigh(lap, subset_by_index=[0, k - 1])
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    embedding = vecs / np.where(norms > 0, norms, 1.0)
    return ClusterAssignment(_relabel(kmeans(embedding, k)))


def agglomerative_cluster(values: Sequence[float] | np.ndarray, k: int = 2) -> ClusterAssignment:
    """Greedy bottom-up single-linkage merging down to ``k`` clusters.

    Clusters are named by their lowest member index; among equally close
    pairs the lexicographically lowest pair of names merges first.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if k < 1 or n < k:
        raise DataError(f"agglomerative clustering needs n >= k >= 1 (n={n}, k={k})")
    rep = np.arange(n)
    dist = np.abs(v[:, None] - v[None, :])
    np.fill_diagonal(dist, np.inf)
    for _ in range(n - k):
        # row-major argmin of a symmetric matrix is the lowest (i, j) with i < j
        i, j = divmod(int(np.argmin(dist)), n)
        merged = np.minimum(dist[i], dist[j])
        dist[i, :] = merged
        dist[:, i] = merged
        dist[i, i] = np.inf
        dist[j, :] = np.inf
        dist[:, j] = np.inf
        rep[rep == j] = i
    return ClusterAssignment(_relabel(rep))


def _population_std(v: np.ndarray) -> float:
    return float(np.std(v))


def _noise_positions(
    level: np.ndarray, start: int, stop: int, labels: np.ndarray, config: PipelineConfig
) -> np.ndarray:
    """Window positions (absolute) of the noise cluster that should be blanked."""
    w = level[start:stop]
    if np.unique(labels).size < 2:
        return np.empty(0, dtype=np.int64)
    med = float(np.median(w))
    centroids = np.array([w[labels == c].mean() for c in (0, 1)])
    dev = np.abs(centroids - med)
    if dev[0] == dev[1]:
        return np.empty(0, dtype=np.int64)
    noise = int(np.argmax(dev))
    is_noise = labels == noise
    if is_noise.sum() * 2 >= w.size:
        return np.empty(0, dtype=np.int64)
    noise_vals, signal_vals = w[is_noise], w[~is_noise]
    gap = float(np.min(np.abs(noise_vals[:, None] - signal_vals[None, :])))
    if not gap > config.cluster_gap_factor * float(np.std(signal_vals)):
        return np.empty(0, dtype=np.int64)

    signal_c, noise_c = centroids[1 - noise], centroids[noise]

    def noise_like(pos: int) -> bool:
        return abs(level[pos] - noise_c) < abs(level[pos] - signal_c)

    removed: list[int] = []
    pos = np.flatnonzero(is_noise) + start
    breaks = np.flatnonzero(np.diff(pos) != 1) + 1
    for run in np.split(pos, breaks):
        lo, hi = int(run[0]), int(run[-1])
        # a run touching the window edge is measured across it
        if lo == start:
            while lo > 0 and hi - lo + 1 < config.cluster_min_run and noise_like(lo - 1):
                lo -= 1
        if hi == stop - 1:
            while hi + 1 < level.size and hi - lo + 1 < config.cluster_min_run and noise_like(hi + 1):
                hi += 1
        if hi - lo + 1 < config.cluster_min_run:
            removed.extend(run.tolist())
    return np.array(removed, dtype=np.int64)


def cluster_windows(trace: Trace, config: PipelineConfig | None = None) -> list[WindowDecision]:
    """Cluster every window of ``trace`` and decide which samples are noise."""
    config = config or PipelineConfig()
    if not trace.is_filled:
        raise NotFilled("hybrid clustering needs a fully repaired trace")
    level = trace.level
    n = level.size
    selector = HybridSelector(config.cluster_threshold_T, config.cluster_tie_method)
    decisions = []
    for start in range(0, n, config.cluster_window_step):
        stop = min(start + config.cluster_window, n)
        w = level[start:stop]
        sigma = _population_std(w)
        method = selector.method(sigma)
        removed: tuple[int, ...] = ()
        if w.size >= 2 and np.unique(w).size >= 2:
            if method == SPECTRAL:
                labels = spectral_cluster(w, 2).labels
            else:
                labels = agglomerative_cluster(w, 2).labels
            removed = tuple(_noise_positions(level, start, stop, labels, config).tolist())
        decisions.append(WindowDecision(start, stop, sigma, method, removed))
        if stop == n:
            break
    return decisions


def hybrid_cluster_denoise(trace: Trace, config: PipelineConfig | None = None) -> Trace:
    decisions = cluster_windows(trace, config)
    removed = [p for d in decisions for p in d.removed]
    if not removed:
        return trace
    level = trace.level.copy()
    level[removed] = np.nan
    if np.isnan(level).all():
        return trace
    return extrapolate_midpoint(interpolate_linear(trace.with_levels(level), strict=False))
