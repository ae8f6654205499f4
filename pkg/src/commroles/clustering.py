"""k-means clustering of measure vectors with Davies-Bouldin model selection.

Lloyd iterations from k-means++ seeding, multiple restarts, deterministic
for a given seed.  Empty clusters are repaired by re-seeding with the point
farthest from its assigned centroid.  The k sweep evaluates every k in a
range and keeps the partition with the lowest Davies-Bouldin index.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import DataError
from .seeding import STREAM_KMEANS, rng_from


@dataclass(frozen=True)
class ClusteringConfig:
    k_min: int = 2
    k_max: int = 15
    seed: int = 0
    max_iterations: int = 300
    tolerance: float = 1e-6
    restarts: int = 8
    standardize: bool = False  # optional global rescaling before clustering

    def __post_init__(self):
        if not 2 <= self.k_min <= self.k_max:
            raise ValueError("need 2 <= k_min <= k_max")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be >= 1")


@dataclass
class ClusterResult:
    assignment: np.ndarray
    centroids: np.ndarray
    inertia: float
    db_index: float | None
    inertia_history: list[float] = field(default_factory=list)


def _standardized(points: np.ndarray) -> np.ndarray:
    mu = points.mean(axis=0)
    sd = points.std(axis=0)
    sd = np.where(sd == 0, 1.0, sd)
    return (points - mu) / sd


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n, d = points.shape
    centers = np.empty((k, d), dtype=np.float64)
    centers[0] = points[int(rng.integers(n))]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0:
            # all mass on already-chosen positions; fall back to first unused
            centers[j] = points[int(np.argmax(d2))]
        else:
            target = rng.random() * total
            i = int(np.searchsorted(np.cumsum(d2), target))
            centers[j] = points[min(i, n - 1)]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, k: int, centers: np.ndarray,
           max_iterations: int, tolerance: float) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    n, d = points.shape
    x_sq = (points ** 2).sum(axis=1)
    labels = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    prev_inertia = np.inf

    for _ in range(max_iterations):
        dist = x_sq[:, None] - 2.0 * (points @ centers.T) + (centers ** 2).sum(axis=1)[None, :]
        new_labels = np.argmin(dist, axis=1)

        counts = np.bincount(new_labels, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            # farthest-point re-seeding, deterministic order
            dcur = dist[np.arange(n), new_labels]
            order = np.argsort(-dcur, kind="stable")
            ptr = 0
            for c in empties:
                while counts[new_labels[order[ptr]]] <= 1:
                    ptr += 1
                cand = order[ptr]
                ptr += 1
                counts[new_labels[cand]] -= 1
                new_labels[cand] = c
                counts[c] += 1

        sums = np.empty((k, d), dtype=np.float64)
        for j in range(d):
            sums[:, j] = np.bincount(new_labels, weights=points[:, j], minlength=k)
        centers = sums / counts[:, None]

        inertia = float(((points - centers[new_labels]) ** 2).sum())
        history.append(inertia)
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break
        if prev_inertia - inertia <= tolerance * max(prev_inertia, 1.0) and np.isfinite(prev_inertia):
            break
        prev_inertia = inertia
    return labels, centers, history[-1], history


def kmeans(points: np.ndarray, k: int, cfg: ClusteringConfig | None = None) -> ClusterResult:
    """Best of `cfg.restarts` k-means++ runs, judged by inertia.

    Requires k distinct points.  Deterministic for a given (seed, k).
    """
    if cfg is None:
        cfg = ClusteringConfig()
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if cfg.standardize:
        points = _standardized(points)
    n = len(points)
    if k < 1:
        raise DataError("k must be >= 1")
    distinct = len(np.unique(points, axis=0))
    if k > distinct:
        raise DataError(f"k={k} exceeds the {distinct} distinct points")

    best: ClusterResult | None = None
    for r in range(cfg.restarts):
        rng = rng_from(cfg.seed, STREAM_KMEANS, k, r)
        centers0 = _kmeanspp_init(points, k, rng)
        labels, centers, inertia, history = _lloyd(
            points, k, centers0, cfg.max_iterations, cfg.tolerance)
        if best is None or inertia < best.inertia:
            best = ClusterResult(assignment=labels, centroids=centers,
                                 inertia=inertia, db_index=None,
                                 inertia_history=history)
    assert best is not None
    if k >= 2:
        best.db_index = davies_bouldin(points, best.assignment)
    return best


def davies_bouldin(points: np.ndarray, assignment: np.ndarray) -> float:
    """DB = mean over clusters of the worst (s_i + s_j) / ||c_i - c_j||.

    s_i is the mean distance of cluster i's points to its centroid.  Lower
    is better.  Raises on fewer than 2 clusters, empty clusters, or
    coincident centroids.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    labels = np.asarray(assignment, dtype=np.int64)
    if labels.min(initial=0) < 0:
        raise DataError("negative cluster label")
    k = int(labels.max()) + 1 if len(labels) else 0
    if k < 2:
        raise DataError("Davies-Bouldin requires at least 2 clusters")
    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        raise DataError(f"empty cluster {int(np.flatnonzero(counts == 0)[0])}")

    d = points.shape[1]
    sums = np.empty((k, d), dtype=np.float64)
    for j in range(d):
        sums[:, j] = np.bincount(labels, weights=points[:, j], minlength=k)
    centroids = sums / counts[:, None]

    dists = np.sqrt(((points - centroids[labels]) ** 2).sum(axis=1))
    scatter = np.bincount(labels, weights=dists, minlength=k) / counts

    diff = centroids[:, None, :] - centroids[None, :, :]
    sep = np.sqrt((diff ** 2).sum(axis=2))
    off = ~np.eye(k, dtype=bool)
    if (sep[off] == 0).any():
        raise DataError("coincident centroids make the index undefined")

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (scatter[:, None] + scatter[None, :]) / sep
    ratio[~off] = -np.inf
    return float(np.max(ratio, axis=1).mean())


def sweep_k(points: np.ndarray, cfg: ClusteringConfig | None = None,
            threads: int = 1) -> list[tuple[int, ClusterResult]]:
    """Run kmeans for every k in [k_min, k_max]; per-k jobs may run
    concurrently, results are deterministic either way."""
    if cfg is None:
        cfg = ClusteringConfig()
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    distinct = len(np.unique(points, axis=0))
    if cfg.k_max > distinct:
        raise DataError(f"k_max={cfg.k_max} exceeds the {distinct} distinct points")
    ks = list(range(cfg.k_min, cfg.k_max + 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda k: kmeans(points, k, cfg), ks))
    else:
        results = [kmeans(points, k, cfg) for k in ks]
    return list(zip(ks, results))


def _pick_best(results: list[tuple[int, ClusterResult]]) -> tuple[int, ClusterResult]:
    best_k, best = None, None
    for k, res in results:  # ascending k: strict < ties toward smaller k
        if best is None or res.db_index < best.db_index:
            best_k, best = k, res
    assert best_k is not None
    return best_k, best


def select_k(points: np.ndarray, cfg: ClusteringConfig | None = None,
             threads: int = 1) -> tuple[int, ClusterResult]:
    """k in [k_min, k_max] minimizing the Davies-Bouldin index; ties go to
    the smaller k."""
    return _pick_best(sweep_k(points, cfg, threads))
