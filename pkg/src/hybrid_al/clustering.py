"""K-means (k-means++ seeding + Lloyd iterations) and distance-to-centroid ranking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError


@dataclass(frozen=True, eq=False)
class Clustering:
    centroids: np.ndarray  # (K, d)
    assignments: np.ndarray  # (n,)
    distances: np.ndarray  # (n,) Euclidean distance to the assigned centroid
    inertia: float
    n_iter: int = 0
    # Inertia after every assignment step, first entry from the seeded centroids.
    inertia_history: list[float] = field(default_factory=list)


def _sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return (diff * diff).sum(axis=2)


def kmeans_plus_plus(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding.

    The first center is ``rng.integers(n)``. Each further center takes one
    ``rng.random()`` draw ``u`` and picks the first index whose cumulative
    squared distance exceeds ``u * total``; if every point already coincides
    with a center it falls back to ``rng.integers(n)``.
    """
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    closest = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = closest.sum()
        if total > 0.0:
            u = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), u, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers.append(idx)
        closest = np.minimum(closest, ((X - X[idx]) ** 2).sum(axis=1))
    return X[centers].copy()


def _assign(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = _sq_distances(X, C)
    labels = d2.argmin(axis=1)  # first minimum -> lower cluster index wins ties
    return labels, d2[np.arange(len(X)), labels]


def _update(X: np.ndarray, labels: np.ndarray, C: np.ndarray, d2: np.ndarray) -> np.ndarray:
    K, d = C.shape
    sums = np.zeros((K, d))
    np.add.at(sums, labels, X)  # sequential accumulation in id order
    counts = np.bincount(labels, minlength=K)
    new = C.copy()
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]
    # Re-seed each empty cluster at the point farthest from its own centroid.
    d2 = d2.copy()
    for k in np.flatnonzero(~filled):
        far = int(np.argmax(d2))
        new[k] = X[far]
        d2[far] = 0.0
    return new


def kmeans_fit(points, K: int, seed: int, max_iter: int = 100, tol: float = 1e-6) -> Clustering:
    """Lloyd's algorithm from a seeded k-means++ start.

    Stops once no centroid coordinate moves by ``tol`` or more, or after
    ``max_iter`` centroid updates.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 1:
        raise DataError(f"points must be an n x d matrix with d >= 1, got shape {X.shape}")
    n = X.shape[0]
    if K < 1 or K > n:
        raise ConfigurationError(f"K must lie in [1, {n}], got {K}")
    if max_iter < 1:
        raise ConfigurationError("max_iter must be positive")
    if not np.all(np.isfinite(X)):
        raise DataError("points contain non-finite values")

    C = kmeans_plus_plus(X, K, np.random.default_rng(seed))
    labels, d2 = _assign(X, C)
    history = [float(d2.sum())]
    it = 0
    while it < max_iter:
        new = _update(X, labels, C, d2)
        shift = float(np.abs(new - C).max())
        C = new
        labels, d2 = _assign(X, C)
        history.append(float(d2.sum()))
        it += 1
        if shift < tol:
            break
    return Clustering(
        centroids=C,
        assignments=labels,
        distances=np.sqrt(d2),
        inertia=float(d2.sum()),
        n_iter=it,
        inertia_history=history,
    )


def diversity_rank(points, ids, K: int, seed: int, **kmeans_kw) -> np.ndarray:
    """Ids ordered by distance to their own k-means centroid, farthest first.

    Ties go to the lower id. Distances agreeing to within 1e-9 of the largest
    distance count as ties, so symmetric clusters (two points either side of
    their mean) rank by id rather than by rounding noise. Returns a
    permutation of ``ids``.
    """
    ids = np.asarray(ids, dtype=np.int64)
    X = np.asarray(points, dtype=np.float64)
    if len(ids) != len(X):
        raise ConfigurationError(f"{len(ids)} ids but {len(X)} points")
    if len(ids) == 0:
        return ids
    fit = kmeans_fit(X, K, seed, **kmeans_kw)
    return ids[np.lexsort((ids, -tie_key(fit.distances)))]


def tie_key(distances: np.ndarray, resolution: float = 1e-9) -> np.ndarray:
    """Distances on an integer grid relative to the largest one."""
    top = float(distances.max()) if len(distances) else 0.0
    if top == 0.0:
        return np.zeros(len(distances))
    return np.rint(distances / top / resolution)
