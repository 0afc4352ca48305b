"""Sample pool and its labeled/unlabeled partition.

A :class:`Pool` is immutable; every mutation returns a new pool that shares
the (read-only) feature matrix and the audited label store with its parent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DataError, InvariantViolation, LabelAccessError


def round_half_up(fraction: float, n: int) -> int:
    """round(fraction * n) with halves rounded up, computed in decimal.

    Binary floating point turns 0.05 * 73257 into 3662.8500000000004, which is
    harmless here, but exact halves like 0.5 * 5 must not fall to banker's
    rounding.
    """
    return int((Decimal(repr(float(fraction))) * n).quantize(Decimal(1), rounding=ROUND_HALF_UP))


class LabelStore:
    """Ground-truth labels behind an access log.

    Every read is recorded together with whether the id was labeled at the
    time. Reading an unlabeled id is logged and then refused, so after a run
    ``unlabeled_reads`` must be empty.
    """

    def __init__(self, labels: np.ndarray):
        labels = np.array(labels, dtype=np.int64)
        labels.setflags(write=False)
        self._labels = labels
        self.read_count = 0
        self.unlabeled_reads: list[int] = []

    def __len__(self) -> int:
        return len(self._labels)

    def reveal(self, ids: np.ndarray, labeled: frozenset[int]) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        bad = [int(i) for i in ids if int(i) not in labeled]
        self.read_count += len(ids)
        if bad:
            self.unlabeled_reads.extend(bad)
            raise LabelAccessError(f"label requested for unlabeled id {bad[0]}")
        return self._labels[ids].copy()

    def class_partition(self) -> list[np.ndarray]:
        # Setup-time only: the stratified initial split needs every label.
        num = int(self._labels.max()) + 1 if len(self._labels) else 0
        return [np.flatnonzero(self._labels == c) for c in range(num)]


@dataclass(frozen=True, eq=False)
class Pool:
    """Feature matrix plus an ordered labeled/unlabeled partition of ids 0..n-1."""

    features: np.ndarray
    labels: LabelStore = field(repr=False)
    num_classes: int
    labeled_ids: tuple[int, ...] = ()
    unlabeled_ids: tuple[int, ...] = ()

    @classmethod
    def from_arrays(cls, features, labels, num_classes: int | None = None) -> "Pool":
        """All samples start unlabeled."""
        X = np.array(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        if len(y) != len(X):
            raise DataError(f"{len(X)} feature rows but {len(y)} labels")
        if num_classes is None:
            num_classes = int(y.max()) + 1 if len(y) else 0
        if num_classes < 2:
            raise ConfigurationError(f"need at least 2 classes, got {num_classes}")
        if len(y) and (y.min() < 0 or y.max() >= num_classes):
            raise DataError(f"labels must lie in [0, {num_classes})")
        X.setflags(write=False)
        return cls(X, LabelStore(y), int(num_classes), (), tuple(range(len(X))))

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def labeled_set(self) -> frozenset[int]:
        return frozenset(self.labeled_ids)

    def labels_of(self, ids: Iterable[int]) -> np.ndarray:
        """Audited label lookup; only labeled ids may be read."""
        return self.labels.reveal(np.fromiter(ids, dtype=np.int64), self.labeled_set())

    def check_partition(self) -> None:
        lab, unl = set(self.labeled_ids), set(self.unlabeled_ids)
        if len(lab) != len(self.labeled_ids) or len(unl) != len(self.unlabeled_ids):
            raise InvariantViolation("duplicate id in partition")
        if lab & unl:
            raise InvariantViolation(f"id {min(lab & unl)} is both labeled and unlabeled")
        if lab | unl != set(range(self.size)):
            raise InvariantViolation("partition does not cover ids 0..n-1")


def split_initial(pool: Pool, init_fraction: float, seed: int, stratified: bool = False) -> Pool:
    """Label round(init_fraction * n) ids drawn uniformly at random under ``seed``."""
    if not 0.0 < init_fraction <= 1.0:
        raise ConfigurationError(f"init_fraction must lie in (0, 1], got {init_fraction}")
    if pool.labeled_ids:
        raise InvariantViolation("split_initial expects a fully unlabeled pool")
    n = pool.size
    k = round_half_up(init_fraction, n)
    if k == 0:
        raise ConfigurationError(f"init_fraction {init_fraction} of {n} samples labels nothing")
    rng = np.random.default_rng(seed)
    if stratified:
        chosen = []
        for members in pool.labels.class_partition():
            take = round_half_up(init_fraction, len(members))
            chosen.extend(rng.permutation(members)[:take].tolist())
    else:
        chosen = rng.permutation(n)[:k].tolist()
    labeled = tuple(sorted(chosen))
    picked = set(labeled)
    unlabeled = tuple(i for i in range(n) if i not in picked)
    return replace(pool, labeled_ids=labeled, unlabeled_ids=unlabeled)


def move_to_labeled(pool: Pool, ids: Sequence[int]) -> Pool:
    """Annotate ``ids``: remove them from the unlabeled set and append to the labeled one."""
    ids = [int(i) for i in ids]
    if not ids:
        return pool
    seen: set[int] = set()
    unlabeled = set(pool.unlabeled_ids)
    for i in ids:
        if i in seen:
            raise InvariantViolation(f"duplicate id {i} in batch")
        if i not in unlabeled:
            state = "already labeled" if 0 <= i < pool.size else "unknown"
            raise InvariantViolation(f"id {i} is {state}")
        seen.add(i)
    return replace(
        pool,
        labeled_ids=pool.labeled_ids + tuple(ids),
        unlabeled_ids=tuple(i for i in pool.unlabeled_ids if i not in seen),
    )


def labeled_view(pool: Pool) -> tuple[np.ndarray, np.ndarray]:
    """(features, labels) of the labeled set, rows in ascending id order."""
    ids = np.array(sorted(pool.labeled_ids), dtype=np.int64)
    X = pool.features[ids] if len(ids) else np.empty((0, pool.dim))
    return X, pool.labels_of(ids)


def unlabeled_view(pool: Pool) -> tuple[np.ndarray, np.ndarray]:
    """(ids, features) of the unlabeled set, rows in ascending id order."""
    ids = np.array(sorted(pool.unlabeled_ids), dtype=np.int64)
    X = pool.features[ids] if len(ids) else np.empty((0, pool.dim))
    return ids, X
