"""Batch selection strategies.

Hybrid strategies rank the unlabeled pool by a confidence criterion, keep a
candidate set of ``ceil(m * B)`` ids, then re-rank the candidates by distance
to their k-means centroid and keep the ``B`` farthest:

* HCD  - most confident candidates, diversity re-ranked
* LCD  - least confident candidates, diversity re-ranked
* LCHC - half least confident, half most confident, no clustering
* DSAL - a hard (least confident) and an easy (most confident) stream,
  each diversity re-ranked with its own k-means fit, mixed by ``dsal_ratio``

plus the RANDOM and LC-ONLY baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .clustering import diversity_rank
from .errors import ConfigurationError, ShapeError
from .pool import Pool
from .scoring import least_confidence, max_confidence, rank, validate_probs


class Kind(str, Enum):
    HCD = "HCD"
    LCHC = "LCHC"
    DSAL = "DSAL"
    LCD = "LCD"
    RANDOM = "RANDOM"
    LC_ONLY = "LC-ONLY"


class Tag(str, Enum):
    HIGH_CONF_DIVERSE = "high-conf-diverse"
    LOW_CONF_DIVERSE = "low-conf-diverse"
    HIGH_CONF = "high-conf"
    LOW_CONF = "low-conf"
    RANDOM = "random"


@dataclass(frozen=True)
class StrategyConfig:
    kind: Kind = Kind.LCD
    batch_size: int = 1  # 0 -> filled in by the experiment loop
    candidate_multiplier: float = 2.0
    dsal_ratio: float = 0.5
    n_clusters: int = 0  # 0 -> number of classes
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.batch_size < 0:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.candidate_multiplier >= 1.0:
            raise ConfigurationError(f"candidate_multiplier must be >= 1, got {self.candidate_multiplier}")
        if not 0.0 <= self.dsal_ratio <= 1.0:
            raise ConfigurationError(f"dsal_ratio must lie in [0, 1], got {self.dsal_ratio}")
        if self.n_clusters < 0:
            raise ConfigurationError("n_clusters must be >= 0")


@dataclass
class SelectionBatch:
    ids: list[int]
    provenance: list[Tag]
    scores: list[float]  # stage-1 criterion value of each selected id
    # Per-stream bookkeeping for the run manifest.
    candidate_sizes: list[int] = field(default_factory=list)
    clusters_used: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)


def ceil_count(multiplier: float, count: int) -> int:
    # Round off float noise first: 1.1 * 10 is 11.000000000000002.
    return math.ceil(round(multiplier * count, 9))


def _inputs(pool: Pool, probs, embeddings=None):
    """Unlabeled ids in ascending order with their posterior/embedding rows."""
    ids = np.asarray(pool.unlabeled_ids, dtype=np.int64)
    P = validate_probs(probs) if probs is not None else None
    if P is not None and len(P) != len(ids):
        raise ShapeError(f"{len(P)} posterior rows for {len(ids)} unlabeled ids")
    E = None
    if embeddings is not None:
        E = np.asarray(embeddings, dtype=np.float64)
        if E.ndim != 2 or len(E) != len(ids):
            raise ShapeError(f"embedding shape {E.shape} does not match {len(ids)} unlabeled ids")
    order = np.argsort(ids, kind="stable")
    ids = ids[order]
    if P is not None:
        P = P[order]
    if E is not None:
        E = E[order]
    return ids, P, E


def _budget(cfg: StrategyConfig, available: int) -> int:
    if cfg.batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {cfg.batch_size}")
    return min(cfg.batch_size, available)


def _n_clusters(cfg: StrategyConfig, num_classes: int) -> int:
    return cfg.n_clusters or num_classes


def _diverse_stream(ids, scores, embeddings, take, cfg, num_classes, exclude=(), n_cand=None):
    """Candidate set by ``scores`` then diversity ranking; returns (ranked ids, K, candidates).

    The candidate set holds ``n_cand`` ids (default ``ceil(m * take)``),
    clamped to the pool.

    Ranked ids exclude ``exclude`` and are backfilled from the score ranking
    when exclusions leave fewer than ``take`` ids.
    """
    if take == 0:
        return [], 0, 0
    excluded = set(exclude)
    ranked = rank(ids, scores)
    if n_cand is None:
        n_cand = ceil_count(cfg.candidate_multiplier, take)
    n_cand = min(n_cand, len(ids))
    cand = ranked[:n_cand]
    row_of = {int(i): r for r, i in enumerate(ids)}
    K = min(_n_clusters(cfg, num_classes), n_cand)
    order = diversity_rank(embeddings[[row_of[int(i)] for i in cand]], cand, K, cfg.seed)
    picked = [int(i) for i in order if int(i) not in excluded][:take]
    if len(picked) < take:
        have = excluded | set(picked)
        picked += [int(i) for i in ranked if int(i) not in have][: take - len(picked)]
    return picked, K, n_cand


def _score_lookup(ids, scores):
    return {int(i): float(s) for i, s in zip(ids, scores.scores)}


def _hybrid(pool, probs, embeddings, cfg, criterion, tag):
    ids, P, E = _inputs(pool, probs, embeddings)
    scores = criterion(P)
    B = _budget(cfg, len(ids))
    picked, K, n_cand = _diverse_stream(ids, scores, E, B, cfg, pool.num_classes)
    lookup = _score_lookup(ids, scores)
    return SelectionBatch(
        ids=picked,
        provenance=[tag] * len(picked),
        scores=[lookup[i] for i in picked],
        candidate_sizes=[n_cand],
        clusters_used=[K],
    )


def select_hcd(pool: Pool, probs, embeddings, cfg: StrategyConfig) -> SelectionBatch:
    """Most confident candidates, re-ranked farthest-from-centroid first."""
    return _hybrid(pool, probs, embeddings, cfg, max_confidence, Tag.HIGH_CONF_DIVERSE)


def select_lcd(pool: Pool, probs, embeddings, cfg: StrategyConfig) -> SelectionBatch:
    """Least confident candidates, re-ranked farthest-from-centroid first."""
    return _hybrid(pool, probs, embeddings, cfg, least_confidence, Tag.LOW_CONF_DIVERSE)


def select_lchc(pool: Pool, probs, cfg: StrategyConfig) -> SelectionBatch:
    """ceil(B/2) least confident ids, then floor(B/2) most confident of the rest."""
    ids, P, _ = _inputs(pool, probs)
    B = _budget(cfg, len(ids))
    n_low = (B + 1) // 2
    low_scores, high_scores = least_confidence(P), max_confidence(P)
    low = [int(i) for i in rank(ids, low_scores)[:n_low]]
    taken = set(low)
    high = [int(i) for i in rank(ids, high_scores) if int(i) not in taken][: B - n_low]
    lo, hi = _score_lookup(ids, low_scores), _score_lookup(ids, high_scores)
    return SelectionBatch(
        ids=low + high,
        provenance=[Tag.LOW_CONF] * len(low) + [Tag.HIGH_CONF] * len(high),
        scores=[lo[i] for i in low] + [hi[i] for i in high],
    )


def select_dsal(pool: Pool, probs, embeddings, cfg: StrategyConfig) -> SelectionBatch:
    """Hard-diverse and easy-diverse streams mixed ``dsal_ratio`` : ``1 - dsal_ratio``.

    The hard stream gets ``ceil(ratio * B)`` slots from ``ceil(m * ratio * B)``
    candidates and is drawn first; the easy stream fills the rest from
    ``ceil(m * (1 - ratio) * B)`` candidates, skipping anything the hard
    stream already took.
    """
    ids, P, E = _inputs(pool, probs, embeddings)
    B = _budget(cfg, len(ids))
    n_hard = ceil_count(cfg.dsal_ratio, B)
    n_easy = B - n_hard
    low_scores, high_scores = least_confidence(P), max_confidence(P)
    m, rho = cfg.candidate_multiplier, cfg.dsal_ratio
    hard, k_hard, c_hard = _diverse_stream(
        ids, low_scores, E, n_hard, cfg, pool.num_classes, n_cand=ceil_count(m * rho, B)
    )
    easy, k_easy, c_easy = _diverse_stream(
        ids, high_scores, E, n_easy, cfg, pool.num_classes, exclude=hard,
        n_cand=ceil_count(m * (1.0 - rho), B),
    )
    lo, hi = _score_lookup(ids, low_scores), _score_lookup(ids, high_scores)
    return SelectionBatch(
        ids=hard + easy,
        provenance=[Tag.LOW_CONF_DIVERSE] * len(hard) + [Tag.HIGH_CONF_DIVERSE] * len(easy),
        scores=[lo[i] for i in hard] + [hi[i] for i in easy],
        candidate_sizes=[c_hard, c_easy],
        clusters_used=[k_hard, k_easy],
    )


def select_random(pool: Pool, cfg: StrategyConfig) -> SelectionBatch:
    """Uniform sample without replacement: the first B of a seeded permutation."""
    ids = np.sort(np.asarray(pool.unlabeled_ids, dtype=np.int64))
    B = _budget(cfg, len(ids))
    rng = np.random.default_rng(cfg.seed)
    picked = [int(i) for i in ids[rng.permutation(len(ids))[:B]]]
    return SelectionBatch(ids=picked, provenance=[Tag.RANDOM] * B, scores=[0.0] * B)


def select_lc_only(pool: Pool, probs, cfg: StrategyConfig) -> SelectionBatch:
    """Top-B least confident ids."""
    ids, P, _ = _inputs(pool, probs)
    scores = least_confidence(P)
    B = _budget(cfg, len(ids))
    picked = [int(i) for i in rank(ids, scores)[:B]]
    lookup = _score_lookup(ids, scores)
    return SelectionBatch(
        ids=picked, provenance=[Tag.LOW_CONF] * B, scores=[lookup[i] for i in picked]
    )


def select(pool: Pool, probs, embeddings, cfg: StrategyConfig) -> SelectionBatch:
    """Dispatch on ``cfg.kind``."""
    kind = cfg.kind
    if kind is Kind.HCD:
        return select_hcd(pool, probs, embeddings, cfg)
    if kind is Kind.LCD:
        return select_lcd(pool, probs, embeddings, cfg)
    if kind is Kind.DSAL:
        return select_dsal(pool, probs, embeddings, cfg)
    if kind is Kind.LCHC:
        return select_lchc(pool, probs, cfg)
    if kind is Kind.LC_ONLY:
        return select_lc_only(pool, probs, cfg)
    return select_random(pool, cfg)
