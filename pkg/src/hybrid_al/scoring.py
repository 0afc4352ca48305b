"""Confidence scores computed from model posteriors, and ranking by score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, MalformedPosteriorError

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ScoreVector:
    scores: np.ndarray
    higher_is_selected: bool = True

    def __len__(self) -> int:
        return len(self.scores)


def validate_probs(probs) -> np.ndarray:
    """Return ``probs`` as a float matrix, raising if any row is not a distribution.

    Rows are never renormalized: a learner that emits bad posteriors should
    fail loudly here.
    """
    P = np.asarray(probs, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] < 1:
        raise MalformedPosteriorError(f"expected an n x C matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise MalformedPosteriorError("posterior contains non-finite entries")
    if P.size and (P.min() < 0.0 or P.max() > 1.0):
        raise MalformedPosteriorError("posterior entries must lie in [0, 1]")
    bad = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_TOL)
    if len(bad):
        raise MalformedPosteriorError(f"row {bad[0]} sums to {P[bad[0]].sum()!r}, not 1")
    return P


def max_confidence(probs) -> ScoreVector:
    """Largest class posterior per row; confident samples score high."""
    P = validate_probs(probs)
    return ScoreVector(P.max(axis=1), higher_is_selected=True)


def least_confidence(probs) -> ScoreVector:
    """1 - largest class posterior per row; uncertain samples score high."""
    P = validate_probs(probs)
    return ScoreVector(1.0 - P.max(axis=1), higher_is_selected=True)


def rank(ids, scores: ScoreVector) -> np.ndarray:
    """All ids sorted best-first by score, ties broken by ascending id."""
    ids = np.asarray(ids, dtype=np.int64)
    s = np.asarray(scores.scores, dtype=np.float64)
    if len(ids) != len(s):
        raise ConfigurationError(f"{len(ids)} ids but {len(s)} scores")
    if not np.all(np.isfinite(s)):
        raise ConfigurationError("scores must be finite")
    # lexsort sorts by the last key first; negate for descending order.
    primary = -s if scores.higher_is_selected else s
    return ids[np.lexsort((ids, primary))]


def top_k(ids, scores: ScoreVector, k: int) -> np.ndarray:
    """The best ``min(k, n)`` ids in score order."""
    if k < 1:
        raise ConfigurationError(f"k must be positive, got {k}")
    return rank(ids, scores)[:k]
