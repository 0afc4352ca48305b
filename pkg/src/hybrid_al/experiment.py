"""The active-learning loop and the multi-run drivers built on it.

One run: carve off a test split, label a random initial fraction of the
pool, then repeat train -> score -> select -> annotate, recording test
accuracy after every retraining (iteration 0 is the initial model).
"""

from __future__ import annotations

import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, to_values, values_from_json, with_seed, with_strategy
from .data import load_dataset
from .errors import ConfigurationError, DivergenceError, InvariantViolation
from .learner import Model, embed, evaluate, predict_proba, train
from .pool import Pool, labeled_view, move_to_labeled, round_half_up, split_initial, unlabeled_view
from .strategies import Kind, SelectionBatch, select

logger = logging.getLogger(__name__)


def derive_seed(master_seed: int, iteration: int, purpose: str) -> int:
    """Independent 63-bit seed for one (iteration, purpose) stream of a run."""
    key = [int(master_seed) & (2**64 - 1), int(iteration), zlib.crc32(purpose.encode())]
    return int(np.random.SeedSequence(key).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class CurvePoint:
    iteration: int
    labeled_count: int
    labeled_fraction: float
    test_accuracy: float
    wall_time: float = 0.0


@dataclass
class LearningCurve:
    strategy: str
    seed: int
    points: list[CurvePoint] = field(default_factory=list)

    def fractions(self) -> np.ndarray:
        return np.array([p.labeled_fraction for p in self.points])

    def accuracies(self) -> np.ndarray:
        return np.array([p.test_accuracy for p in self.points])


@dataclass
class RunManifest:
    """Everything needed to repeat a run, plus what it did per iteration."""

    config: RunConfig
    version: str = __version__
    pool_size: int = 0
    test_size: int = 0
    num_classes: int = 0
    feature_dim: int = 0
    batch_size: int = 0
    embedding_space: str = ""
    optimizer: str = "sgd"
    seeds: dict[str, int] = field(default_factory=dict)
    iterations: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": to_values(self.config),
            "version": self.version,
            "pool_size": self.pool_size,
            "test_size": self.test_size,
            "num_classes": self.num_classes,
            "feature_dim": self.feature_dim,
            "batch_size": self.batch_size,
            "embedding_space": self.embedding_space,
            "optimizer": self.optimizer,
            "seeds": dict(self.seeds),
            "iterations": [dict(it) for it in self.iterations],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunManifest":
        fields_ = dict(data)
        fields_["config"] = values_from_json(data["config"])
        return cls(**fields_)


@dataclass
class RunResult:
    curve: LearningCurve
    manifest: RunManifest
    model: Model
    pool: Pool
    last_batch: SelectionBatch | None


def auc(fractions, accuracies) -> float:
    """Trapezoidal area under accuracy vs. labeled fraction."""
    x = np.asarray(fractions, dtype=float)
    y = np.asarray(accuracies, dtype=float)
    if len(x) < 2:
        return 0.0
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


def accuracy_at(curve: LearningCurve, fraction: float) -> float:
    """Test accuracy at ``fraction`` labeled, linearly interpolated between points."""
    x, y = curve.fractions(), curve.accuracies()
    if not x[0] <= fraction <= x[-1]:
        raise ValueError(f"fraction {fraction} outside the curve's range [{x[0]}, {x[-1]}]")
    return float(np.interp(fraction, x, y))


def _fit(pool: Pool, cfg: RunConfig, iteration: int, previous: Model | None) -> tuple[Model, int]:
    seed = derive_seed(cfg.master_seed, iteration, "learner")
    X, y = labeled_view(pool)
    model = train(X, y, replace(cfg.learner, seed=seed), num_classes=pool.num_classes, init=previous)
    return model, seed


Observer = Callable[[int, Pool, "SelectionBatch | None"], None]


def execute(cfg: RunConfig, on_iteration: Observer | None = None) -> RunResult:
    """Run the full loop for one configuration.

    ``on_iteration(iteration, pool, batch)`` is called after each curve point
    (``batch`` is None for iteration 0). On divergence the raised :class:`DivergenceError` carries the curve
    recorded so far in ``partial_curve``.
    """
    data = load_dataset(cfg.dataset)
    N = len(data)
    seeds = {
        "test_split": derive_seed(cfg.master_seed, 0, "test-split"),
        "init_split": derive_seed(cfg.master_seed, 0, "init-split"),
    }
    n_test = round_half_up(cfg.test_fraction, N)
    if n_test == 0 or n_test >= N:
        raise ConfigurationError(f"test_fraction {cfg.test_fraction} of {N} samples leaves no test or pool data")
    perm = np.random.default_rng(seeds["test_split"]).permutation(N)
    test_rows, pool_rows = np.sort(perm[:n_test]), np.sort(perm[n_test:])
    test = Pool.from_arrays(data.features[test_rows], data.labels[test_rows], data.num_classes)
    test = replace(test, labeled_ids=test.unlabeled_ids, unlabeled_ids=())
    X_test, y_test = labeled_view(test)

    pool = Pool.from_arrays(data.features[pool_rows], data.labels[pool_rows], data.num_classes)
    n = pool.size
    pool = split_initial(pool, cfg.init_fraction, seeds["init_split"], stratified=cfg.stratified_init)
    B = cfg.strategy.batch_size or round_half_up(cfg.batch_fraction, n)
    if B < 1:
        raise ConfigurationError(f"batch_fraction {cfg.batch_fraction} of {n} samples selects nothing")
    budget = round_half_up(cfg.label_budget_fraction, n)

    manifest = RunManifest(
        config=cfg,
        pool_size=n,
        test_size=n_test,
        num_classes=data.num_classes,
        feature_dim=pool.dim,
        batch_size=B,
        embedding_space="standardized-input" if cfg.learner.hidden_dim == 0 else "hidden-relu",
        seeds=seeds,
    )
    curve = LearningCurve(strategy=cfg.label, seed=cfg.master_seed)

    def record(iteration, model, started, extra):
        elapsed = time.perf_counter() - started if cfg.record_wall_time else 0.0
        count = len(pool.labeled_ids)
        acc = evaluate(model, X_test, y_test)
        curve.points.append(CurvePoint(iteration, count, count / n, acc, elapsed))
        manifest.iterations.append({"iteration": iteration, "labeled_count": count,
                                    "wall_time_s": elapsed, **extra})
        logger.info("%s seed=%d iter=%d labeled=%d acc=%.4f",
                    curve.strategy, cfg.master_seed, iteration, count, acc)

    model: Model | None = None
    batch: SelectionBatch | None = None
    iteration = 0
    try:
        started = time.perf_counter()
        model, lseed = _fit(pool, cfg, 0, None)
        record(0, model, started, {"learner_seed": lseed})
        if on_iteration:
            on_iteration(0, pool, None)
        while (pool.unlabeled_ids
               and (cfg.max_iterations == 0 or iteration < cfg.max_iterations)
               and len(pool.labeled_ids) < budget):
            iteration += 1
            started = time.perf_counter()
            take = min(B, budget - len(pool.labeled_ids))
            purpose = "random" if cfg.strategy.kind is Kind.RANDOM else "kmeans"
            sseed = derive_seed(cfg.master_seed, iteration, purpose)
            _, X_u = unlabeled_view(pool)
            scfg = replace(cfg.strategy, batch_size=take, seed=sseed)
            batch = select(pool, predict_proba(model, X_u), embed(model, X_u), scfg)
            if len(batch) != min(take, len(X_u)):
                raise InvariantViolation(f"iteration {iteration}: batch of {len(batch)} for budget {take}")
            pool = move_to_labeled(pool, batch.ids)
            pool.check_partition()
            model, lseed = _fit(pool, cfg, iteration, model if cfg.learner.warm_start else None)
            record(iteration, model, started, {
                "learner_seed": lseed,
                "selection_seed": sseed,
                "batch_size": len(batch),
                "candidate_sizes": list(batch.candidate_sizes),
                "clusters_used": list(batch.clusters_used),
            })
            if on_iteration:
                on_iteration(iteration, pool, batch)
    except DivergenceError as exc:
        exc.partial_curve = curve
        exc.args = (f"iteration {iteration}: {exc.args[0]}",)
        raise
    return RunResult(curve, manifest, model, pool, batch)


def run_active_learning(cfg: RunConfig) -> tuple[LearningCurve, RunManifest]:
    result = execute(cfg)
    return result.curve, result.manifest


@dataclass
class ComparisonRow:
    label: str
    iterations: list[int]
    labeled_fraction: list[float]
    mean_accuracy: list[float]
    std_accuracy: list[float]
    auc_mean: float
    auc_std: float
    curves: list[LearningCurve]


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow]
    seeds: list[int]
    manifests: list[list[RunManifest]] = field(default_factory=list)

    def row(self, label: str) -> ComparisonRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def _run_pair(cfg: RunConfig) -> tuple[LearningCurve, RunManifest]:
    return run_active_learning(cfg)


def summarize(label: str, curves: Sequence[LearningCurve]) -> ComparisonRow:
    """Per-iteration mean and (population) standard deviation across runs."""
    length = min(len(c.points) for c in curves)
    acc = np.array([[p.test_accuracy for p in c.points[:length]] for c in curves])
    aucs = np.array([auc(c.fractions(), c.accuracies()) for c in curves])
    first = curves[0].points[:length]
    return ComparisonRow(
        label=label,
        iterations=[p.iteration for p in first],
        labeled_fraction=[p.labeled_fraction for p in first],
        mean_accuracy=acc.mean(axis=0).tolist(),
        std_accuracy=acc.std(axis=0).tolist(),
        auc_mean=float(aucs.mean()),
        auc_std=float(aucs.std()),
        curves=list(curves),
    )


def compare(cfgs: Sequence[RunConfig], seeds: Sequence[int], jobs: int = 1) -> ComparisonTable:
    """Run every configuration under every seed; one table row per configuration."""
    if not cfgs or not seeds:
        raise ConfigurationError("compare needs at least one configuration and one seed")
    if any(c.dataset != cfgs[0].dataset for c in cfgs[1:]):
        raise ConfigurationError("all compared configurations must use the same dataset")
    tasks = [with_seed(c, s) for c in cfgs for s in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_pair, tasks))
    else:
        results = [_run_pair(t) for t in tasks]
    rows, manifests = [], []
    k = len(seeds)
    for i, cfg in enumerate(cfgs):
        chunk = results[i * k:(i + 1) * k]
        rows.append(summarize(cfg.label, [c for c, _ in chunk]))
        manifests.append([m for _, m in chunk])
    return ComparisonTable(rows, [int(s) for s in seeds], manifests)


def ablate_dsal(base: RunConfig, ratios: Sequence[float], seeds: Sequence[int], jobs: int = 1) -> ComparisonTable:
    """DSAL at each hard:easy ratio; one row per ratio."""
    for r in ratios:
        if not 0.0 <= r <= 1.0:
            raise ConfigurationError(f"DSAL ratio must lie in [0, 1], got {r}")
    cfgs = [with_strategy(replace(base, name=""), kind=Kind.DSAL, dsal_ratio=float(r)) for r in ratios]
    return compare(cfgs, seeds, jobs)
