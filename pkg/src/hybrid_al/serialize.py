"""File formats for curves, manifests, embeddings and comparison tables.

All writers are deterministic: floats use Python's shortest round-trip repr,
JSON keys are sorted, and lines end in ``\\n``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataError, HybridALError
from .experiment import ComparisonTable, CurvePoint, LearningCurve, RunManifest
from .learner import Model, embed
from .pool import Pool

CURVE_COLUMNS = ["iteration", "labeled_count", "labeled_fraction", "test_accuracy", "wall_time_s"]


class OutputError(HybridALError, OSError):
    pass


def _open_for_write(path):
    path = Path(path)
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _f(x) -> str:
    return repr(float(x))


def write_curve(curve: LearningCurve, path) -> None:
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for p in curve.points:
            w.writerow([p.iteration, p.labeled_count, _f(p.labeled_fraction),
                        _f(p.test_accuracy), _f(p.wall_time)])


def read_curve(path, strategy: str = "", seed: int = 0) -> LearningCurve:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CURVE_COLUMNS:
        raise DataError(f"{path} is not a learning-curve CSV")
    points = [CurvePoint(int(r[0]), int(r[1]), float(r[2]), float(r[3]), float(r[4])) for r in rows[1:]]
    return LearningCurve(strategy, seed, points)


def manifest_json(manifest: RunManifest) -> str:
    return json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n"


def write_manifest(manifest: RunManifest, path) -> None:
    with _open_for_write(path) as fh:
        fh.write(manifest_json(manifest))


def read_manifest(path) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    return RunManifest.from_dict(data)


def export_embeddings(model: Model, pool: Pool, path, selected=()) -> None:
    """One row per pool sample: ``id,labeled_flag,selected_last_iter_flag,e0..``."""
    ids = np.arange(pool.size)
    E = embed(model, pool.features)
    labeled = pool.labeled_set()
    chosen = set(int(i) for i in selected)
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "labeled_flag", "selected_last_iter_flag"] + [f"e{j}" for j in range(E.shape[1])])
        for i in ids:
            w.writerow([int(i), int(int(i) in labeled), int(int(i) in chosen)] + [_f(v) for v in E[i]])


def write_comparison(table: ComparisonTable, path) -> None:
    """Long format: one line per (strategy, iteration), AUC repeated per strategy."""
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "iteration", "labeled_fraction", "mean_accuracy", "std_accuracy",
                    "n_runs", "auc_mean", "auc_std"])
        for row in table.rows:
            for it, frac, m, s in zip(row.iterations, row.labeled_fraction, row.mean_accuracy, row.std_accuracy):
                w.writerow([row.label, it, _f(frac), _f(m), _f(s), len(row.curves),
                            _f(row.auc_mean), _f(row.auc_std)])
