"""Datasets: strict feature-CSV loading and seeded Gaussian blobs."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DataError, ParseError

logger = logging.getLogger(__name__)

SOURCES = ("synthetic-blobs", "csv")


@dataclass(frozen=True)
class DatasetSpec:
    source: str = "synthetic-blobs"
    path: str = ""
    n: int = 1000
    d: int = 2
    num_classes: int = 2
    spread: float = 0.5
    weights: tuple[float, ...] = ()  # empty -> balanced
    seed: int = 0

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ConfigurationError(f"dataset source must be one of {SOURCES}, got {self.source!r}")
        if self.source == "csv":
            if not self.path:
                raise ConfigurationError("csv dataset needs a path")
            return
        if self.num_classes < 2:
            raise ConfigurationError("synthetic data needs at least 2 classes")
        if self.d < 1:
            raise ConfigurationError("synthetic data needs d >= 1")
        if self.n < self.num_classes:
            raise ConfigurationError(f"n={self.n} is smaller than the number of classes")
        if not (math.isfinite(self.spread) and self.spread > 0):
            raise ConfigurationError(f"cluster spread must be > 0, got {self.spread}")
        if self.weights:
            w = np.asarray(self.weights, dtype=float)
            if len(w) != self.num_classes or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
                raise ConfigurationError("class weights must be non-negative, one per class, summing to 1")


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    source_ids: tuple[str, ...]  # row i of the arrays came from external id source_ids[i]

    def __len__(self) -> int:
        return len(self.labels)


def _random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def blob_means(num_classes: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Class means with nearest-pair distance 1.

    Scaled simplex vertices when the classes fit in ``d`` dimensions, distinct
    hypercube vertices otherwise; a seeded rotation mixes the axes either way.
    """
    if num_classes <= d:
        means = np.eye(num_classes, d) / np.sqrt(2.0)
    else:
        if d < 63 and 2 ** d < num_classes:
            raise ConfigurationError(f"cannot place {num_classes} classes on a {d}-cube")
        seen: set[tuple[int, ...]] = set()
        rows = []
        while len(rows) < num_classes:
            v = tuple(int(b) for b in rng.integers(0, 2, size=d))
            if v not in seen:
                seen.add(v)
                rows.append(v)
        means = np.asarray(rows, dtype=float) - 0.5
    return means @ _random_rotation(d, rng)


def make_blobs(spec: DatasetSpec) -> Dataset:
    """Isotropic Gaussian clusters, one per class, with shared standard deviation ``spread``."""
    if spec.source != "synthetic-blobs":
        raise ConfigurationError("make_blobs needs a synthetic-blobs spec")
    rng = np.random.default_rng(spec.seed)
    C = spec.num_classes
    means = blob_means(C, spec.d, rng)
    p = np.asarray(spec.weights, dtype=float) if spec.weights else np.full(C, 1.0 / C)
    labels = rng.choice(C, size=spec.n, p=p)
    X = means[labels] + spec.spread * rng.standard_normal((spec.n, spec.d))
    return Dataset(X, labels.astype(np.int64), C, tuple(str(i) for i in range(spec.n)))


def _parse_float(text: str, line: int, column: str) -> float:
    if text.strip() == "":
        raise ParseError(f"missing value in column {column}", line)
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r} in column {column}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"missing or non-finite value {text!r} in column {column}", line)
    return value


def load_csv(path) -> Dataset:
    """Read ``id,label,f0,...,f{d-1}``; external ids are mapped to rows 0..n-1 in file order.

    The class count is the largest label plus one.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(str(exc), 1) from None
        d = len(header) - 2
        expected = ["id", "label"] + [f"f{j}" for j in range(d)]
        if d < 1 or [h.strip() for h in header] != expected:
            raise ParseError("header must be id,label,f0,...,f{d-1}", 1)
        ids: list[str] = []
        seen: set[str] = set()
        labels: list[int] = []
        rows: list[list[float]] = []
        try:
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != d + 2:
                    raise ParseError(f"expected {d + 2} fields, found {len(row)}", line)
                sid = row[0].strip()
                if sid == "":
                    raise ParseError("missing id", line)
                if sid in seen:
                    raise ParseError(f"duplicate id {sid!r}", line)
                seen.add(sid)
                try:
                    label = int(row[1])
                except ValueError:
                    raise ParseError(f"label {row[1]!r} is not an integer", line) from None
                if label < 0:
                    raise ParseError(f"label {label} is negative", line)
                ids.append(sid)
                labels.append(label)
                rows.append([_parse_float(v, line, f"f{j}") for j, v in enumerate(row[2:])])
        except (csv.Error, UnicodeDecodeError) as exc:
            raise ParseError(str(exc), reader.line_num) from None
    if not rows:
        raise DataError(f"{path} has no data rows")
    y = np.asarray(labels, dtype=np.int64)
    C = int(y.max()) + 1
    if C < 2:
        raise DataError(f"{path} contains a single class")
    logger.info("loaded %d samples x %d features, %d classes from %s", len(y), d, C, path)
    return Dataset(np.asarray(rows, dtype=np.float64), y, C, tuple(ids))


def write_csv(dataset: Dataset, path) -> None:
    """Inverse of :func:`load_csv`; floats use shortest round-trip formatting."""
    path = Path(path)
    d = dataset.features.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"] + [f"f{j}" for j in range(d)])
        for sid, label, row in zip(dataset.source_ids, dataset.labels, dataset.features):
            w.writerow([sid, int(label)] + [repr(float(v)) for v in row])


def load_dataset(spec: DatasetSpec) -> Dataset:
    if spec.source == "csv":
        return load_csv(spec.path)
    return make_blobs(spec)
