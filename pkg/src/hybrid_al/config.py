"""Run configuration and its flat ``key = value`` text format.

Example::

    # ten-class blobs, least-confident + diverse selection
    dataset.source = synthetic-blobs
    dataset.n = 5000
    strategy.kind = LCD
    run.max_iterations = 6

Blank lines and ``#`` comments (whole-line, or after whitespace) are ignored.
Unknown or repeated keys are errors. Keys not given take their defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .data import DatasetSpec
from .errors import ConfigurationError
from .learner import LearnerConfig
from .strategies import Kind, StrategyConfig


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    strategy: StrategyConfig = field(default_factory=lambda: StrategyConfig(batch_size=0))
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    init_fraction: float = 0.04
    batch_fraction: float = 0.05
    max_iterations: int = 0  # 0 -> until the budget or the pool runs out
    label_budget_fraction: float = 1.0
    test_fraction: float = 0.2
    master_seed: int = 0
    stratified_init: bool = False
    record_wall_time: bool = False
    name: str = ""

    def __post_init__(self):
        if not 0.0 < self.init_fraction <= 1.0:
            raise ConfigurationError(f"init_fraction must lie in (0, 1], got {self.init_fraction}")
        if not 0.0 < self.batch_fraction <= 1.0:
            raise ConfigurationError(f"batch_fraction must lie in (0, 1], got {self.batch_fraction}")
        if not 0.0 < self.label_budget_fraction <= 1.0:
            raise ConfigurationError("label_budget_fraction must lie in (0, 1]")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ConfigurationError(f"test_fraction must lie in [0, 1), got {self.test_fraction}")
        if self.max_iterations < 0:
            raise ConfigurationError("max_iterations must be >= 0")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.strategy.kind is Kind.DSAL:
            return f"DSAL(ratio={self.strategy.dsal_ratio!r})"
        return self.strategy.kind.value


def _as_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _as_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _as_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    return tuple(_as_float(t) for t in text.split(",")) if text else ()


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Kind):
        return value.value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    return str(value)


# key -> (section, attribute, parser). Section None means a RunConfig field.
_KEYS: dict[str, tuple[str | None, str, Callable[[str], Any]]] = {
    "dataset.source": ("dataset", "source", str),
    "dataset.path": ("dataset", "path", str),
    "dataset.n": ("dataset", "n", int),
    "dataset.d": ("dataset", "d", int),
    "dataset.classes": ("dataset", "num_classes", int),
    "dataset.spread": ("dataset", "spread", _as_float),
    "dataset.weights": ("dataset", "weights", _as_floats),
    "dataset.seed": ("dataset", "seed", int),
    "strategy.kind": ("strategy", "kind", Kind),
    "strategy.batch_size": ("strategy", "batch_size", int),
    "strategy.candidate_multiplier": ("strategy", "candidate_multiplier", _as_float),
    "strategy.dsal_ratio": ("strategy", "dsal_ratio", _as_float),
    "strategy.n_clusters": ("strategy", "n_clusters", int),
    "learner.epochs": ("learner", "epochs", int),
    "learner.lr0": ("learner", "lr0", _as_float),
    "learner.decay_factor": ("learner", "decay_factor", _as_float),
    "learner.decay_every": ("learner", "decay_every", int),
    "learner.minibatch": ("learner", "minibatch", int),
    "learner.hidden_dim": ("learner", "hidden_dim", int),
    "learner.l2": ("learner", "l2", _as_float),
    "learner.warm_start": ("learner", "warm_start", _as_bool),
    "run.init_fraction": (None, "init_fraction", _as_float),
    "run.batch_fraction": (None, "batch_fraction", _as_float),
    "run.max_iterations": (None, "max_iterations", int),
    "run.label_budget_fraction": (None, "label_budget_fraction", _as_float),
    "run.test_fraction": (None, "test_fraction", _as_float),
    "run.master_seed": (None, "master_seed", int),
    "run.stratified_init": (None, "stratified_init", _as_bool),
    "run.record_wall_time": (None, "record_wall_time", _as_bool),
    "run.name": (None, "name", str),
}


def from_values(values: dict[str, Any]) -> RunConfig:
    """Build a config from already-typed flat values (missing keys default)."""
    unknown = sorted(set(values) - set(_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown configuration key {unknown[0]!r}")
    parts: dict[str | None, dict[str, Any]] = {None: {}, "dataset": {}, "strategy": {}, "learner": {}}
    for key, value in values.items():
        section, attr, _ = _KEYS[key]
        parts[section][attr] = value
    parts["strategy"].setdefault("batch_size", 0)
    try:
        return RunConfig(
            dataset=DatasetSpec(**parts["dataset"]),
            strategy=StrategyConfig(**parts["strategy"]),
            learner=LearnerConfig(**parts["learner"]),
            **parts[None],
        )
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def to_values(cfg: RunConfig) -> dict[str, Any]:
    """Every key of the text format with its resolved value (JSON-friendly)."""
    out = {}
    for key, (section, attr, _) in _KEYS.items():
        obj = cfg if section is None else getattr(cfg, section)
        value = getattr(obj, attr)
        if isinstance(value, Kind):
            value = value.value
        elif isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def values_from_json(values: dict[str, Any]) -> RunConfig:
    """Inverse of :func:`to_values` after a JSON round trip."""
    typed = {}
    for key, value in values.items():
        if key in _KEYS and _KEYS[key][2] is _as_floats:
            value = tuple(float(v) for v in value)
        elif key in _KEYS and _KEYS[key][2] is Kind:
            value = Kind(value)
        typed[key] = value
    return from_values(typed)


def _strip_comment(line: str) -> str:
    if line.lstrip().startswith("#"):
        return ""
    for i, ch in enumerate(line):
        if ch == "#" and i > 0 and line[i - 1].isspace():
            return line[:i]
    return line


def parse_config(text: str) -> RunConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key][2](value)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key}: {exc}") from None
    return from_values(values)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(cfg: RunConfig) -> str:
    """Canonical text form: every key, sorted, one per line."""
    values = to_values(cfg)
    lines = []
    for key in sorted(values):
        section, attr, _ = _KEYS[key]
        obj = cfg if section is None else getattr(cfg, section)
        lines.append(f"{key} = {_fmt(getattr(obj, attr))}")
    return "\n".join(lines) + "\n"


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, master_seed=int(seed))


def with_strategy(cfg: RunConfig, **changes) -> RunConfig:
    return replace(cfg, strategy=replace(cfg.strategy, **changes))


def config_keys() -> list[str]:
    return list(_KEYS)


__all__ = [
    "RunConfig",
    "config_keys",
    "format_config",
    "from_values",
    "load_config",
    "parse_config",
    "to_values",
    "values_from_json",
    "with_seed",
    "with_strategy",
]
