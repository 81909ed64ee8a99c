"""Pipeline configuration and its flat ``key = value`` file format.

Example file::

    # dataset and outputs
    root = /data/SisFall_dataset
    cache = features.csv
    out = results
    seed = 0
    folds = 10
    classifiers = dt, lr, knn, svm
    scaling = true
    stratify = true
    zero_phase = false
    workers = 8

    filter.order = 4
    filter.cutoff_hz = 5
    filter.sample_rate_hz = 200
    filter.bypass = false

    sensor0.range = 16        # g
    sensor0.bits = 13
    sensor1.range = 2000      # deg/s
    sensor1.bits = 16
    sensor2.range = 8
    sensor2.bits = 14

    svm.c = 1.0
    svm.scale = 7.3484692283495345
    svm.tol = 0.001
    svm.max_passes = 200
    lr.learning_rate = 0.1
    lr.l2 = 0.0001
    lr.epochs = 500
    dt.max_depth = 32
    dt.min_leaf = 1

Blank lines and ``#`` comments are ignored.  Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

from .classify import CLASSIFIER_NAMES, Hyperparams
from .dsp import BiquadCascade, FilterSpec, design_butterworth
from .errors import ConfigError, FilterDesignError
from .ingest import DEFAULT_SENSORS, SensorSpec


@dataclass(frozen=True)
class PipelineConfig:
    root: Path | None = None
    cache: Path = Path("features.csv")
    out: Path = Path("results")
    filter: FilterSpec = FilterSpec()
    filter_bypass: bool = False
    sensors: tuple[SensorSpec, SensorSpec, SensorSpec] = DEFAULT_SENSORS
    hyperparams: Hyperparams = Hyperparams()
    classifiers: tuple[str, ...] = CLASSIFIER_NAMES
    folds: int = 10
    seed: int = 0
    scaling: bool = True
    stratify: bool = True
    zero_phase: bool = False
    workers: int | None = None

    def validate(self) -> "PipelineConfig":
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if not self.classifiers:
            raise ConfigError("classifier list is empty")
        for name in self.classifiers:
            if name not in CLASSIFIER_NAMES:
                raise ConfigError(
                    f"unknown classifier {name!r}; choose from {', '.join(CLASSIFIER_NAMES)}"
                )
        if len(set(self.classifiers)) != len(self.classifiers):
            raise ConfigError("classifier list has duplicates")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        hp = self.hyperparams
        if not (hp.svm_c > 0 and hp.svm_scale > 0 and hp.svm_tol > 0 and hp.svm_max_passes >= 1):
            raise ConfigError("svm.c, svm.scale, svm.tol must be > 0 and svm.max_passes >= 1")
        if not (hp.lr_learning_rate > 0 and hp.lr_l2 >= 0 and hp.lr_epochs >= 1):
            raise ConfigError("lr.learning_rate must be > 0, lr.l2 >= 0, lr.epochs >= 1")
        if hp.dt_max_depth < 1 or hp.dt_min_leaf < 1:
            raise ConfigError("dt.max_depth and dt.min_leaf must be >= 1")
        return self

    def cascade(self) -> BiquadCascade:
        if self.filter_bypass:
            return BiquadCascade.identity()
        return design_butterworth(self.filter)

    def worker_count(self, n_items: int) -> int:
        n = self.workers if self.workers is not None else (os.cpu_count() or 1)
        return max(1, min(n, n_items))

    def report_echo(self) -> dict[str, Any]:
        """Settings that determine evaluation results; paths are left out on purpose."""
        return {
            "classifiers": list(self.classifiers),
            "folds": self.folds,
            "seed": self.seed,
            "scaling": self.scaling,
            "stratify": self.stratify,
            "zero_phase": self.zero_phase,
            "filter": {
                "order": self.filter.order,
                "cutoff_hz": self.filter.cutoff_hz,
                "sample_rate_hz": self.filter.sample_rate_hz,
                "bypass": self.filter_bypass,
            },
            "sensors": [
                {"name": s.name, "kind": s.kind, "range": s.range, "bits": s.resolution_bits}
                for s in self.sensors
            ],
            "hyperparams": self.hyperparams.as_dict(),
        }


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_TOP = {
    "root": Path,
    "cache": Path,
    "out": Path,
    "seed": int,
    "folds": int,
    "classifiers": lambda s: tuple(c.strip().lower() for c in s.split(",") if c.strip()),
    "scaling": _bool,
    "stratify": _bool,
    "zero_phase": _bool,
    "workers": int,
}
_FILTER = {"order": int, "cutoff_hz": float, "sample_rate_hz": float}
_HP = {
    "svm.c": ("svm_c", float),
    "svm.scale": ("svm_scale", float),
    "svm.tol": ("svm_tol", float),
    "svm.max_passes": ("svm_max_passes", int),
    "lr.learning_rate": ("lr_learning_rate", float),
    "lr.l2": ("lr_l2", float),
    "lr.epochs": ("lr_epochs", int),
    "dt.max_depth": ("dt_max_depth", int),
    "dt.min_leaf": ("dt_min_leaf", int),
}


def parse_config_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw.strip()!r}")
        entries[key.strip().lower()] = value.strip()
    return entries


def apply_entries(cfg: PipelineConfig, entries: Mapping[str, str]) -> PipelineConfig:
    top: dict[str, Any] = {}
    filt: dict[str, Any] = {}
    hp: dict[str, Any] = {}
    sensors = [dataclasses.asdict(s) for s in cfg.sensors]
    bypass = cfg.filter_bypass
    for key, value in entries.items():
        try:
            if key in _TOP:
                top[key] = _TOP[key](value)
            elif key == "filter.bypass":
                bypass = _bool(value)
            elif key.startswith("filter.") and key[7:] in _FILTER:
                filt[key[7:]] = _FILTER[key[7:]](value)
            elif key in _HP:
                attr, conv = _HP[key]
                hp[attr] = conv(value)
            elif key.startswith("sensor") and "." in key:
                head, attr = key.split(".", 1)
                idx = int(head[6:])
                if not 0 <= idx < len(sensors):
                    raise KeyError(key)
                if attr == "range":
                    sensors[idx]["range"] = float(value)
                elif attr == "bits":
                    sensors[idx]["resolution_bits"] = int(value)
                elif attr == "kind":
                    sensors[idx]["kind"] = value
                else:
                    raise KeyError(key)
            else:
                raise KeyError(key)
        except KeyError:
            raise ConfigError(f"unknown config key {key!r}") from None
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    try:
        filter_spec = replace(cfg.filter, **filt) if filt else cfg.filter
    except FilterDesignError as exc:
        raise ConfigError(str(exc)) from None
    return replace(
        cfg,
        **top,
        filter=filter_spec,
        filter_bypass=bypass,
        sensors=tuple(SensorSpec(**s) for s in sensors),
        hyperparams=replace(cfg.hyperparams, **hp),
    )


def load_config(path: str | Path | None, overrides: Mapping[str, str] | None = None) -> PipelineConfig:
    """Defaults, then the file at ``path`` (if any), then ``overrides``; validated."""
    cfg = PipelineConfig()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        cfg = apply_entries(cfg, parse_config_text(text))
    if overrides:
        cfg = apply_entries(cfg, overrides)
    return cfg.validate()
