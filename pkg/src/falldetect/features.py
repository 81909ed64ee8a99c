"""Per-channel moment statistics and the 54-wide feature vector."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .dsp import BiquadCascade, filter_channels
from .errors import CacheError, SignalError
from .ingest import N_CHANNELS, N_SENSORS, Label, Recording, RecordingMeta, label_from_name

STATS = ("max", "min", "mean", "variance", "kurtosis", "skewness")
AXES = ("x", "y", "z")
N_FEATURES = N_CHANNELS * len(STATS)  # 54

# Channel-major layout: sensor -> axis -> statistic.
FEATURE_NAMES = tuple(
    f"sensor{s}_{a}_{stat}" for s in range(N_SENSORS) for a in AXES for stat in STATS
)
CACHE_HEADER = ("meta", "label", *(f"f{i:02d}" for i in range(N_FEATURES)))

# m2 at or below this counts as a constant channel.
DEGENERATE_M2 = 1e-12


class ChannelFeatures(NamedTuple):
    max: float
    min: float
    mean: float
    variance: float
    kurtosis: float
    skewness: float


def channel_features(series) -> ChannelFeatures:
    """Max, min, mean, population variance, non-excess kurtosis and skewness.

    Kurtosis is ``m4 / m2**2`` and skewness ``m3 / m2**1.5`` with central
    moments taken over N.  Constant series (``m2 <= 1e-12``) report both as 0.
    """
    a = np.asarray(series, dtype=np.float64)
    if a.ndim != 1:
        raise SignalError(f"expected a 1-D series, got shape {a.shape}")
    if a.size == 0:
        raise SignalError("cannot compute features of an empty series")
    mu = a.mean()
    d = a - mu
    d2 = d * d
    m2 = d2.mean()
    if m2 <= DEGENERATE_M2:
        kurt = skew = 0.0
    else:
        m3 = (d2 * d).mean()
        m4 = (d2 * d2).mean()
        kurt = m4 / (m2 * m2)
        skew = m3 / m2**1.5
    # Rounding can push the mean a hair outside [min, max] on near-constant input.
    lo, hi = float(a.min()), float(a.max())
    mu = min(max(float(mu), lo), hi)
    return ChannelFeatures(hi, lo, mu, float(m2), float(kurt), float(skew))


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    label: Label
    meta: RecordingMeta

    def __post_init__(self):
        if len(self.values) != N_FEATURES:
            raise ValueError(f"feature vector needs {N_FEATURES} values, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite feature in {self.meta.stem}")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


def feature_vector(
    recording: Recording, cascade: BiquadCascade, zero_phase: bool = False
) -> FeatureVector:
    filtered = filter_channels(recording.channels, cascade, zero_phase=zero_phase)
    values: list[float] = []
    for row in filtered:
        values.extend(channel_features(row))
    return FeatureVector(tuple(values), recording.meta.label, recording.meta)


@dataclass(frozen=True)
class FeatureMatrix:
    rows: tuple[FeatureVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def X(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, N_FEATURES))
        return np.array([r.values for r in self.rows], dtype=np.float64)

    @property
    def labels(self) -> list[Label]:
        return [r.label for r in self.rows]

    @property
    def y(self) -> np.ndarray:
        """+1 for Fall, -1 for ADL."""
        return np.array([1 if r.label is Label.FALL else -1 for r in self.rows], dtype=np.int64)

    @property
    def counts(self) -> dict[Label, int]:
        out = {Label.FALL: 0, Label.ADL: 0}
        for r in self.rows:
            out[r.label] += 1
        return out


def _meta_to_cell(meta: RecordingMeta) -> str:
    return f"{meta.stem}|{meta.source_path}"


def _meta_from_cell(cell: str, lineno: int) -> RecordingMeta:
    stem, sep, path = cell.partition("|")
    if not sep:
        raise CacheError(f"row {lineno}: malformed meta cell {cell!r}")
    try:
        return label_from_name(stem, source_path=path)
    except ValueError as exc:
        raise CacheError(f"row {lineno}: {exc}") from None


def _render_cache(matrix: FeatureMatrix | Iterable[FeatureVector]) -> str:
    rows = matrix.rows if isinstance(matrix, FeatureMatrix) else tuple(matrix)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CACHE_HEADER)
    for fv in rows:
        w.writerow([_meta_to_cell(fv.meta), fv.label.value, *(repr(float(v)) for v in fv.values)])
    return buf.getvalue()


def write_cache(matrix: FeatureMatrix, path: str | Path) -> None:
    """Write the CSV cache atomically (temp file in the same directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = _render_cache(matrix)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def read_cache(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CACHE_HEADER:
            raise CacheError(f"{path}: header does not match the feature cache schema")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(CACHE_HEADER):
                raise CacheError(
                    f"{path}: row {lineno} has {len(rec) - 2} feature columns, expected {N_FEATURES}"
                )
            meta = _meta_from_cell(rec[0], lineno)
            try:
                label = Label.parse(rec[1])
                values = tuple(float(v) for v in rec[2:])
            except ValueError as exc:
                raise CacheError(f"{path}: row {lineno}: {exc}") from None
            if label is not meta.label:
                raise CacheError(f"{path}: row {lineno}: label {label.value} disagrees with {meta.stem}")
            try:
                rows.append(FeatureVector(values, label, meta))
            except ValueError as exc:
                raise CacheError(f"{path}: row {lineno}: {exc}") from None
    return FeatureMatrix(tuple(rows))


def stack(vectors: Sequence[FeatureVector]) -> FeatureMatrix:
    return FeatureMatrix(tuple(vectors))
