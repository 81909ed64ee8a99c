"""SisFall recording discovery, parsing, calibration and synthetic fixtures.

A SisFall recording is a text file with one sample per line: nine
comma-separated signed integers (three axes for each of three sensors),
optionally terminated by ``;``.  File stems follow ``<ACT>_<SUBJ>_R<NN>``,
where activity codes starting with ``F`` are falls and everything else is
an activity of daily living.
"""

from __future__ import annotations

import enum
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, EmptyRecordingError, FallDetectError, ParseError

log = logging.getLogger(__name__)

SAMPLE_RATE_HZ = 200
N_SENSORS = 3
N_AXES = 3
N_CHANNELS = N_SENSORS * N_AXES


class Label(str, enum.Enum):
    FALL = "FALL"
    ADL = "ADL"

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown label {text!r}, expected FALL or ADL") from None


@dataclass(frozen=True)
class SensorSpec:
    name: str
    kind: str
    range: float
    resolution_bits: int

    def __post_init__(self):
        if self.kind not in ("accelerometer", "gyroscope"):
            raise ConfigError(f"sensor {self.name}: unknown kind {self.kind!r}")
        if not self.range > 0:
            raise ConfigError(f"sensor {self.name}: range must be > 0, got {self.range}")
        if not 8 <= self.resolution_bits <= 32:
            raise ConfigError(
                f"sensor {self.name}: resolution_bits must be in [8, 32], got {self.resolution_bits}"
            )

    @property
    def scale(self) -> float:
        """Physical units represented by one raw count."""
        return 2.0 * self.range / 2**self.resolution_bits


# ADXL345 accelerometer, ITG3200 gyroscope, MMA8451Q accelerometer, in file column order.
DEFAULT_SENSORS: tuple[SensorSpec, SensorSpec, SensorSpec] = (
    SensorSpec("sensor0", "accelerometer", 16.0, 13),
    SensorSpec("sensor1", "gyroscope", 2000.0, 16),
    SensorSpec("sensor2", "accelerometer", 8.0, 14),
)


@dataclass(frozen=True)
class RecordingMeta:
    activity_code: str
    subject_code: str
    trial: int
    label: Label
    source_path: str = ""

    def __post_init__(self):
        if self.trial < 1:
            raise ValueError(f"trial must be >= 1, got {self.trial}")
        expected = Label.FALL if self.activity_code.upper().startswith("F") else Label.ADL
        if self.label is not expected:
            raise ValueError(
                f"label {self.label.value} inconsistent with activity {self.activity_code}"
            )

    @property
    def stem(self) -> str:
        return f"{self.activity_code}_{self.subject_code}_R{self.trial:02d}"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RawRecording:
    """Integer counts, shape ``(9, n)``: sensor0 x,y,z; sensor1 x,y,z; sensor2 x,y,z."""

    meta: RecordingMeta
    channels: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        ch = self.channels
        if ch.ndim != 2 or ch.shape[0] != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} channels, got array of shape {ch.shape}")
        if ch.shape[1] < 1:
            raise EmptyRecordingError("recording has no samples", self.meta.source_path or None)
        if not np.issubdtype(ch.dtype, np.integer):
            raise TypeError("raw channels must be integers")
        if self.sample_rate_hz != SAMPLE_RATE_HZ:
            raise ValueError(f"sample rate must be {SAMPLE_RATE_HZ} Hz")
        _freeze(ch)

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]


@dataclass(frozen=True)
class Recording:
    """Calibrated channels in physical units (g for accelerometers, deg/s for the gyroscope)."""

    meta: RecordingMeta
    channels: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        ch = self.channels
        if ch.ndim != 2 or ch.shape[0] != N_CHANNELS or ch.shape[1] < 1:
            raise ValueError(f"expected non-empty ({N_CHANNELS}, n) array, got {ch.shape}")
        if ch.dtype != np.float64:
            raise TypeError("calibrated channels must be float64")
        if not np.all(np.isfinite(ch)):
            raise ValueError("calibrated channels contain non-finite values")
        _freeze(ch)

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    def sensor(self, index: int) -> np.ndarray:
        return self.channels[N_AXES * index : N_AXES * (index + 1)]


_STEM_RE = re.compile(r"^(?P<act>[A-Za-z]\d+)_(?P<subj>[A-Za-z]+\d+)_R(?P<trial>\d+)$")


def label_from_name(filename: str, source_path: str | None = None) -> RecordingMeta:
    """Parse ``F01_SE06_R02.txt`` style names into metadata.

    >>> label_from_name("F01_SE06_R02.txt").label
    <Label.FALL: 'FALL'>
    """
    name = Path(filename).name
    stem = name[:-4] if name.lower().endswith(".txt") else name
    m = _STEM_RE.match(stem)
    if m is None or int(m["trial"]) < 1:
        raise ParseError(f"filename {name!r} does not match <ACT>_<SUBJ>_R<NN>", filename)
    act = m["act"].upper()
    label = Label.FALL if act.startswith("F") else Label.ADL
    return RecordingMeta(
        activity_code=act,
        subject_code=m["subj"].upper(),
        trial=int(m["trial"]),
        label=label,
        source_path=source_path if source_path is not None else filename,
    )


@dataclass
class ScanResult:
    entries: list[RecordingMeta]
    skipped: list[str] = field(default_factory=list)

    @property
    def counts(self) -> dict[Label, int]:
        out = {Label.FALL: 0, Label.ADL: 0}
        for e in self.entries:
            out[e.label] += 1
        return out


def scan_corpus(root: str | Path) -> ScanResult:
    """Recursively discover ``*.txt`` recordings under ``root``, sorted by relative path.

    Files whose names do not follow the SisFall convention (the dataset's own
    ``Readme.txt``, for instance) are skipped with a warning and listed in
    ``ScanResult.skipped``.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a readable directory")
    try:
        paths = [p for p in root.rglob("*") if p.is_file() and p.suffix.lower() == ".txt"]
    except OSError as exc:
        raise FileNotFoundError(f"cannot read dataset root {root}: {exc}") from exc
    paths.sort(key=lambda p: p.relative_to(root).as_posix())

    result = ScanResult(entries=[])
    for p in paths:
        try:
            result.entries.append(label_from_name(p.name, source_path=str(p)))
        except ParseError:
            log.warning("skipping %s: unrecognised filename", p)
            result.skipped.append(str(p))
    c = result.counts
    log.info(
        "scanned %s: %d recordings (%d FALL / %d ADL), %d skipped",
        root, len(result.entries), c[Label.FALL], c[Label.ADL], len(result.skipped),
    )
    return result


def parse_recording(content: bytes | str, meta: RecordingMeta) -> RawRecording:
    """Parse SisFall text content into a :class:`RawRecording`.

    Malformed lines raise :class:`ParseError` with a 1-based line number;
    they are never skipped.
    """
    if isinstance(content, bytes):
        try:
            content = content.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError(f"content is not ASCII text ({exc})", meta.source_path) from None

    rows: list[list[int]] = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        if text.endswith(";"):
            text = text[:-1]
        fields = text.split(",")
        if len(fields) != N_CHANNELS:
            raise ParseError(
                f"expected {N_CHANNELS} fields, found {len(fields)}", meta.source_path, lineno
            )
        try:
            rows.append([int(f) for f in fields])
        except ValueError:
            raise ParseError(f"non-integer field in {line.strip()!r}", meta.source_path, lineno) from None

    if not rows:
        raise EmptyRecordingError("no data lines", meta.source_path)
    channels = np.asarray(rows, dtype=np.int64).T.copy()
    return RawRecording(meta=meta, channels=channels)


def read_recording(meta: RecordingMeta) -> RawRecording:
    return parse_recording(Path(meta.source_path).read_bytes(), meta)


def serialize_recording(raw: RawRecording) -> str:
    """Inverse of :func:`parse_recording`, using the dataset's ``;``-terminated lines."""
    lines = [",".join(str(int(v)) for v in col) + ";" for col in raw.channels.T]
    return "\n".join(lines) + "\n"


def _check_specs(specs: Sequence[SensorSpec]) -> None:
    if len(specs) != N_SENSORS:
        raise ConfigError(f"need {N_SENSORS} sensor specs, got {len(specs)}")


def calibrate(raw: RawRecording, specs: Sequence[SensorSpec] = DEFAULT_SENSORS) -> Recording:
    _check_specs(specs)
    scales = np.repeat([s.scale for s in specs], N_AXES)[:, None]
    return Recording(
        meta=raw.meta,
        channels=raw.channels.astype(np.float64) * scales,
        sample_rate_hz=raw.sample_rate_hz,
    )


def quantize(rec: Recording, specs: Sequence[SensorSpec] = DEFAULT_SENSORS) -> RawRecording:
    """Round physical values back to raw counts, saturating at each sensor's signed range."""
    _check_specs(specs)
    out = np.empty(rec.channels.shape, dtype=np.int64)
    for i, s in enumerate(specs):
        lo, hi = -(2 ** (s.resolution_bits - 1)), 2 ** (s.resolution_bits - 1) - 1
        block = np.rint(rec.sensor(i) / s.scale)
        out[N_AXES * i : N_AXES * (i + 1)] = np.clip(block, lo, hi).astype(np.int64)
    return RawRecording(meta=rec.meta, channels=out, sample_rate_hz=rec.sample_rate_hz)


def load_recording(meta: RecordingMeta, specs: Sequence[SensorSpec] = DEFAULT_SENSORS) -> Recording:
    return calibrate(read_recording(meta), specs)


# -- synthetic fixtures ------------------------------------------------------

def _default_meta(label: Label) -> RecordingMeta:
    act = "F01" if label is Label.FALL else "D01"
    return RecordingMeta(act, "SA01", 1, label, "<synthetic>")


def _motion(rng: np.random.Generator, t: np.ndarray, amp: tuple[float, float]) -> np.ndarray:
    """Three axes of slow sinusoidal body motion."""
    out = np.empty((N_AXES, t.size))
    for axis in range(N_AXES):
        a = rng.uniform(*amp)
        f = rng.uniform(0.3, 2.0)
        ph = rng.uniform(0.0, 2 * math.pi)
        out[axis] = a * np.sin(2 * math.pi * f * t + ph)
    return out


def generate_synthetic(
    label: Label | str,
    duration_s: float,
    seed: int | Sequence[int],
    meta: RecordingMeta | None = None,
) -> Recording:
    """Deterministic synthetic recording.

    ADL: gravity (1 g along -y) plus gentle sinusoidal motion and small noise,
    keeping accelerometer magnitude within 0.5 g of 1 g.  Fall: the same
    baseline, then an impact pulse of 3.5-5 g along +x while gravity rotates
    onto +x and motion dies down (the wearer ends up lying).
    """
    label = Label.parse(label) if isinstance(label, str) else label
    if not duration_s > 0:
        raise ValueError(f"duration_s must be > 0, got {duration_s}")
    if meta is None:
        meta = _default_meta(label)
    if meta.label is not label:
        raise ValueError("meta label does not match requested label")

    rng = np.random.default_rng(seed)
    n = max(1, int(round(duration_s * SAMPLE_RATE_HZ)))
    t = np.arange(n) / SAMPLE_RATE_HZ

    body = _motion(rng, t, (0.03, 0.12))
    gyro = _motion(rng, t, (5.0, 30.0))
    gravity = np.zeros((N_AXES, n))
    gravity[1] = -1.0

    if label is Label.FALL:
        i0 = int(rng.uniform(0.35, 0.5) * n)
        t0 = t[i0]
        theta = (math.pi / 2) / (1.0 + np.exp(-(t - t0) / 0.05))
        gravity = np.stack([np.sin(theta), -np.cos(theta), np.zeros(n)])
        calm = np.where(t >= t0, 0.2, 1.0)
        body = body * calm
        gyro = gyro * calm
        peak = rng.uniform(3.5, 5.0)
        pulse = peak * np.exp(-0.5 * ((t - t0) / 0.04) ** 2)
        body = body + np.stack([pulse, 0.3 * pulse * rng.uniform(-1, 1), np.zeros(n)])
        gyro[2] += rng.uniform(150.0, 300.0) * np.exp(-0.5 * ((t - t0) / 0.1) ** 2)

    accel = gravity + body
    channels = np.concatenate(
        [
            accel + rng.normal(0.0, 0.01, (N_AXES, n)),
            gyro + rng.normal(0.0, 0.5, (N_AXES, n)),
            accel + rng.normal(0.0, 0.01, (N_AXES, n)),
        ]
    )
    return Recording(meta=meta, channels=channels)


def synthetic_meta(label: Label, index: int) -> RecordingMeta:
    """Unique SisFall-style metadata for the ``index``-th synthetic file of a class."""
    n_act = 15 if label is Label.FALL else 19
    prefix = "F" if label is Label.FALL else "D"
    act = f"{prefix}{index % n_act + 1:02d}"
    subj = f"SA{(index // n_act) % 23 + 1:02d}"
    trial = index // (n_act * 23) + 1
    return RecordingMeta(act, subj, trial, label, "<synthetic>")


def write_synthetic_corpus(
    out_dir: str | Path,
    count: int,
    seed: int,
    duration_s: float = 10.0,
    specs: Sequence[SensorSpec] = DEFAULT_SENSORS,
) -> list[Path]:
    """Write ``count`` Fall and ``count`` ADL files in SisFall on-disk format."""
    if count < 0:
        raise ValueError("count must be non-negative")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FallDetectError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []
    for k, label in enumerate((Label.FALL, Label.ADL)):
        for i in range(count):
            meta = synthetic_meta(label, i)
            rec = generate_synthetic(label, duration_s, seed=(seed, k, i), meta=meta)
            path = out_dir / f"{meta.stem}.txt"
            path.write_text(serialize_recording(quantize(rec, specs)), encoding="ascii")
            written.append(path)
    return written
