"""Command line entry point: ``extract``, ``evaluate``, ``filter-check``, ``synth``.

Exit codes: 0 success, 2 I/O or configuration, 3 parse, 4 training/evaluation.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import PipelineConfig, load_config
from .dsp import BiquadCascade, butterworth_magnitude, frequency_response
from .errors import CacheError, ConfigError, FallDetectError, ParseError, TrainingError
from .evaluation import build_report, cross_validate, make_folds
from .features import FeatureMatrix, FeatureVector, feature_vector, read_cache, write_cache
from .ingest import Label, RecordingMeta, SensorSpec, load_recording, scan_corpus, write_synthetic_corpus

log = logging.getLogger("falldetect")

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_TRAIN = 0, 2, 3, 4


def _extract_one(args: tuple[RecordingMeta, tuple[SensorSpec, ...], BiquadCascade, bool]) -> FeatureVector:
    meta, sensors, cascade, zero_phase = args
    return feature_vector(load_recording(meta, sensors), cascade, zero_phase=zero_phase)


def extract_features(cfg: PipelineConfig, metas: Sequence[RecordingMeta]) -> FeatureMatrix:
    cascade = cfg.cascade()
    jobs = [(m, cfg.sensors, cascade, cfg.zero_phase) for m in metas]
    workers = cfg.worker_count(len(jobs))
    if workers == 1:
        rows = [_extract_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_extract_one, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    return FeatureMatrix(tuple(rows))


def run_extract(cfg: PipelineConfig, out=None) -> int:
    out = out or sys.stdout
    if cfg.root is None:
        raise ConfigError("extract needs a dataset root (--root or 'root' in the config file)")
    t0 = time.perf_counter()
    scan = scan_corpus(cfg.root)
    if not scan.entries:
        raise FileNotFoundError(f"no SisFall recordings found under {cfg.root}")
    matrix = extract_features(cfg, scan.entries)
    write_cache(matrix, cfg.cache)
    c = matrix.counts
    print(
        f"parsed {len(matrix)} files, skipped {len(scan.skipped)}; "
        f"{c[Label.FALL]} FALL / {c[Label.ADL]} ADL; "
        f"cache {cfg.cache}; {time.perf_counter() - t0:.1f} s",
        file=out,
    )
    return EXIT_OK


def run_evaluate(cfg: PipelineConfig, out=None) -> int:
    out = out or sys.stdout
    if not Path(cfg.cache).is_file():
        raise FileNotFoundError(f"feature cache {cfg.cache} not found; run 'extract' first")
    matrix = read_cache(cfg.cache)
    folds = make_folds(matrix.labels, k=cfg.folds, seed=cfg.seed, stratified=cfg.stratify)
    results, timing = [], {}
    for name in cfg.classifiers:
        t0 = time.perf_counter()
        results.append(
            cross_validate(
                matrix, name, folds, hp=cfg.hyperparams, scaling=cfg.scaling,
                workers=cfg.worker_count(cfg.folds) if cfg.workers else 1,
            )
        )
        timing[name] = round(time.perf_counter() - t0, 3)
    timing["finished_unix"] = round(time.time(), 3)
    report = build_report(results, cfg.report_echo(), timing)

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out_dir / "timing.json").write_text(report.timing_json(), encoding="utf-8")
    print(report.table(), file=out)
    return EXIT_OK


def filter_check_rows(cfg: PipelineConfig, points: int = 50) -> list[tuple[float, float, float]]:
    spec = cfg.filter
    cascade = cfg.cascade()
    nyq = spec.nyquist_hz
    grid = np.geomspace(0.1, nyq, points, endpoint=False)
    freqs = sorted({0.0, spec.cutoff_hz, min(2 * spec.cutoff_hz, nyq), *grid.tolist()})
    rows = []
    for f in freqs:
        analytic = 1.0 if cfg.filter_bypass else float(butterworth_magnitude(f, spec))
        rows.append((f, frequency_response(cascade, f, spec.sample_rate_hz), analytic))
    return rows


def run_filter_check(cfg: PipelineConfig, out=None, to_file: bool = False) -> int:
    out = out or sys.stdout
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["frequency_hz", "magnitude", "analytic_magnitude"])
    for f, mag, ref in filter_check_rows(cfg):
        w.writerow([repr(f), repr(mag), repr(ref)])
    if to_file:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        path = Path(cfg.out) / "filter_check.csv"
        path.write_text(buf.getvalue(), encoding="utf-8")
        print(f"wrote {path}", file=out)
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def run_synth(cfg: PipelineConfig, count: int, duration_s: float = 10.0, out=None) -> int:
    out = out or sys.stdout
    paths = write_synthetic_corpus(cfg.out, count, cfg.seed, duration_s=duration_s, specs=cfg.sensors)
    print(f"wrote {len(paths)} recordings ({count} FALL / {count} ADL) to {cfg.out}", file=out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--root", help="SisFall dataset directory")
    common.add_argument("--cache", help="feature cache CSV")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--folds", type=int)
    common.add_argument("--classifiers", help="comma-separated subset of dt,lr,knn,svm")
    common.add_argument("--no-scaling", action="store_true", help="skip per-fold z-scoring")
    common.add_argument("--no-stratify", action="store_true", help="plain random folds")
    common.add_argument("--zero-phase", action="store_true", help="forward-backward filtering")
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="falldetect", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("extract", parents=[common], help="compute the feature cache from a corpus")
    sub.add_parser("evaluate", parents=[common], help="cross-validate classifiers on the cache")
    fc = sub.add_parser("filter-check", parents=[common], help="frequency response CSV")
    fc.add_argument("--to-file", action="store_true", help="write <out>/filter_check.csv")
    sy = sub.add_parser("synth", parents=[common], help="write a synthetic SisFall-format corpus")
    sy.add_argument("--count", type=int, default=100, help="recordings per class")
    sy.add_argument("--duration", type=float, default=10.0, help="seconds per recording")
    return p


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    ov = {}
    for key in ("root", "cache", "out", "seed", "folds", "classifiers", "workers"):
        value = getattr(args, key)
        if value is not None:
            ov[key] = str(value)
    if args.no_scaling:
        ov["scaling"] = "false"
    if args.no_stratify:
        ov["stratify"] = "false"
    if args.zero_phase:
        ov["zero_phase"] = "true"
    return ov


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, _overrides(args))
        if args.command == "extract":
            return run_extract(cfg)
        if args.command == "evaluate":
            return run_evaluate(cfg)
        if args.command == "filter-check":
            return run_filter_check(cfg, to_file=args.to_file)
        if args.command == "synth":
            if args.count < 1 or not args.duration > 0:
                raise ConfigError("--count must be >= 1 and --duration > 0")
            return run_synth(cfg, args.count, args.duration)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except (ParseError, CacheError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FallDetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
