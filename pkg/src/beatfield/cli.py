"""Command-line driver: featurize / stream / score / inspect.

Exit codes: 0 success, 1 usage error, 2 data error.  Log verbosity comes from
the ``BEATFIELD_LOG_LEVEL`` environment variable (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import DATASET_STYLES, PipelineConfig, Scenario
from .errors import BeatfieldError, ConfigError, DataError
from .evalprep import (
    ConfusionCounts,
    confusion_table,
    per_class_rates,
    score_2015,
    score_2017,
    write_report,
)
from .ingest import ALARM_TYPES, RHYTHM_CLASSES, AlarmLabel, load_recording, parse_label, select_lead
from .pipeline import featurize_directory, stream_recording
from .preprocess import detect_invalid
from .segmentation import dump_fiducials, segment

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="beatfield", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    feat = sub.add_parser("featurize", help="export per-recording sequence matrices")
    feat.add_argument("--input", required=True, help="directory of <id>.csv/<id>.hdr recordings")
    feat.add_argument("--output", required=True)
    feat.add_argument("--dataset-style", choices=DATASET_STYLES)
    feat.add_argument("--scenario", choices=("offline", "incremental", "fixed", "event"))
    feat.add_argument("--rf-length", type=int, help="window length e (fixed scenario)")
    feat.add_argument("--event-threshold", type=float)
    feat.add_argument("--warmup", type=int)
    feat.add_argument("--seed", type=int)
    feat.add_argument("--config", help="JSON pipeline config; flags override it")
    feat.add_argument("--format", choices=("binary", "csv"), default="binary")
    feat.add_argument("--workers", type=int, default=1, help="recording-level worker pool size")

    stream = sub.add_parser("stream", help="emit rows incrementally from one recording")
    stream.add_argument("--input", required=True, help="one <id>.csv recording")
    # "offline" is accepted here so the scenario/mode check can reject it
    # with the documented configuration-error exit code
    stream.add_argument("--scenario", choices=("offline", "incremental", "fixed", "event"))
    stream.add_argument("--rf-length", type=int)
    stream.add_argument("--event-threshold", type=float)
    stream.add_argument("--warmup", type=int)
    stream.add_argument("--frame-seconds", type=float, default=1.0)
    stream.add_argument("--config", help="JSON pipeline config; flags override it")
    stream.add_argument("--output", help="rows CSV (default stdout)")

    score = sub.add_parser("score", help="challenge metrics from predictions + labels")
    score.add_argument("--predictions", required=True, help="CSV id,label[,scores...]")
    score.add_argument("--labels", required=True, help="CSV id,label")
    score.add_argument("--dataset-style", choices=DATASET_STYLES, required=True)
    score.add_argument("--output", help="metrics report JSON (default stdout)")

    inspect = sub.add_parser("inspect", help="dump fiducials and invalid-mask windows")
    inspect.add_argument("--input", required=True, help="one <id>.csv recording")
    inspect.add_argument("--fiducials", help="output CSV piece_index,p,q,r,s,t,g,j")
    inspect.add_argument("--mask", help="output CSV start,end,reason")

    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = (
        PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    )
    scenario = config.scenario
    if getattr(args, "scenario", None):
        kind = args.scenario
        scenario = Scenario(
            kind,
            rf_length=args.rf_length if kind == "fixed" else None,
            threshold=args.event_threshold if kind == "event" else None,
            warmup=(args.warmup or 8) if kind == "event" else 8,
        )
    elif getattr(args, "rf_length", None) or getattr(args, "event_threshold", None):
        raise ConfigError("--rf-length/--event-threshold need --scenario")
    return dataclasses.replace(
        config,
        dataset_style=getattr(args, "dataset_style", None) or config.dataset_style,
        scenario=scenario,
        seed=args.seed if getattr(args, "seed", None) is not None else config.seed,
    )


def _cmd_featurize(args: argparse.Namespace) -> int:
    config = _load_config(args)
    report = featurize_directory(
        args.input, args.output, config, fmt=args.format, workers=max(1, args.workers)
    )
    write_report(report, Path(args.output) / "run_report.json")
    print(
        f"featurized {len(report['accepted'])} of {report['n_recordings']} recordings"
        f" ({len(report['rejected'])} rejected)"
    )
    return 0


def _cmd_stream(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if not config.scenario.causal:
        raise ConfigError("offline scenario cannot run in stream mode")
    rec = load_recording(args.input)
    rows = stream_recording(rec, config, frame_seconds=args.frame_seconds)
    lines = [f"{h}," + ",".join(repr(float(v)) for v in row) for h, row in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _read_id_label_csv(path: str, value_cols: bool = False) -> dict[str, str]:
    out: dict[str, str] = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if i == 0 and cells[0].lower() == "id":
            continue
        if len(cells) < 2:
            raise DataError(f"{path}:{i+1}: expected id,label")
        out[cells[0]] = cells[1]
    return out


def _cmd_score(args: argparse.Namespace) -> int:
    predictions = _read_id_label_csv(args.predictions)
    labels = _read_id_label_csv(args.labels)
    missing = sorted(set(labels) - set(predictions))
    extra = sorted(set(predictions) - set(labels))
    if missing or extra:
        raise DataError(
            f"id mismatch: missing predictions for {missing or 'none'}, "
            f"unknown ids {extra or 'none'}"
        )
    ids = sorted(labels)

    if args.dataset_style == "alarm2015":
        report = _score_alarm2015(ids, labels, predictions)
    else:
        report = _score_afib2017(ids, labels, predictions)

    if args.output:
        write_report(report, args.output)
    else:
        print(json.dumps(report, indent=1, sort_keys=True))
    return 0


def _score_alarm2015(ids, labels, predictions) -> dict:
    def counts(subset) -> ConfusionCounts:
        tp = tn = fp = fn = 0
        for rid in subset:
            actual = parse_label(labels[rid])
            if not isinstance(actual, AlarmLabel):
                raise DataError(f"{rid}: expected alarm-style label, got {labels[rid]!r}")
            pred_true = predictions[rid].strip().lower() in ("true", "1")
            if actual.is_true and pred_true:
                tp += 1
            elif actual.is_true:
                fn += 1
            elif pred_true:
                fp += 1
            else:
                tn += 1
        return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)

    overall = counts(ids)
    report = {
        "dataset_style": "alarm2015",
        "overall": {
            "confusion": overall.__dict__,
            "score_2015": score_2015(overall),
            "tpr": 100.0 * overall.tp / (overall.tp + overall.fn)
            if overall.tp + overall.fn
            else 0.0,
            "tnr": 100.0 * overall.tn / (overall.tn + overall.fp)
            if overall.tn + overall.fp
            else 0.0,
        },
        "per_type": {},
    }
    for typ in ALARM_TYPES:
        subset = [rid for rid in ids if parse_label(labels[rid]).arrhythmia == typ]
        if not subset:
            continue
        c = counts(subset)
        entry = {"confusion": c.__dict__}
        if c.total:
            entry["tpr"] = 100.0 * c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
            entry["tnr"] = 100.0 * c.tn / (c.tn + c.fp) if c.tn + c.fp else 0.0
            entry["score_2015"] = score_2015(c)
        report["per_type"][typ] = entry
    return report


def _score_afib2017(ids, labels, predictions) -> dict:
    classes = list(RHYTHM_CLASSES)
    actual = []
    predicted = []
    for rid in ids:
        lab = labels[rid]
        pred = predictions[rid]
        if lab not in classes:
            raise DataError(f"{rid}: bad rhythm label {lab!r}")
        if pred not in classes:
            raise DataError(f"{rid}: bad predicted label {pred!r}")
        actual.append(lab)
        predicted.append(pred)
    table = confusion_table(actual, predicted, classes)
    rates = per_class_rates(table, classes)
    return {
        "dataset_style": "afib2017",
        "classes": classes,
        "confusion_table": table.tolist(),
        "per_class": rates,
        "score_2017": score_2017(
            rates["Normal"]["f1"], rates["AFib"]["f1"], rates["Other"]["f1"]
        ),
    }


def _cmd_inspect(args: argparse.Namespace) -> int:
    rec = load_recording(args.input)
    sel = select_lead(rec)
    x = rec.lead(sel.chosen_lead)
    pieces = segment(x, rec.sample_rate)
    print(f"{rec.id}: lead {sel.chosen_lead} (rank {sel.fallback_rank}), {len(pieces)} pieces")
    if args.fiducials:
        dump_fiducials(pieces, args.fiducials)
        print(f"fiducials -> {args.fiducials}")
    if args.mask:
        mask = detect_invalid(x, rec.sample_rate)
        lines = ["start,end,reason"] + [f"{w.start},{w.end},{w.reason}" for w in mask.windows]
        Path(args.mask).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"mask ({mask.invalid_fraction:.3f} invalid) -> {args.mask}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("BEATFIELD_LOG_LEVEL", "WARNING").upper())
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "featurize": _cmd_featurize,
        "stream": _cmd_stream,
        "score": _cmd_score,
        "inspect": _cmd_inspect,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"beatfield: configuration error: {exc}", file=sys.stderr)
        return 1
    except BeatfieldError as exc:
        print(f"beatfield: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"beatfield: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
