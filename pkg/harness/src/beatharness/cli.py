"""Command-line driver: ``train`` on exported matrices, ``predict`` to CSV."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import class_of, stratified_folds
from .matrices import SchemaMismatchError, load_dataset
from .predict import predict, write_predictions
from .train import TrainConfig, load_checkpoint, train_kfold


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beatharness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="k-fold training on a matrix directory")
    train.add_argument("--matrices", required=True)
    train.add_argument("--manifest", help="defaults to <matrices>/manifest.json")
    train.add_argument("--out", required=True)
    train.add_argument("--dataset-style", choices=("alarm2015", "afib2017"), default="afib2017")
    train.add_argument("--folds", help="JSON {recording_id: fold}; computed when absent")
    train.add_argument("--k", type=int, default=5)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--epochs", type=int, default=100)
    train.add_argument("--batch-size", type=int)
    train.add_argument("--lr", type=float)
    train.add_argument("--l2", type=float)
    train.add_argument("--augment", action="store_true", help="replicate training classes")

    pred = sub.add_parser("predict", help="write predictions CSV for a matrix directory")
    pred.add_argument("--checkpoint", required=True)
    pred.add_argument("--matrices", required=True)
    pred.add_argument("--manifest")
    pred.add_argument("--out", required=True)

    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    matrices, _ = load_dataset(args.matrices, args.manifest)
    config = TrainConfig(
        dataset_style=args.dataset_style,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        l2=args.l2,
        epochs=args.epochs,
        seed=args.seed,
        augment=args.augment,
    )
    if args.folds:
        folds = {k: int(v) for k, v in json.loads(Path(args.folds).read_text()).items()}
    else:
        labels = {m.recording_id: class_of(m, config.dataset_style) for m in matrices}
        folds = stratified_folds(labels, args.k, args.seed)
    summary = train_kfold(matrices, folds, config, args.out)
    for fold in summary["folds"]:
        print(
            f"fold {fold['fold']}: best val accuracy {fold['best_val_accuracy']:.3f}"
            f" over {fold['epochs_run']} epochs"
        )
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    model, normalizer, classes, _ = load_checkpoint(args.checkpoint)
    matrices, _ = load_dataset(args.matrices, args.manifest)
    rows = predict(model, normalizer, classes, matrices)
    write_predictions(rows, classes, args.out)
    print(f"wrote {len(rows)} predictions to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_predict(args)
    except SchemaMismatchError as exc:
        print(f"beatharness: schema mismatch: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
