"""Command-line entry points.

Subcommands: train-text, train-face, evaluate, verify, serve.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from liesensor.cnn.network import build_emotion_net
from liesensor.cnn.training import (
    AugmentConfig,
    TrainConfig,
    evaluate_network,
    images_to_tensor,
    train,
)
from liesensor.cnn.weights_io import load_weights, save_weights
from liesensor.corpus import SplitSpec, load_fer_csv, load_label_mapping, load_tweet_csv, split_dataset
from liesensor.errors import DataFormatError, LieSensorError
from liesensor.service import ServiceConfig, serve
from liesensor.textclf.bundle import load_bundle, save_bundle
from liesensor.textclf.pipeline import TextTrainConfig, train_text_bundle
from liesensor.verifier import Verdict, evaluate, verify_message
from liesensor.vision.cascade import load_cascade
from liesensor.vision.image import read_pgm

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="liesensor", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train-text", help="train the four text classifiers, save a bundle")
    p.add_argument("tweets_csv")
    p.add_argument("--out", required=True, help="bundle output path")
    p.add_argument("--feature", choices=["count", "tfidf"], default="count")
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--label-map", help="label mapping override file")

    p = sub.add_parser("train-face", help="train the face emotion network, save weights")
    p.add_argument("fer_csv")
    p.add_argument("--out", required=True, help="weight file output path")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--l2-lambda", type=float, default=1e-4)
    p.add_argument("--width-mult", type=float, default=0.5)
    p.add_argument("--subset", type=int, default=0, help="cap training images (0 = all)")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--history", help="write per-epoch epoch,loss,val_accuracy lines here")
    p.add_argument("--augment", action="store_true", help="enable shift/flip augmentation")

    p = sub.add_parser("evaluate", help="score Liar/Honest fixtures")
    p.add_argument("--bundle", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--cascade", required=True)
    p.add_argument("--fixtures", required=True,
                   help="CSV with text,image,truth columns; image paths relative to the CSV")
    p.add_argument("--min-neighbors", type=int, default=2)

    p = sub.add_parser("verify", help="verify a single message")
    p.add_argument("--text", required=True)
    p.add_argument("--image", help="PGM (P5) face snapshot")
    p.add_argument("--raw-image", help="raw 8-bit gray file (needs --width/--height)")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--bundle", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--cascade", required=True)
    p.add_argument("--min-neighbors", type=int, default=2)
    p.add_argument("--json", action="store_true", help="emit JSON instead of the line record")

    p = sub.add_parser("serve", help="run the verification HTTP service")
    p.add_argument("--config", required=True, help="key=value config file")
    return parser


def _cmd_train_text(args) -> int:
    mapping = load_label_mapping(args.label_map) if args.label_map else None
    records, report = load_tweet_csv(args.tweets_csv, mapping)
    log.info("loaded %d texts (%d dropped, %d errors)", report.kept, report.dropped, len(report.errors))
    if not records:
        raise DataFormatError(f"{args.tweets_csv}: no usable rows")
    config = TextTrainConfig(
        feature_kind=args.feature,
        min_count=args.min_count,
        train_fraction=args.train_fraction,
        seed=args.seed,
    )
    bundle, selection = train_text_bundle(records, config)
    save_bundle(bundle, args.out)
    print(json.dumps({"selection": selection.to_dict(), "load_report": report.to_dict()}, indent=2))
    return EXIT_OK


def _cmd_train_face(args) -> int:
    records, report = load_fer_csv(args.fer_csv)
    log.info("loaded %d images (%d dropped, %d errors)", report.kept, report.dropped, len(report.errors))
    if not records:
        raise DataFormatError(f"{args.fer_csv}: no usable rows")
    if args.subset and len(records) > args.subset:
        train_part, _ = split_dataset(records, SplitSpec(args.subset / len(records), args.seed))
        records = train_part
    train_recs, val_recs = split_dataset(records, SplitSpec(args.train_fraction, args.seed))
    x_train, y_train = images_to_tensor(train_recs)
    x_val, y_val = images_to_tensor(val_recs)
    network = build_emotion_net(
        width_multiplier=args.width_mult, l2_lambda=args.l2_lambda, seed=args.seed
    )
    augmentation = AugmentConfig(shift_px=2.0, hflip=True) if args.augment else AugmentConfig()
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        l2_lambda=args.l2_lambda,
        seed=args.seed,
        augmentation=augmentation,
    )
    network, history = train(network, x_train, y_train, config, validation=(x_val, y_val))
    save_weights(network, args.out)
    if args.history:
        history.save(args.history)
    final_acc = evaluate_network(network, x_val, y_val)
    print(json.dumps({
        "val_accuracy": final_acc,
        "epochs": len(history.epochs),
        "diverged": history.diverged,
        "load_report": report.to_dict(),
    }, indent=2))
    return EXIT_OK if not history.diverged else EXIT_INTERNAL


def _load_models(bundle_path, weights_path, cascade_path):
    return load_bundle(bundle_path), load_weights(weights_path), load_cascade(cascade_path)


def _cmd_evaluate(args) -> int:
    bundle, network, cascade = _load_models(args.bundle, args.weights, args.cascade)
    base = os.path.dirname(os.path.abspath(args.fixtures))
    pairs = []
    with open(args.fixtures, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"text", "image", "truth"}
        if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
            raise DataFormatError(f"{args.fixtures}: needs columns {sorted(required)}")
        from liesensor.vision.cascade import DetectParams

        params = DetectParams(min_neighbors=args.min_neighbors)
        for row in reader:
            truth_raw = (row["truth"] or "").strip().lower()
            if truth_raw not in ("liar", "honest"):
                raise DataFormatError(f"{args.fixtures}: bad truth value {row['truth']!r}")
            truth = Verdict.LIAR if truth_raw == "liar" else Verdict.HONEST
            image = None
            if (row["image"] or "").strip():
                image = read_pgm(os.path.join(base, row["image"].strip()))
            result = verify_message(row["text"] or "", image, bundle, network, cascade, params)
            pairs.append((result, truth))
    report = evaluate(pairs)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def _cmd_verify(args) -> int:
    bundle, network, cascade = _load_models(args.bundle, args.weights, args.cascade)
    image = None
    if args.image:
        image = read_pgm(args.image)
    elif args.raw_image:
        if not args.width or not args.height:
            raise DataFormatError("--raw-image needs --width and --height")
        with open(args.raw_image, "rb") as fh:
            raw = fh.read()
        if len(raw) != args.width * args.height:
            raise DataFormatError(
                f"raw image is {len(raw)} bytes, expected {args.width * args.height}"
            )
        image = np.frombuffer(raw, dtype=np.uint8).reshape(args.height, args.width)
    from liesensor.vision.cascade import DetectParams

    result = verify_message(
        args.text, image, bundle, network, cascade,
        DetectParams(min_neighbors=args.min_neighbors),
    )
    print(json.dumps(result.to_dict(), indent=2) if args.json else result.record_line())
    return EXIT_OK


def _cmd_serve(args) -> int:
    config = ServiceConfig.from_file(args.config)
    serve(config)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    handlers = {
        "train-text": _cmd_train_text,
        "train-face": _cmd_train_face,
        "evaluate": _cmd_evaluate,
        "verify": _cmd_verify,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (DataFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_OK
    except LieSensorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("unexpected failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
