"""Command-line interface.

One binary, subcommands for every stage: ``synth`` writes a synthetic
dataset, ``ingest --check`` validates embedding inputs, ``centroids``
builds the class matrix, ``train``/``eval``/``predict`` run the model,
``search`` runs the random hyperparameter search, and ``sweep`` emits
sensitivity tables. Exit codes: 0 success, 1 validation error, 2 I/O
error. All randomness is controlled solely by ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import evaluator, fusion, store, text_head, trainer
from .errors import WingfuseError
from .similarity import predict


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; we reserve 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wingfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a deterministic synthetic dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ingest", help="validate embedding files and class packs")
    p.add_argument("paths", nargs="+")
    p.add_argument("--check", action="store_true", help="validate, do not summarize")

    p = sub.add_parser("centroids", help="build class centroids from a pack")
    p.add_argument("--pack", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the fusion head")
    _add_data_args(p)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--lr", type=float, default=0.09)
    p.add_argument("--momentum", type=float, default=0.80)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--hidden", type=int, default=793)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file (JSON)")
    p.add_argument("--report", help="report file; default <out stem>.report.json")

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--labels", help="manifest JSON with ids+labels; default: images manifest")
    p.add_argument("--alpha", type=float, help="override the model file's alpha")
    p.add_argument("--out", required=True, help="metrics file (JSON)")

    p = sub.add_parser("predict", help="write per-sample predictions")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--alpha", type=float, help="override the model file's alpha")
    p.add_argument("--out", required=True, help="predictions file (CSV)")

    p = sub.add_parser("search", help="random hyperparameter search")
    _add_data_args(p)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--partitions", type=int, default=3)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="ranking file (JSON)")

    p = sub.add_parser("sweep", help="sensitivity table along one hyperparameter")
    p.add_argument("--param", required=True, choices=evaluator.SWEEP_PARAMETERS)
    p.add_argument("--grid", required=True, help="a:b:step (inclusive) or v1,v2,...")
    p.add_argument("--model", required=True)
    _add_data_args(p)
    p.add_argument("--pack", help="class pack (required for beta and mc sweeps)")
    p.add_argument("--alpha", type=float, help="fixed alpha for beta/mc sweeps")
    p.add_argument("--beta", type=float, default=1.0, help="fixed beta for mc sweeps")
    p.add_argument("--split-name", default="test")
    p.add_argument("--retrain", action="store_true",
                   help="alpha sweep only: retrain per grid point")
    p.add_argument("--train-images", help="training images (with --retrain)")
    p.add_argument("--train-captions", help="training captions (with --retrain)")
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="sweep table (CSV)")
    return parser


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--images", required=True, help="WING file of image embeddings")
    p.add_argument("--captions", required=True, help="WING file of caption embeddings")
    p.add_argument("--centroids", help="class centroid file from `centroids`")


def parse_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise WingfuseError(f"grid must be a:b:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise WingfuseError(f"grid step must be > 0, got {step}")
        values = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-9:
                break
            values.append(round(v, 12))
            k += 1
        return values
    return [float(x) for x in text.split(",") if x.strip()]


# --- command bodies ----------------------------------------------------------

def _cmd_synth(args) -> int:
    dataset = store.synth_dataset(
        seed=args.seed,
        classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        shift=args.shift,
    )
    store.write_synth_dataset(dataset, args.out)
    print(f"wrote synthetic dataset to {args.out}")
    return 0


def _cmd_ingest(args) -> int:
    for raw in args.paths:
        path = Path(raw)
        if path.is_dir():
            pack = store.load_class_pack(path)
            detail = f"pack: {len(pack.classes)} classes, dim {pack.dim}"
        else:
            matrix = store.load_embedding_file(path)
            detail = f"N={matrix.rows}, F={matrix.dim}"
            if store.manifest_path(path).exists():
                store.load_manifest(path)
                detail += ", manifest ok"
        print(f"OK {path} ({detail})")
    return 0


def _cmd_centroids(args) -> int:
    pack = store.load_class_pack(args.pack)
    centroids = text_head.build_class_matrix(pack, args.beta)
    text_head.write_class_centroids(centroids, args.out)
    print(f"wrote {len(centroids.classes)} class centroids to {args.out}")
    return 0


def _load_split(images_path: str, captions_path: str):
    images = store.load_embedding_file(images_path)
    captions = store.load_embedding_file(captions_path)
    manifest = store.load_manifest(images_path)
    return images, captions, manifest


def _require_labels(manifest: store.SampleManifest, source: str) -> tuple[str, ...]:
    if manifest.labels is None:
        raise WingfuseError(f"{source} has no labels in its manifest")
    return manifest.labels


def _cmd_train(args) -> int:
    if not args.centroids:
        raise WingfuseError("train requires --centroids")
    images, captions, manifest = _load_split(args.images, args.captions)
    labels = _require_labels(manifest, args.images)
    centroids = text_head.load_class_centroids(args.centroids)
    config = trainer.TrainConfig(
        alpha=args.alpha,
        tau=args.tau,
        learning_rate=args.lr,
        momentum=args.momentum,
        batch_size=args.batch,
        epochs=args.epochs,
        patience=args.patience,
        hidden_dim=args.hidden,
        seed=args.seed,
    )
    report = _split_and_train(
        images, captions, labels, centroids, config, args.val_fraction
    )
    fusion.save_model(
        report.params,
        args.out,
        alpha=config.alpha,
        tau=config.tau,
        train_class_catalog=centroids.classes,
    )
    report_path = args.report or str(
        Path(args.out).with_name(Path(args.out).stem + ".report.json")
    )
    Path(report_path).write_text(
        trainer.report_to_json(report, config), encoding="utf-8"
    )
    print(
        f"best epoch {report.best_epoch}: val accuracy "
        f"{report.best_val_accuracy:.4f} ({report.stopping_reason}); "
        f"model -> {args.out}, report -> {report_path}"
    )
    return 0


def _split_and_train(images, captions, labels, centroids, config, val_fraction):
    manifest = store.SampleManifest(ids=images.ids, labels=tuple(labels))
    train_ids, val_ids = trainer.monte_carlo_partition(
        manifest, config.seed + 2, val_fraction
    )
    row_of = {sample_id: i for i, sample_id in enumerate(images.ids)}
    train_rows = [row_of[i] for i in train_ids]
    val_rows = [row_of[i] for i in val_ids]
    return trainer.train(
        images.take(train_rows),
        captions.take(train_rows),
        [labels[i] for i in train_rows],
        centroids,
        images.take(val_rows),
        captions.take(val_rows),
        [labels[i] for i in val_rows],
        config,
    )


def _load_model_inputs(args):
    if not args.centroids:
        raise WingfuseError("this command requires --centroids")
    params, meta = fusion.load_model(args.model)
    alpha = meta["alpha"] if args.alpha is None else args.alpha
    images, captions, manifest = _load_split(args.images, args.captions)
    centroids = text_head.load_class_centroids(args.centroids)
    return params, alpha, images, captions, manifest, centroids


def _cmd_eval(args) -> int:
    params, alpha, images, captions, manifest, centroids = _load_model_inputs(args)
    if args.labels:
        doc = json.loads(Path(args.labels).read_text(encoding="utf-8"))
        by_id = dict(zip(doc["ids"], doc["labels"]))
        try:
            labels = tuple(by_id[i] for i in images.ids)
        except KeyError as exc:
            raise WingfuseError(f"--labels file missing id {exc.args[0]!r}") from exc
    else:
        labels = _require_labels(manifest, args.images)
    report = evaluator.evaluate(params, alpha, images, captions, centroids, labels)
    doc = report.to_dict()
    doc["alpha"] = alpha
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=2), encoding="utf-8")
    print(
        f"accuracy {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f} "
        f"over {report.n_samples} samples -> {args.out}"
    )
    return 0


def _cmd_predict(args) -> int:
    params, alpha, images, captions, _, centroids = _load_model_inputs(args)
    scores = evaluator.score_matrix(params, alpha, images, captions, centroids)
    pred = predict(scores)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "predicted_class", "score"])
        for i, sample_id in enumerate(images.ids):
            j = int(pred[i])
            writer.writerow([sample_id, centroids.classes[j], repr(float(scores[i, j]))])
    print(f"wrote {len(images.ids)} predictions to {args.out}")
    return 0


def _cmd_search(args) -> int:
    if not args.centroids:
        raise WingfuseError("search requires --centroids")
    images, captions, manifest = _load_split(args.images, args.captions)
    labels = _require_labels(manifest, args.images)
    centroids = text_head.load_class_centroids(args.centroids)
    results = trainer.random_search(
        trainer.SearchSpace(),
        trials=args.trials,
        partitions=args.partitions,
        images=images,
        captions=captions,
        labels=labels,
        centroids=centroids,
        search_seed=args.seed,
        val_fraction=args.val_fraction,
    )
    Path(args.out).write_text(trainer.ranking_to_json(results), encoding="utf-8")
    best = results[0]
    print(
        f"{len(results)} trials ranked; best mean val accuracy "
        f"{best.mean_val_accuracy:.4f} +/- {best.std_val_accuracy:.4f} -> {args.out}"
    )
    return 0


def _cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    params, meta = fusion.load_model(args.model)
    images, captions, manifest = _load_split(args.images, args.captions)
    labels = _require_labels(manifest, args.images)
    split = evaluator.EvalSplit(
        name=args.split_name, images=images, captions=captions,
        labels=tuple(labels),
    )
    alpha = meta["alpha"] if args.alpha is None else args.alpha

    if args.retrain:
        rows = _sweep_retrain(args, grid, split, alpha, meta)
    else:
        centroids = (
            text_head.load_class_centroids(args.centroids) if args.centroids else None
        )
        pack = store.load_class_pack(args.pack) if args.pack else None
        rows = evaluator.sweep(
            args.param, grid, params, [split],
            alpha=alpha, centroids=centroids, pack=pack, beta=args.beta,
        )

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "value", "split", "accuracy", "macro_f1"])
        for row in rows:
            writer.writerow(
                [row.parameter, repr(row.value), row.split,
                 repr(row.accuracy), repr(row.macro_f1)]
            )
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return 0


def _sweep_retrain(args, grid, split, alpha, meta) -> list:
    if args.param != "alpha":
        raise WingfuseError("--retrain is only supported for the alpha sweep")
    if not (args.train_images and args.train_captions and args.centroids):
        raise WingfuseError(
            "--retrain needs --train-images, --train-captions and --centroids"
        )
    images, captions, manifest = _load_split(args.train_images, args.train_captions)
    labels = _require_labels(manifest, args.train_images)
    centroids = text_head.load_class_centroids(args.centroids)
    rows = []
    for value in grid:
        config = trainer.TrainConfig(alpha=float(value), tau=meta["tau"], seed=args.seed)
        report = _split_and_train(
            images, captions, labels, centroids, config, args.val_fraction
        )
        eval_report = evaluator.evaluate(
            report.params, float(value), split.images, split.captions, centroids,
            split.labels,
        )
        rows.append(
            evaluator.SweepRow(
                parameter="alpha",
                value=float(value),
                split=split.name,
                accuracy=eval_report.accuracy,
                macro_f1=eval_report.macro_f1,
            )
        )
    return rows


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "centroids": _cmd_centroids,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "predict": _cmd_predict,
    "search": _cmd_search,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except WingfuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
