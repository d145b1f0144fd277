"""Command-line entry point.

Subcommands: ingest, synth, split, train, evaluate, score, report, serve.
Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)


@dataclass
class CommandResult:
    exit_code: int
    summary: str
    artifacts_written: list[Path] = field(default_factory=list)


def _load_config_file(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        return yaml.safe_load(text) or {}
    return json.loads(text)


def cmd_ingest(args) -> CommandResult:
    from .dataset import ManifestError, load_manifest, save_manifest_json

    try:
        manifest = load_manifest(args.manifest, images_root=args.images)
    except ManifestError as exc:
        return CommandResult(1, f"manifest invalid:\n{exc}")
    out = save_manifest_json(manifest, args.out)
    return CommandResult(
        0,
        f"ingested {len(manifest.records)} paintings -> {out}",
        artifacts_written=[out],
    )


def cmd_synth(args) -> CommandResult:
    from .dataset import summarize
    from .synthetic import SyntheticSpec, generate_synthetic

    try:
        spec = SyntheticSpec(count=args.count, image_side=args.side, seed=args.seed)
    except ValueError as exc:
        return CommandResult(1, f"bad synthetic spec: {exc}")
    out_dir = Path(args.out)
    manifest = generate_synthetic(spec, out_dir)
    summary = summarize(manifest)
    return CommandResult(
        0,
        f"generated {len(manifest.records)} paintings under {out_dir} "
        f"(child={summary.by_source['child']}, artist={summary.by_source['artist']})",
        artifacts_written=[out_dir / "manifest.csv"],
    )


def cmd_split(args) -> CommandResult:
    from .dataset import ManifestError, load_manifest, split_every_kth

    if args.every < 2:
        return CommandResult(1, f"--every must be at least 2 (got {args.every}): "
                                "k=1 would put every painting in the test set")
    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as exc:
        return CommandResult(1, f"manifest invalid:\n{exc}")
    result = split_every_kth(manifest, args.every)
    artifacts = []
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            json.dump(
                {
                    "k": args.every,
                    "train": list(result.train_ids),
                    "test": list(result.test_ids),
                    "counts_by_source": result.counts_by_source,
                },
                fh, indent=2,
            )
            fh.write("\n")
        artifacts.append(out)
    per_source = ", ".join(
        f"{source}: {c['train']} train / {c['test']} test"
        for source, c in result.counts_by_source.items()
    )
    return CommandResult(0, f"{result.summary_line()} ({per_source})", artifacts)


def _split_records(manifest, every: int):
    from .dataset import split_every_kth

    split_every_kth(manifest, every)
    train = [r for r in manifest.records if r.split == "train"]
    test = [r for r in manifest.records if r.split == "test"]
    return train, test


def cmd_train(args) -> CommandResult:
    import torch  # noqa: F401  (fail early if torch is broken)

    from . import model as model_mod
    from .dataset import ManifestError, load_manifest
    from .preprocess import PreprocessConfig
    from .training import Hyperparams, TrainingDiverged, train

    config_path = Path(args.config)
    if not config_path.exists():
        return CommandResult(1, f"config file not found: {config_path}")
    try:
        cfg = _load_config_file(config_path)
    except Exception as exc:
        return CommandResult(1, f"cannot parse config {config_path}: {exc}")

    try:
        manifest = load_manifest(cfg["manifest"] if Path(cfg["manifest"]).is_absolute()
                                 else config_path.parent / cfg["manifest"])
    except KeyError:
        return CommandResult(1, "config must name a 'manifest'")
    except ManifestError as exc:
        return CommandResult(1, f"manifest invalid:\n{exc}")

    backbone = cfg.get("backbone", "mini")
    try:
        hp = Hyperparams(**cfg.get("hyperparams", {}))
        pre_cfg = PreprocessConfig.for_backbone(backbone, **cfg.get("preprocess", {}))
        model_config = (model_mod.ModelConfig.mini(freeze_backbone=cfg.get("freeze_backbone", False))
                        if backbone == "mini"
                        else model_mod.ModelConfig.pretrained_b1(
                            freeze_backbone=cfg.get("freeze_backbone", False)))
    except ValueError as exc:
        return CommandResult(1, f"bad config: {exc}")

    out_dir = Path(cfg.get("out_dir") or args.out_dir or "runs/latest")
    start_epoch = 0
    resume = cfg.get("resume")
    try:
        if resume:
            resume_path = Path(resume) if Path(resume).is_absolute() else config_path.parent / resume
            model = model_mod.load(resume_path)
            start_epoch = model_mod.read_meta(resume_path)["training_meta"]["epochs_completed"]
        else:
            model = model_mod.build(model_config, init_seed=cfg.get("init_seed", args.seed))
    except model_mod.PretrainedWeightsUnavailable as exc:
        return CommandResult(2, str(exc))
    except model_mod.CheckpointError as exc:
        return CommandResult(1, f"cannot resume: {exc}")

    every = cfg.get("split_every")
    if every:
        train_records, test_records = _split_records(manifest, int(every))
    else:
        train_records = [r for r in manifest.records if r.split != "test"]
        test_records = [r for r in manifest.records if r.split == "test"]

    try:
        checkpoint, training_log = train(
            model, train_records, hp, pre_cfg,
            test_records=test_records or None,
            out_dir=out_dir,
            start_epoch=start_epoch,
            augment_test=bool(cfg.get("augment_test", False)),
        )
    except TrainingDiverged as exc:
        return CommandResult(2, f"training diverged: {exc}")
    except ValueError as exc:
        return CommandResult(1, str(exc))

    log_path = training_log.write_jsonl(out_dir / "training_log.jsonl")
    artifacts = [log_path]
    if checkpoint:
        artifacts = [checkpoint.weights_path, checkpoint.meta_path, log_path]
    last = training_log.entries[-1]
    return CommandResult(
        0,
        f"trained {len(training_log.entries)} epoch(s), "
        f"{training_log.total_steps} step(s), final train loss {last.train_loss:.4f}",
        artifacts,
    )


def cmd_evaluate(args) -> CommandResult:
    from . import model as model_mod
    from .dataset import ManifestError, load_manifest
    from .evaluation import (evaluate_model, write_report_json,
                             write_report_markdown, write_scatter_png)
    from .preprocess import PreprocessConfig

    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as exc:
        return CommandResult(1, f"manifest invalid:\n{exc}")
    try:
        model = model_mod.load(args.checkpoint)
    except model_mod.CheckpointError as exc:
        return CommandResult(1, str(exc))

    if args.every:
        _, records = _split_records(manifest, args.every)
    else:
        records = manifest.records
    if not records:
        return CommandResult(1, "no records to evaluate")
    pre_cfg = PreprocessConfig.for_backbone(model.config.backbone)
    try:
        report = evaluate_model(model, records, pre_cfg)
    except ValueError as exc:
        return CommandResult(1, str(exc))

    out_dir = Path(args.out_dir or "reports")
    artifacts = [
        write_report_json(report, out_dir / "report.json"),
        write_report_markdown(report, out_dir / "report.md"),
        write_scatter_png(report, out_dir / "scatter.png"),
    ]
    return CommandResult(
        0,
        f"n={report.n} r={report.pearson_r:.4f} "
        f"CI[{report.ci95[0]:.4f}, {report.ci95[1]:.4f}] "
        f"R2={report.r_squared:.4f} MAPE={report.mape_percent:.2f}% "
        f"avg accuracy={report.average_accuracy_percent:.2f}%",
        artifacts,
    )


def cmd_score(args) -> CommandResult:
    import numpy as np
    from PIL import Image, UnidentifiedImageError

    from . import model as model_mod
    from .preprocess import PreprocessConfig, pipeline
    from .rubric import COMPONENT_NAMES

    try:
        model = model_mod.load(args.checkpoint)
    except model_mod.CheckpointError as exc:
        return CommandResult(1, str(exc))
    try:
        with Image.open(args.image) as img:
            rgb = np.asarray(img.convert("RGB"))
    except (FileNotFoundError, UnidentifiedImageError) as exc:
        return CommandResult(1, f"cannot read image {args.image}: {exc}")
    pre_cfg = PreprocessConfig.for_backbone(model.config.backbone)
    vector = model_mod.predict(model, np.stack([pipeline(rgb, pre_cfg)]))[0]
    lines = [f"{name}: {value:.2f}" for name, value in
             zip(COMPONENT_NAMES, vector.clamped_components)]
    lines.append(f"total: {vector.clamped_total:.2f}")
    return CommandResult(0, "\n".join(lines))


def cmd_report(args) -> CommandResult:
    from .reference_tables import replay_lines

    if not args.tables:
        return CommandResult(1, "nothing to report: pass --tables")
    return CommandResult(0, "\n".join(replay_lines()))


def cmd_serve(args) -> CommandResult:
    import uvicorn

    from .dataset import ManifestError, load_manifest
    from .service import create_app

    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as exc:
        return CommandResult(1, f"manifest invalid:\n{exc}")
    ledger = args.ledger or str(Path(args.manifest).parent / "ratings.jsonl")
    app = create_app(
        manifest,
        ledger_path=ledger,
        checkpoint_dir=args.checkpoint_dir,
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return CommandResult(0, "server stopped")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paintscore",
        description="Train, evaluate, and serve the painting creativity scorer.",
    )
    parser.add_argument("--seed", type=int, default=0, help="global default seed")
    parser.add_argument("--out-dir", default=None, help="default output directory")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a manifest and write canonical JSON")
    p.add_argument("--manifest", required=True)
    p.add_argument("--images", default=None, help="root for relative image paths")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--side", type=int, default=72)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="deterministic every-kth train/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--every", type=int, required=True)
    p.add_argument("--out", default=None, help="write the assignment as JSON")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fine-tune from a YAML/JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="metrics report for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--every", type=int, default=None,
                   help="evaluate the every-kth test split instead of all records")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("score", help="score a single image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="replay shipped reference tables")
    p.add_argument("--tables", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the rater workbench service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ledger", default=None)
    p.add_argument("--checkpoint-dir", default=None)
    p.add_argument("--ui", default=None, help="static directory with the workbench UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; the contract is 1 for validation
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=getattr(logging, args.log_level))
    try:
        result: CommandResult = args.func(args)
    except Exception as exc:  # anything unplanned is a runtime failure
        log.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(result.summary)
    for artifact in result.artifacts_written:
        print(f"wrote {artifact}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
