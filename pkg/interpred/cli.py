from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Sequence
import argparse
import json
import logging
import os
import sys

import matplotlib.pyplot as plt

from interpred import __version__
from interpred.config.models import FullConfig, full_config_to_dict, load_config, validate_config
from interpred.context.features import make_extractor
from interpred.data.features import VideoRecord, load_feature_file, write_feature_file
from interpred.data.io import save_dataframe, write_json
from interpred.data.videos import list_video_dirs, read_video_dir, write_video_dir
from interpred.evaluation.loso import loso_cv
from interpred.evaluation.protocol import (
    NUM_RATIOS,
    RATIOS,
    evaluate_methods,
    observed_length,
    predictions_frame,
    tables_frame,
)
from interpred.evaluation.synthetic import generate_synthetic
from interpred.fusion.ranking import load_weights, save_weights
from interpred.models.checkpoint import load_checkpoint, save_checkpoint
from interpred.models.classifiers import MODEL_ORDER, Classifier
from interpred.pipeline.engine import (
    Bundle,
    expected_arch,
    featurize_raw,
    fit_fusion,
    split_dataset,
    train_bundle,
    train_models,
)
from interpred.prediction.sequence import predict_sequence
from interpred.utils.hashing import config_hash, file_hash
from interpred.viz.heatmaps import plot_score_heatmap
from interpred.viz.plots import plot_ratio_curves

logger = logging.getLogger("interpred")

LOG_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO}
BASELINE_FILES = {"sp_tp_rank": "weights_sp_tp_rank.json"}


def setup_logging() -> None:
    raw = os.environ.get("IP_LOG", "info").lower()
    logging.basicConfig(
        level=LOG_LEVELS.get(raw, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    )
    if raw not in LOG_LEVELS:
        logger.warning("unknown IP_LOG value '%s', using info", raw)


def _config(args: argparse.Namespace) -> FullConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
        validate_config(cfg)
    return cfg


def _videos_dir(cfg: FullConfig, out: Path) -> Path:
    return Path(cfg.dataset.videos_dir) if cfg.dataset.videos_dir else out / "videos"


def _features_path(cfg: FullConfig, out: Path) -> Path:
    return Path(cfg.dataset.feature_file) if cfg.dataset.source == "feature_file" else out / "features.jsonl"


def _records(cfg: FullConfig, out: Path) -> list[VideoRecord]:
    path = _features_path(cfg, out)
    if not path.exists():
        raise FileNotFoundError(f"feature file not found: {path} (run 'interpred featurize' first)")
    records = load_feature_file(path)
    if not records:
        raise ValueError(f"feature file {path} holds no videos")
    return records


def _num_classes(records: Sequence[VideoRecord]) -> int:
    return max(v.label for v in records)


def _checkpoint_dir(args: argparse.Namespace, out: Path) -> Path:
    return Path(args.checkpoints) if args.checkpoints else out / "checkpoints"


def _load_models(cfg: FullConfig, records: Sequence[VideoRecord], ckpt_dir: Path) -> dict[str, Classifier]:
    dim, m = records[0].dim, _num_classes(records)
    models = {}
    for kind in MODEL_ORDER:
        path = ckpt_dir / f"{kind}.json"
        if not path.exists():
            raise FileNotFoundError(f"checkpoint not found: {path} (run 'interpred train' first)")
        models[kind] = load_checkpoint(path, expected_arch(kind, dim, m, cfg.model))
    return models


def _weights_path(args: argparse.Namespace, out: Path) -> Path:
    path = Path(args.weights) if args.weights else out / "weights.json"
    if not path.exists():
        raise FileNotFoundError(f"weights file not found: {path} (run 'interpred fuse' first)")
    return path


def _bundle(args: argparse.Namespace, cfg: FullConfig, records: Sequence[VideoRecord], out: Path) -> Bundle:
    weights_path = _weights_path(args, out)
    baselines = {
        name: load_weights(weights_path.parent / fname)
        for name, fname in BASELINE_FILES.items()
        if (weights_path.parent / fname).exists()
    }
    return Bundle(
        models=_load_models(cfg, records, _checkpoint_dir(args, out)),
        weights=load_weights(weights_path),
        baselines=baselines,
    )


def cmd_synth(args: argparse.Namespace) -> int:
    cfg, out = _config(args), Path(args.out)
    ds = cfg.dataset
    videos = generate_synthetic(
        ds.num_classes, ds.videos_per_class, ds.frames_per_video, cfg.seed,
        groups=ds.groups, width=ds.width, height=ds.height,
    )
    root = _videos_dir(cfg, out)
    for video in videos:
        write_video_dir(video, root)
    logger.info("wrote %d videos under %s", len(videos), root)
    return 0


def cmd_featurize(args: argparse.Namespace) -> int:
    cfg, out = _config(args), Path(args.out)
    extractor = make_extractor(cfg.extractor)
    dirs = list_video_dirs(_videos_dir(cfg, out))
    if not dirs:
        raise ValueError(f"no videos under {_videos_dir(cfg, out)}")
    records = (featurize_raw(read_video_dir(d), extractor, cfg.extractor) for d in dirs)
    write_feature_file(records, out / "features.jsonl")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg, out = _config(args), Path(args.out)
    records = _records(cfg, out)
    split = split_dataset(records, cfg)
    models = train_models(split.train, cfg, _num_classes(records))
    ckpt_dir, digest = _checkpoint_dir(args, out), config_hash(cfg)
    for kind, model in models.items():
        save_checkpoint(model, ckpt_dir / f"{kind}.json", digest)
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    cfg, out = _config(args), Path(args.out)
    records = _records(cfg, out)
    split = split_dataset(records, cfg)
    models = _load_models(cfg, records, _checkpoint_dir(args, out))
    weights, baselines = fit_fusion(models, split.validation, cfg)
    target = Path(args.weights) if args.weights else out / "weights.json"
    digest = config_hash(cfg)
    save_weights(weights, target, digest)
    for name, fname in BASELINE_FILES.items():
        if name in baselines:
            save_weights(baselines[name], target.parent / fname, digest)
    return 0


def _write_plot(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    logger.info("wrote %s", path)


def cmd_eval(args: argparse.Namespace) -> int:
    cfg, out = _config(args), Path(args.out)
    records = _records(cfg, out)
    report = {
        "config_hash": config_hash(cfg),
        "features_sha256": file_hash(_features_path(cfg, out)),
        "config": full_config_to_dict(cfg),
        "mode": cfg.evaluation.mode,
    }

    if cfg.evaluation.mode == "loso":
        m = _num_classes(records)
        result = loso_cv(records, lambda train: train_bundle(train, cfg, m))
        tables = result.method_tables
        report["folds"] = [
            {
                "group": fold.group,
                "w": dict(zip(MODEL_ORDER, fold.weights.w.tolist())),
                "tables": {name: t.accuracy.tolist() for name, t in fold.tables.items()},
            }
            for fold in result.folds
        ]
        save_dataframe(result.to_frame(), out / "loso_folds.csv")
    else:
        bundle = _bundle(args, cfg, records, out)
        test = split_dataset(records, cfg).test
        tables = evaluate_methods(test, bundle.models, bundle.methods())
        report["w"] = dict(zip(MODEL_ORDER, bundle.weights.w.tolist()))
        report["test_videos"] = [v.id for v in test]
        save_dataframe(predictions_frame(test, bundle.models, bundle.weights), out / "predictions.csv")

    report["ratios"] = list(RATIOS)
    report["tables"] = {name: t.accuracy.tolist() for name, t in tables.items()}
    save_dataframe(tables["fused"].to_frame(), out / "ratio_table.csv")
    save_dataframe(tables_frame(tables), out / "method_tables.csv")
    write_json(report, out / "report.json")
    logger.info("fused accuracy by ratio: %s", [round(a, 3) for a in tables["fused"].accuracy])

    if args.plot:
        _write_plot(plot_ratio_curves(tables), out / "ratio_curves.png")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    cfg, out = _config(args), Path(args.out)
    if args.video is None:
        raise ValueError("predict needs --video <id>")
    if not (1 <= args.ratio <= NUM_RATIOS):
        raise ValueError(f"--ratio must be in [1, {NUM_RATIOS}], got {args.ratio}")
    records = _records(cfg, out)
    matches = [v for v in records if v.id == args.video]
    if not matches:
        raise ValueError(f"video '{args.video}' is not in the feature file")
    video = matches[0]
    bundle = _bundle(args, cfg, records, out)
    upto = observed_length(video.n, args.ratio)
    p_star, decisions = predict_sequence(bundle.models, bundle.weights, video, upto)
    result = {
        "video_id": video.id,
        "label": video.label,
        "ratio": RATIOS[args.ratio - 1],
        "observed_frames": upto,
        "p_star": p_star,
        "correct": p_star == video.label,
        "steps": [{"t": d.t, "p_t": d.p_t, "c_t": d.c_t.tolist()} for d in decisions],
    }
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")

    if args.plot:
        title = f"{video.id} (ratio {RATIOS[args.ratio - 1]}, p* = {p_star})"
        _write_plot(plot_score_heatmap(decisions, title), out / f"scores_{video.id}.png")
    return 0


COMMANDS = {
    "synth": (cmd_synth, "generate the synthetic two-actor video set"),
    "featurize": (cmd_featurize, "raw frames -> context sequences and flow features"),
    "train": (cmd_train, "train the four classifiers"),
    "fuse": (cmd_fuse, "learn the non-negative score-fusion weights"),
    "eval": (cmd_eval, "accuracy at the ten observation ratios"),
    "predict": (cmd_predict, "predict one video from a partial observation"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interpred", description="Human interaction prediction from partial videos.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        if name in ("train", "fuse", "eval", "predict"):
            p.add_argument("--checkpoints", default=None, help="checkpoint directory (default <out>/checkpoints)")
        if name in ("fuse", "eval", "predict"):
            p.add_argument("--weights", default=None, help="weights file (default <out>/weights.json)")
        if name in ("eval", "predict"):
            p.add_argument("--plot", action="store_true", help="also write a PNG figure")
        if name == "predict":
            p.add_argument("--video", default=None, help="video id")
            p.add_argument("--ratio", type=int, default=NUM_RATIOS, help="observation ratio index 1..10")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except Exception as exc:
        logger.error("%s failed: %s", args.command, exc)
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2 if isinstance(exc, (ValueError, FileNotFoundError)) else 1


if __name__ == "__main__":
    sys.exit(main())
