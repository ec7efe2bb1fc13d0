"""Command-line entry point.

Commands: segment, evaluate, sweep-threshold, simulate, validate. Every
command is a pure function of its config file, flags, input files, and seed;
re-running produces byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import kernels
from .containers import (
    EMBEDDING_MAGIC,
    SEGMAP_MAGIC,
    read_embedding,
    read_segmap,
    write_segmap,
)
from .errors import VfsegError
from .manifest import load_manifest
from .perturb import sweep_perturbation
from .runner import (
    ImagePrediction,
    evaluate_predictions,
    resolve_tags,
    segment_dataset,
    sweep_threshold,
)
from .segmenter import WEIGHTS_MAGIC, random_weights, read_weights


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--manifest", help="dataset manifest path")
    p.add_argument("--weights", help="aggregation weights file (VFSW)")
    p.add_argument("--init-seed", type=int, help="seed a random weight init instead of a file")
    p.add_argument("--agg-iters", type=int, default=0, help="iterations for seeded init")
    p.add_argument("--guidance-dim", type=int, default=3, help="guidance width for seeded init")
    p.add_argument(
        "--tagger",
        default="oracle",
        help="tag source: oracle | file:PATH (per-image class lists)",
    )
    p.add_argument("--tsbert", type=float, default=0.5, help="soft-assignment threshold")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed for simulation")


def _load_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg = json.load(f)
    for key in (
        "manifest",
        "weights",
        "init_seed",
        "agg_iters",
        "guidance_dim",
        "tagger",
        "tsbert",
        "out",
        "threads",
        "seed",
    ):
        val = getattr(args, key, None)
        if val is not None and not (key in cfg and val == _DEFAULTS.get(key)):
            cfg[key] = val
    if "manifest" not in cfg or not cfg["manifest"]:
        raise VfsegError("a manifest is required (--manifest or config)")
    if not 0.0 <= float(cfg.get("tsbert", 0.5)) <= 1.0:
        raise VfsegError("tsbert must lie in [0, 1]")
    return cfg


_DEFAULTS = {
    "tagger": "oracle",
    "tsbert": 0.5,
    "threads": 1,
    "seed": 0,
    "agg_iters": 0,
    "guidance_dim": 3,
}


def _load_weights(cfg: dict, manifest):
    if cfg.get("weights"):
        return read_weights(cfg["weights"])
    if cfg.get("init_seed") is not None and cfg.get("agg_iters", 0) > 0:
        return random_weights(
            seed=int(cfg["init_seed"]),
            num_iterations=int(cfg["agg_iters"]),
            embed_dim=manifest.text_bank.dim,
            guidance_dim=int(cfg.get("guidance_dim", 3)),
        )
    return None


def _tags(cfg: dict, manifest) -> dict[str, list[str]]:
    tagger = cfg.get("tagger", "oracle")
    if tagger == "oracle":
        return resolve_tags(manifest, "oracle")
    if tagger.startswith("file:"):
        return resolve_tags(manifest, "file", tagger[len("file:") :])
    if tagger == "file":
        return resolve_tags(manifest, "file")
    raise VfsegError(f"unknown tagger source {tagger!r}")


def _config_echo(cfg: dict, weights) -> dict:
    return {
        "manifest": str(cfg["manifest"]),
        "tagger": cfg.get("tagger", "oracle"),
        "weights_provenance": weights.provenance if weights is not None else "none (K=0)",
        "seed": int(cfg.get("seed", 0)),
        "backend": kernels.BACKEND,
    }


def _report_failures(failures) -> None:
    for f in failures:
        print(f"error: image {f.image_id}: {f.error}", file=sys.stderr)


def cmd_segment(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out_dir = Path(cfg.get("out") or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(cfg["manifest"])
    weights = _load_weights(cfg, manifest)
    tags = _tags(cfg, manifest)
    predictions, failures = segment_dataset(
        manifest, tags, weights, int(cfg.get("threads", 1))
    )
    index = {}
    for image_id in sorted(predictions):
        pred = predictions[image_id]
        rel = f"pred_{image_id}.segm"
        write_segmap(pred.segmap, out_dir / rel)
        index[image_id] = {"pred_path": rel, "classes": pred.active_classes}
    doc = {"config": _config_echo(cfg, weights), "images": index}
    with open(out_dir / "predictions.json", "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    _report_failures(failures)
    return 1 if failures else 0


def _load_predictions(pred_dir: Path) -> tuple[dict, dict[str, ImagePrediction]]:
    with open(pred_dir / "predictions.json", "r", encoding="utf-8") as f:
        doc = json.load(f)
    preds = {}
    for image_id, rec in doc["images"].items():
        preds[image_id] = ImagePrediction(
            image_id=image_id,
            segmap=read_segmap(pred_dir / rec["pred_path"]),
            active_classes=list(rec["classes"]),
        )
    return doc, preds


def _predictions_for(cfg: dict, args, manifest, weights):
    """Stored predictions when --pred is given, otherwise segment in memory."""
    pred_dir = getattr(args, "pred", None) or cfg.get("pred")
    if pred_dir:
        _, preds = _load_predictions(Path(pred_dir))
        return preds, []
    tags = _tags(cfg, manifest)
    return segment_dataset(manifest, tags, weights, int(cfg.get("threads", 1)))


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    manifest = load_manifest(cfg["manifest"])
    weights = _load_weights(cfg, manifest)
    predictions, failures = _predictions_for(cfg, args, manifest, weights)
    _report_failures(failures)
    if failures:
        return 1
    report = evaluate_predictions(
        manifest, predictions, float(cfg.get("tsbert", 0.5)), _config_echo(cfg, weights)
    )
    out_dir = Path(cfg.get("out") or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(out_dir / "per_class_iou.csv", "w", encoding="utf-8") as f:
        f.write(report.per_class_csv())
    print(
        f"hard_miou={report.hard_miou:.6f} soft_miou={report.soft_miou:.6f} "
        f"acc={report.tagging.accuracy:.2f}"
    )
    return 0


def cmd_sweep_threshold(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    manifest = load_manifest(cfg["manifest"])
    weights = _load_weights(cfg, manifest)
    predictions, failures = _predictions_for(cfg, args, manifest, weights)
    _report_failures(failures)
    if failures:
        return 1
    thresholds = [float(t) for t in (args.thresholds or "0,0.25,0.5,0.75,1.0").split(",")]
    rows = sweep_threshold(manifest, predictions, thresholds, _config_echo(cfg, weights))
    out_dir = Path(cfg.get("out") or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["tsbert,soft_miou,matched_names"]
    for r in rows:
        lines.append(f"{r['tsbert']!r},{r['soft_miou']!r},{r['matched_names']}")
    (out_dir / "threshold_sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    manifest = load_manifest(cfg["manifest"])
    weights = _load_weights(cfg, manifest)
    drop_rates = [float(x) for x in (args.drop_rates or "0").split(",")]
    fp_counts = [int(x) for x in (args.fp_counts or "0").split(",")]
    grid = [(d, f) for d in drop_rates for f in fp_counts]
    rows = sweep_perturbation(
        manifest,
        grid,
        weights,
        float(cfg.get("tsbert", 0.5)),
        master_seed=int(cfg.get("seed", 0)),
        threads=int(cfg.get("threads", 1)),
    )
    out_dir = Path(cfg.get("out") or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# master_seed={int(cfg.get('seed', 0))}",
        "drop_rate,fp_count,soft_miou,hard_miou,acc,fp_mean,fn_mean",
    ]
    for r in rows:
        lines.append(
            f"{r['drop_rate']!r},{r['fp_count']},{r['soft_miou']!r},"
            f"{r['hard_miou']!r},{r['acc']!r},{r['fp_mean']!r},{r['fn_mean']!r}"
        )
    (out_dir / "simulation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    """Format lint: identify each file by magic and run its reader."""
    failures = 0
    for path in args.paths:
        try:
            with open(path, "rb") as f:
                magic = f.read(4)
            if magic == EMBEDDING_MAGIC:
                c = read_embedding(path)
                detail = f"embedding dims={list(c.dims)} provenance={c.provenance!r}"
            elif magic == SEGMAP_MAGIC:
                m = read_segmap(path)
                detail = f"segmap {m.height}x{m.width}"
            elif magic == WEIGHTS_MAGIC:
                w = read_weights(path)
                detail = (
                    f"weights K={w.num_iterations} d={w.embed_dim} g={w.guidance_dim}"
                )
            elif path.endswith(".json"):
                from .containers import load_tags

                tags = load_tags(path)
                detail = f"tags for {len(tags)} images"
            else:
                raise VfsegError(f"unrecognized magic {magic!r}")
            print(f"ok: {path}: {detail}")
        except (VfsegError, OSError, ValueError) as err:
            print(f"fail: {path}: {err}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vfseg",
        description="Vocabulary-free segmentation engine and evaluation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment every manifest image")
    _add_common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="hard/soft mIoU and tagging stats")
    _add_common(p)
    p.add_argument("--pred", help="directory holding predictions.json from `segment`")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep-threshold", help="soft-assignment threshold ablation")
    _add_common(p)
    p.add_argument("--pred", help="directory holding predictions.json from `segment`")
    p.add_argument("--thresholds", help="comma-separated thresholds in [0, 1]")
    p.set_defaults(func=cmd_sweep_threshold)

    p = sub.add_parser("simulate", help="tagger false-negative/false-positive sweep")
    _add_common(p)
    p.add_argument("--drop-rates", help="comma-separated drop probabilities")
    p.add_argument("--fp-counts", help="comma-separated per-image false-positive counts")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="format lint for container files")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VfsegError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
