"""Exporter command line: one-shot batch jobs producing engine containers."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adjectives import AdjectiveParseError, generate_adjectives
from .encoders import StubTagger, get_image_encoder, get_text_encoder
from .jobs import export_image_embeddings, export_tags, export_text_embeddings


def cmd_export_images(args) -> int:
    encoder = get_image_encoder(args.encoder, dim=args.dim, patch=args.patch)
    written = export_image_embeddings(args.images, args.out, encoder)
    for p in written:
        print(p)
    return 0


def cmd_export_text(args) -> int:
    names = [
        line.strip()
        for line in Path(args.names).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    adjectives = None
    if args.adjectives:
        with open(args.adjectives, "r", encoding="utf-8") as f:
            adjectives = json.load(f)
    encoder = get_text_encoder(args.encoder, dim=args.dim)
    export_text_embeddings(names, args.out, encoder, adjectives)
    print(args.out)
    return 0


def cmd_export_tags(args) -> int:
    with open(args.lookup, "r", encoding="utf-8") as f:
        lookup = json.load(f)
    result = export_tags(args.images, args.out, StubTagger(lookup))
    for image_id, err in sorted(result.failures.items()):
        print(f"error: {image_id}: {err}", file=sys.stderr)
    print(args.out)
    return 0


def cmd_gen_adjectives(args) -> int:
    names = [
        line.strip()
        for line in Path(args.names).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    reply_path = Path(args.reply)

    def llm(prompt: str) -> str:
        # offline mode: the prompt is printed for the operator, the reply is
        # read from a file produced by the external model
        print(prompt, file=sys.stderr)
        return reply_path.read_text(encoding="utf-8")

    try:
        result = generate_adjectives(names, args.level, llm, image_id=args.image)
    except AdjectiveParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    doc = {"adjectives": result.adjectives, "missing": result.missing}
    Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if result.missing:
        print(f"error: names missing from reply: {result.missing}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfseg-export")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("images", help="dense image embedding containers")
    p.add_argument("--images", required=True, help="input image directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--encoder", default="stub")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--patch", type=int, default=16)
    p.set_defaults(func=cmd_export_images)

    p = sub.add_parser("text", help="class-name text embedding bank")
    p.add_argument("--names", required=True, help="newline-separated class names")
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", default="stub", help="stub | clip | sbert")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--adjectives", help="JSON map name -> adjective list")
    p.set_defaults(func=cmd_export_text)

    p = sub.add_parser("tags", help="per-image tag file")
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lookup", required=True, help="JSON map image id -> tags")
    p.set_defaults(func=cmd_export_tags)

    p = sub.add_parser("adjectives", help="language-model adjective generation")
    p.add_argument("--names", required=True)
    p.add_argument("--level", choices=["class", "instance"], default="class")
    p.add_argument("--image", help="image id (required for instance level)")
    p.add_argument("--reply", required=True, help="file holding the model reply")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_adjectives)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
