"""Adjective generation via a language-model callable.

The model reply is expected in bracketed-list form, e.g.
``{giraffe: [tall, brown, spotted, yellow], tree: [tall, green]}``.
Unparseable replies are surfaced verbatim, never silently dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from .prompts import class_adjective_prompt, instance_adjective_prompt

_ENTRY = re.compile(r"([^\[\]{}:,]+):\s*\[([^\]]*)\]")


class AdjectiveParseError(ValueError):
    def __init__(self, message: str, raw_reply: str):
        super().__init__(f"{message}; raw reply: {raw_reply!r}")
        self.raw_reply = raw_reply


@dataclass
class AdjectiveResult:
    adjectives: dict[str, list[str]]
    missing: list[str] = field(default_factory=list)


def parse_adjective_reply(reply: str) -> dict[str, list[str]]:
    entries = _ENTRY.findall(reply)
    if not entries:
        raise AdjectiveParseError("no name: [adjectives] entries found", reply)
    out: dict[str, list[str]] = {}
    for name, body in entries:
        adjs = [a.strip() for a in body.split(",") if a.strip()]
        out[name.strip()] = adjs
    return out


def generate_adjectives(
    names: list[str],
    level: str,
    llm: Callable[[str], str],
    image_id: str | None = None,
) -> AdjectiveResult:
    """Query the language model with the stored prompt for the given level
    ("class" or "instance") and parse its reply into a name -> adjectives map.

    Names absent from the reply are reported in ``missing``; instance-level
    generation requires an image reference.
    """
    if level == "class":
        prompt = class_adjective_prompt(names)
    elif level == "instance":
        if image_id is None:
            raise ValueError("instance-level adjectives require an image")
        prompt = instance_adjective_prompt(names)
    else:
        raise ValueError(f"unknown level {level!r}")
    reply = llm(prompt)
    adjectives = parse_adjective_reply(reply)
    missing = [n for n in names if n not in adjectives]
    return AdjectiveResult(adjectives=adjectives, missing=missing)
