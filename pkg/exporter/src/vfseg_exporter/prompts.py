"""Prompt templates and the versioned language-model prompt resources."""

from __future__ import annotations

from importlib import resources

PLAIN_TEMPLATE = "A photo of a {class}"
ADJECTIVE_TEMPLATE = "A photo of a {adjective} {class}"


def _resource(name: str) -> str:
    return (
        resources.files("vfseg_exporter")
        .joinpath("resources", name)
        .read_text(encoding="utf-8")
        .rstrip("\n")
    )


def class_grouping_prompt(class_list: list[str]) -> str:
    return _resource("class_grouping_prompt.txt").replace(
        "<dataset-class-list>", ", ".join(class_list)
    )


def class_adjective_prompt(group: list[str]) -> str:
    return _resource("class_adjective_prompt.txt").replace("<group>", ", ".join(group))


def instance_adjective_prompt(class_list: list[str]) -> str:
    return _resource("instance_adjective_prompt.txt").replace(
        "<dataset-class-list>", ", ".join(class_list)
    )


def render_prompts(
    names: list[str],
    adjectives: dict[str, list[str]] | None = None,
) -> dict[str, list[str]]:
    """Per class: the plain prompt, or one prompt per adjective when given."""
    out: dict[str, list[str]] = {}
    for name in names:
        adjs = (adjectives or {}).get(name)
        if adjs:
            out[name] = [
                ADJECTIVE_TEMPLATE.replace("{adjective}", a).replace("{class}", name)
                for a in adjs
            ]
        else:
            out[name] = [PLAIN_TEMPLATE.replace("{class}", name)]
    return out
