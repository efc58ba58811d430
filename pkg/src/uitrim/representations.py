"""Prompt renderers for view lists, baseline UI representations, and prompt assembly."""

from __future__ import annotations

import html
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .interpreter import ViewList
from .tokens import DEFAULT_COUNTER, TokenCounter
from .tree import UINode, UITree

VIEW_KINDS = ("hierarchical", "dfs_flat", "random")
TREE_KINDS = ("ops", "leaf", "flattened")
KIND_ALIASES = {"dfs": "dfs_flat"}
COMPONENTS = ("system", "action_space", "task", "ui", "context", "format")


class MissingSeed(ValueError):
    pass


@dataclass(frozen=True)
class RenderedRepresentation:
    kind: str
    lines: tuple
    token_count: int
    seed: Optional[int] = None

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


def _finish(kind: str, lines, counter: TokenCounter, seed=None) -> RenderedRepresentation:
    lines = tuple(lines)
    return RenderedRepresentation(kind, lines, counter.count("\n".join(lines)), seed)


def render(views: ViewList, kind: str = "hierarchical", seed: Optional[int] = None,
           counter: TokenCounter = DEFAULT_COUNTER) -> RenderedRepresentation:
    kind = KIND_ALIASES.get(kind, kind)
    if kind == "hierarchical":
        return _finish(kind, ("  " * v.depth + v.line() for v in views.views), counter)
    if kind == "dfs_flat":
        return _finish(kind, (v.line() for v in views.views), counter)
    if kind == "random":
        if seed is None:
            raise MissingSeed("random ordering needs a seed")
        lines = [v.line() for v in views.views]
        random.Random(seed).shuffle(lines)
        return _finish(kind, lines, counter, seed)
    raise ValueError(f"unknown view rendering {kind!r}")


# -- baselines ---------------------------------------------------------------


def leaf_category(n: UINode) -> str:
    """Five-way element class; editable wins because input fields are usually clickable too."""
    if "editable" in n.flags:
        return "input"
    if "checkable" in n.flags:
        return "checkbox"
    if n.flags & {"clickable", "long_clickable"}:
        return "button"
    tag = n.tag.lower()
    if "image" in tag or tag == "img":
        return "image"
    return "text"


def label_of(n: UINode) -> str:
    """Visible label of a node: its own text, else its description, else descendant texts."""
    if n.text:
        return n.text
    desc = n.attributes.get("content-desc", "")
    if desc:
        return desc
    return " ".join(d.text for d in n.walk() if d is not n and d.text)


def _html(category: str, node_id: int, text: str) -> str:
    return f"<{category} id={node_id}>{html.escape(text, quote=False)}</{category}>"


def baseline_leaf(tree: UITree, counter: TokenCounter = DEFAULT_COUNTER) -> RenderedRepresentation:
    lines = [_html(leaf_category(n), n.node_id, n.text) for n in tree.nodes() if n.is_leaf]
    return _finish("leaf", lines, counter)


def baseline_ops(tree: UITree, counter: TokenCounter = DEFAULT_COUNTER) -> RenderedRepresentation:
    lines: list = []
    last_key = None
    for n in tree.nodes():
        if not (n.interactive and "visible" in n.flags):
            continue
        category = leaf_category(n)
        label = label_of(n)
        key = (category, label)
        if key == last_key:
            continue
        last_key = key
        lines.append(_html(category, n.node_id, label))
    return _finish("ops", lines, counter)


def flattened_category(n: UINode) -> Optional[str]:
    if n.flags & {"clickable", "long_clickable"}:
        return "clickable"
    if "editable" in n.flags:
        return "input"
    if "scrollable" in n.flags:
        return "scrollable"
    if n.text:
        return "static"
    return None


_SECTIONS = (
    ("clickable", "Clickable items"),
    ("input", "Text inputs"),
    ("scrollable", "Scrollable views"),
    ("static", "Static text"),
)


def baseline_flattened(tree: UITree,
                       counter: TokenCounter = DEFAULT_COUNTER) -> RenderedRepresentation:
    groups: dict = {name: [] for name, _ in _SECTIONS}
    for n in tree.nodes():
        cat = flattened_category(n)
        if cat is not None:
            groups[cat].append(n)
    total = sum(len(g) for g in groups.values())
    counts = ", ".join(f"{len(groups[name])} {title.lower()}" for name, title in _SECTIONS)
    lines = [f"Screen with {total} elements: {counts}"]
    for name, title in _SECTIONS:
        members = groups[name]
        if not members and name != "static":
            continue
        lines.append(f"{title}:")
        for n in members:
            lines.append(f"- {label_of(n) or n.tag} [id={n.node_id}]")
    return _finish("flattened", lines, counter)


def render_tree(tree: UITree, kind: str, counter: TokenCounter = DEFAULT_COUNTER
                ) -> RenderedRepresentation:
    if kind == "ops":
        return baseline_ops(tree, counter)
    if kind == "leaf":
        return baseline_leaf(tree, counter)
    if kind == "flattened":
        return baseline_flattened(tree, counter)
    raise ValueError(f"unknown baseline {kind!r}")


# -- prompt assembly ---------------------------------------------------------


@dataclass(frozen=True)
class PromptBundle:
    system: str = ""
    action_space: str = ""
    task: str = ""
    ui: str = ""
    context: str = ""
    format: str = ""
    counts: Optional[Mapping[str, int]] = field(default=None, hash=False)

    def components(self) -> dict:
        return {name: getattr(self, name) for name in COMPONENTS}


@dataclass(frozen=True)
class AssembledPrompt:
    text: str
    counts: dict
    total: int
    pretokenized: bool = False


def assemble_prompt(bundle: PromptBundle,
                    counter: TokenCounter = DEFAULT_COUNTER) -> AssembledPrompt:
    parts = bundle.components()
    text = "\n\n".join(parts[name] for name in COMPONENTS)
    if bundle.counts is not None:
        counts = {name: int(bundle.counts.get(name, 0)) for name in COMPONENTS}
    else:
        counts = {name: counter.count(parts[name]) for name in COMPONENTS}
    return AssembledPrompt(text, counts, sum(counts.values()), bundle.counts is not None)
