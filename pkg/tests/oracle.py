"""Naive reference implementations used as test oracles.

Nothing here imports the interpreter's predicate compiler or transform loop.
Expressions are evaluated by direct recursion over the AST, every time.
"""

from __future__ import annotations

import re

from uitrim.dsl import ast as A
from uitrim.interpreter import View, ViewList
from uitrim.tree import Bounds

INTERACTIVE = {"clickable", "long_clickable", "editable", "checkable"}


def compare(op, a, b):
    return {"=": a == b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def eval_node(e, n):
    kind = type(e).__name__
    if kind == "Const":
        return e.value
    if kind == "TagEquals":
        return n.tag == e.tag
    if kind == "TagIn":
        return n.tag in e.tags
    if kind == "AttrExists":
        return e.key in n.attributes
    if kind == "AttrEquals":
        return n.attributes.get(e.key) == e.value
    if kind == "AttrMatches":
        value = n.attributes.get(e.key)
        return value is not None and re.fullmatch(e.pattern, value) is not None
    if kind == "TextEmpty":
        return n.text == ""
    if kind == "TextNonEmpty":
        return n.text != ""
    if kind == "TextEquals":
        return n.text == e.text
    if kind == "Flag":
        return e.name in n.flags
    if kind == "ChildCount":
        return compare(e.cmp, len(n.children), e.n)
    if kind == "Depth":
        return compare(e.cmp, n.depth, e.n)
    if kind == "Not":
        return not eval_node(e.operand, n)
    if kind == "And":
        return eval_node(e.left, n) and eval_node(e.right, n)
    if kind == "Or":
        return eval_node(e.left, n) or eval_node(e.right, n)
    raise AssertionError(kind)


def eval_view(e, v):
    kind = type(e).__name__
    if kind == "Const":
        return e.value
    if kind == "TextEmpty":
        return v["text"] == ""
    if kind == "TextNonEmpty":
        return v["text"] != ""
    if kind == "Interactive":
        return v["interactive"]
    if kind == "TypeEquals":
        return v["type"] == e.type_name
    if kind == "Not":
        return not eval_view(e.operand, v)
    if kind == "And":
        return eval_view(e.left, v) and eval_view(e.right, v)
    if kind == "Or":
        return eval_view(e.left, v) or eval_view(e.right, v)
    raise AssertionError(kind)


def eval_merge(e, n, views):
    kind = type(e).__name__
    if kind == "AllViews":
        return all(eval_view(e.pred, v) for v in views)
    if kind == "AnyView":
        return any(eval_view(e.pred, v) for v in views)
    if kind == "ViewCount":
        return compare(e.cmp, len(views), e.n)
    if kind == "Not":
        return not eval_merge(e.operand, n, views)
    if kind == "And":
        return eval_merge(e.left, n, views) and eval_merge(e.right, n, views)
    if kind == "Or":
        return eval_merge(e.left, n, views) or eval_merge(e.right, n, views)
    return eval_node(e, n)


def _leaf(p, n):
    props = {}
    for key in p.leaf_props:
        if key not in ("text", "bounds") and key in n.attributes:
            props[key] = n.attributes[key]
    return {
        "text": n.text if "text" in p.leaf_props else "",
        "type": n.tag,
        "interactive": any(f in INTERACTIVE for f in n.flags),
        "flags": set(n.flags),
        "bounds": n.bounds if "bounds" in p.leaf_props else None,
        "ids": {n.node_id},
        "depth": n.depth,
        "props": props,
    }


def _merge(p, n, views):
    rules = p.merge_props
    texts = [v["text"] for v in views if v["text"] != ""]
    if rules.text_rule == "concat":
        text = " ".join(texts)
    elif rules.text_rule == "first":
        text = texts[0] if texts else ""
    else:
        text = n.text
    if rules.type_rule == "parent":
        type_name = n.tag
    else:
        types = [v["type"] for v in views]
        best = max(types.count(t) for t in types)
        type_name = [t for t in types if types.count(t) == best][0]
    flags = set(n.flags)
    ids = {n.node_id}
    props = {}
    box = None
    for v in views:
        flags |= v["flags"]
        ids |= v["ids"]
        for k, val in v["props"].items():
            if k not in props:
                props[k] = val
        if v["bounds"] is not None:
            b = v["bounds"]
            box = b if box is None else Bounds(min(box.x1, b.x1), min(box.y1, b.y1),
                                               max(box.x2, b.x2), max(box.y2, b.y2))
    return {
        "text": text,
        "type": type_name,
        "interactive": any(f in INTERACTIVE for f in flags),
        "flags": flags,
        "bounds": box,
        "ids": ids,
        "depth": n.depth,
        "props": props,
    }


def transform(p, n):
    child_views = []
    for c in n.children:
        child_views = child_views + transform(p, c)
    if len(child_views) == 0:
        if eval_node(p.leaf_filter, n):
            return []
        return [_leaf(p, n)]
    if eval_node(p.node_filter, n):
        return child_views
    if eval_merge(p.merge_when, n, child_views):
        return [_merge(p, n, child_views)]
    return child_views


def oracle_apply(p: A.TransformProgram, tree) -> ViewList:
    out = []
    for i, v in enumerate(transform(p, tree.root)):
        out.append(View(i, v["text"], v["type"], v["interactive"], frozenset(v["flags"]),
                        v["bounds"], frozenset(v["ids"]), v["depth"], v["props"]))
    return ViewList(tuple(out), tree.node_count)


def scan_tokens(text: str) -> int:
    """Independent token scanner: classifies characters one at a time."""
    count = 0
    prev = None
    for ch in text:
        if ch.isspace():
            cls = None
        elif ch.isdecimal():
            cls = "digit"
        elif ch.isalnum():
            cls = "alpha"
        else:
            cls = "other"
        if cls is not None and (cls == "other" or cls != prev):
            count += 1
        prev = cls
    return count
