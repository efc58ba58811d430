"""Static checks for transformation programs.  Violations are data, never exceptions."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..tree import FLAG_NAMES
from . import ast as A

DEFAULT_MAX_DEPTH = 4

_NODE_ONLY = (A.TagEquals, A.TagIn, A.AttrExists, A.AttrEquals, A.AttrMatches, A.TextEquals,
              A.Flag, A.ChildCount, A.Depth)
_VIEW_ONLY = (A.Interactive, A.TypeEquals)


@dataclass(frozen=True)
class Violation:
    kind: str
    hole: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} in {self.hole}: {self.detail}"


def validate_program(p: A.TransformProgram, max_depth: int = DEFAULT_MAX_DEPTH) -> list[Violation]:
    out: list[Violation] = []
    for hole, expr in p.holes.items():
        if expr.depth > max_depth:
            out.append(Violation("DepthExceeded", hole,
                                 f"depth {expr.depth} exceeds maximum {max_depth}"))
        ctx = "merge" if hole == "merge-when" else "node"
        _check(expr, hole, ctx, under_not=False, out=out)

    for key in p.leaf_props:
        if not isinstance(key, str) or not key:
            out.append(Violation("EmptyKey", "leaf-props", "property keys must be non-empty"))
    if len(set(p.leaf_props)) != len(p.leaf_props):
        out.append(Violation("DuplicateKey", "leaf-props", "property keys must be unique"))
    if p.merge_props.text_rule not in A.TEXT_RULES:
        out.append(Violation("UnknownRule", "merge-props", f"text rule {p.merge_props.text_rule!r}"))
    if p.merge_props.type_rule not in A.TYPE_RULES:
        out.append(Violation("UnknownRule", "merge-props", f"type rule {p.merge_props.type_rule!r}"))
    if p.provenance not in A.PROVENANCES:
        out.append(Violation("UnknownProvenance", "program", p.provenance))
    return out


def _check(e: A.Expr, hole: str, ctx: str, under_not: bool, out: list) -> None:
    if isinstance(e, (A.AllViews, A.AnyView, A.ViewCount)):
        if ctx != "merge":
            where = "an aggregator" if ctx == "view" else "a node predicate"
            out.append(Violation("AggregatorPlacement", hole,
                                 f"{type(e).__name__} inside {where}"))
        elif under_not:
            out.append(Violation("AggregatorPlacement", hole,
                                 f"{type(e).__name__} under 'not' must stay at top level"))
        if isinstance(e, A.ViewCount):
            _check_cmp(e.cmp, e.n, hole, out)
            return
        _check(e.pred, hole, "view", False, out)
        return
    if isinstance(e, A.Not):
        _check(e.operand, hole, ctx, True, out)
        return
    if isinstance(e, (A.And, A.Or)):
        _check(e.left, hole, ctx, under_not, out)
        _check(e.right, hole, ctx, under_not, out)
        return
    if ctx == "view" and isinstance(e, _NODE_ONLY):
        out.append(Violation("InvalidAtom", hole, f"{e} is not a view predicate"))
    if ctx != "view" and isinstance(e, _VIEW_ONLY):
        out.append(Violation("InvalidAtom", hole, f"{e} is only valid inside an aggregator"))
    if isinstance(e, A.Flag) and e.name not in FLAG_NAMES:
        out.append(Violation("UnknownFlag", hole, f"unknown flag {e.name!r}"))
    if isinstance(e, (A.AttrExists, A.AttrEquals, A.AttrMatches)) and not e.key:
        out.append(Violation("EmptyKey", hole, "attribute key must be non-empty"))
    if isinstance(e, A.AttrMatches):
        try:
            re.compile(e.pattern)
        except re.error as exc:
            out.append(Violation("InvalidPattern", hole, f"/{e.pattern}/: {exc}"))
    if isinstance(e, (A.ChildCount, A.Depth)):
        _check_cmp(e.cmp, e.n, hole, out)
    if isinstance(e, A.TagIn) and not e.tags:
        out.append(Violation("EmptyTagSet", hole, "tag in () matches nothing"))


def _check_cmp(cmp: str, n: int, hole: str, out: list) -> None:
    if cmp not in A.COMPARATORS:
        out.append(Violation("InvalidComparison", hole, f"unknown comparator {cmp!r}"))
    if not isinstance(n, int) or n < 0:
        out.append(Violation("InvalidComparison", hole, f"count {n!r} must be a non-negative integer"))
