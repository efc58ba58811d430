"""AST for transformation programs and its canonical pretty-printer."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator

from ..tree import quote

COMPARATORS = ("=", "<", "<=", ">", ">=")
TEXT_RULES = ("concat", "first", "parent")
TYPE_RULES = ("parent", "dominant_child")
PROVENANCES = ("hand_written", "enumerated", "external_generator")
DEFAULT_LEAF_PROPS = ("text",)


class Expr:
    """Base for every condition node."""

    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def walk(self) -> Iterator["Expr"]:
        yield self
        for c in self.children():
            yield from c.walk()

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children())

    @property
    def depth(self) -> int:
        kids = self.children()
        return 1 + (max(c.depth for c in kids) if kids else 0)

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True)
class Const(Expr):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


# node atoms


@dataclass(frozen=True)
class TagEquals(Expr):
    tag: str


@dataclass(frozen=True)
class TagIn(Expr):
    tags: tuple


@dataclass(frozen=True)
class AttrExists(Expr):
    key: str


@dataclass(frozen=True)
class AttrEquals(Expr):
    key: str
    value: str


@dataclass(frozen=True)
class AttrMatches(Expr):
    key: str
    pattern: str


@dataclass(frozen=True)
class TextEmpty(Expr):
    pass


@dataclass(frozen=True)
class TextNonEmpty(Expr):
    pass


@dataclass(frozen=True)
class TextEquals(Expr):
    text: str


@dataclass(frozen=True)
class Flag(Expr):
    name: str


@dataclass(frozen=True)
class ChildCount(Expr):
    cmp: str
    n: int


@dataclass(frozen=True)
class Depth(Expr):
    cmp: str
    n: int


# view atoms (TextEmpty / TextNonEmpty are shared)


@dataclass(frozen=True)
class Interactive(Expr):
    pass


@dataclass(frozen=True)
class TypeEquals(Expr):
    type_name: str


# aggregators over the child-view list


@dataclass(frozen=True)
class AllViews(Expr):
    pred: Expr

    def children(self):
        return (self.pred,)


@dataclass(frozen=True)
class AnyView(Expr):
    pred: Expr

    def children(self):
        return (self.pred,)


@dataclass(frozen=True)
class ViewCount(Expr):
    cmp: str
    n: int


# combinators


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


NODE_ATOMS = (TagEquals, TagIn, AttrExists, AttrEquals, AttrMatches, TextEmpty, TextNonEmpty,
              TextEquals, Flag, ChildCount, Depth, Const)
VIEW_ATOMS = (TextEmpty, TextNonEmpty, Interactive, TypeEquals, Const)
AGGREGATORS = (AllViews, AnyView, ViewCount)
COMBINATORS = (Not, And, Or)


def cost(expr: Expr) -> int:
    """Enumeration size: constants are free fillers, everything else counts its AST nodes."""
    return 0 if isinstance(expr, Const) else expr.size


@dataclass(frozen=True)
class PropertyRules:
    leaf_props: tuple = DEFAULT_LEAF_PROPS
    text_rule: str = "concat"
    type_rule: str = "parent"


@dataclass(frozen=True)
class TransformProgram:
    program_id: str
    leaf_filter: Expr
    node_filter: Expr
    merge_when: Expr
    leaf_props: tuple = DEFAULT_LEAF_PROPS
    merge_props: PropertyRules = field(default_factory=PropertyRules)
    provenance: str = "hand_written"
    iteration: int = 0

    @property
    def holes(self) -> dict:
        return {
            "leaf-filter": self.leaf_filter,
            "node-filter": self.node_filter,
            "merge-when": self.merge_when,
        }

    @property
    def size(self) -> int:
        return sum(cost(e) for e in self.holes.values())

    def with_id(self, program_id: str, **changes) -> "TransformProgram":
        return replace(self, program_id=program_id, **changes)

    def body(self) -> str:
        """Printed form without the id line; the identity used for dedup and ordering."""
        return format_program(self).split("\n", 1)[1]

    def __str__(self) -> str:
        return format_program(self)


def identity_program(leaf_props: tuple = DEFAULT_LEAF_PROPS,
                     program_id: str = "identity") -> TransformProgram:
    """Keeps every leaf, splices every internal node, never merges."""
    return TransformProgram(program_id, FALSE, TRUE, FALSE, tuple(leaf_props))


# -- printing ----------------------------------------------------------------

_BARE_KEY = re.compile(r"[A-Za-z_][\w\-.]*\Z")
_PREC = {Or: 1, And: 2}


def _regex_literal(pattern: str) -> str:
    out = []
    i = 0
    while i < len(pattern):
        c = pattern[i]
        if c == "\\" and i + 1 < len(pattern):
            out.append(pattern[i:i + 2])
            i += 2
            continue
        out.append("\\/" if c == "/" else c)
        i += 1
    return "/" + "".join(out) + "/"


def format_key(key: str) -> str:
    return key if _BARE_KEY.match(key) else quote(key)


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return "true" if e.value else "false"
    if isinstance(e, TagEquals):
        return f"tag = {quote(e.tag)}"
    if isinstance(e, TagIn):
        return "tag in (" + ", ".join(quote(t) for t in e.tags) + ")"
    if isinstance(e, AttrExists):
        return f"attr({quote(e.key)}) exists"
    if isinstance(e, AttrEquals):
        return f"attr({quote(e.key)}) = {quote(e.value)}"
    if isinstance(e, AttrMatches):
        return f"attr({quote(e.key)}) matches {_regex_literal(e.pattern)}"
    if isinstance(e, TextEmpty):
        return "text empty"
    if isinstance(e, TextNonEmpty):
        return "text nonempty"
    if isinstance(e, TextEquals):
        return f"text = {quote(e.text)}"
    if isinstance(e, Flag):
        return f"flag({e.name})"
    if isinstance(e, ChildCount):
        return f"child-count {e.cmp} {e.n}"
    if isinstance(e, Depth):
        return f"depth {e.cmp} {e.n}"
    if isinstance(e, Interactive):
        return "interactive"
    if isinstance(e, TypeEquals):
        return f"type = {quote(e.type_name)}"
    if isinstance(e, AllViews):
        return f"all-views({format_expr(e.pred)})"
    if isinstance(e, AnyView):
        return f"any-view({format_expr(e.pred)})"
    if isinstance(e, ViewCount):
        return f"view-count {e.cmp} {e.n}"
    if isinstance(e, Not):
        inner = format_expr(e.operand)
        if isinstance(e.operand, (And, Or)):
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(e, (And, Or)):
        word = "and" if isinstance(e, And) else "or"
        prec = _PREC[type(e)]
        left, right = format_expr(e.left), format_expr(e.right)
        if _PREC.get(type(e.left), 99) < prec:
            left = f"({left})"
        # binary operators are left-associative
        if _PREC.get(type(e.right), 99) <= prec:
            right = f"({right})"
        return f"{left} {word} {right}"
    raise TypeError(f"not a DSL expression: {e!r}")


def format_program(p: TransformProgram) -> str:
    props = ", ".join(format_key(k) for k in p.leaf_props)
    type_rule = p.merge_props.type_rule.replace("_", "-")
    return "\n".join([
        f"program {p.program_id} {{",
        f"  leaf-filter: {format_expr(p.leaf_filter)};",
        f"  leaf-props: [{props}];",
        f"  node-filter: {format_expr(p.node_filter)};",
        f"  merge-when: {format_expr(p.merge_when)};",
        f"  merge-props {{ text: {p.merge_props.text_rule}; type: {type_rule}; }};",
        "}",
    ])


def format_library(programs) -> str:
    return "\n\n".join(format_program(p) for p in programs) + "\n"

