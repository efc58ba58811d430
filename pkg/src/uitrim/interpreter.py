"""Bottom-up application of transformation programs to UI trees."""

from __future__ import annotations

import operator
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .dsl import ast as A
from .tree import INTERACTIVE_FLAGS, Bounds, NodeSpec, UINode, UITree, build_tree, format_fields

_CMP_OPS = {"=": operator.eq, "<": operator.lt, "<=": operator.le, ">": operator.gt,
            ">=": operator.ge}


class PredicateEvaluationError(RuntimeError):
    def __init__(self, message: str, node_id: int, program_index: Optional[int] = None):
        super().__init__(message)
        self.node_id = node_id
        self.program_index = program_index

    def __str__(self) -> str:
        where = f"node {self.node_id}"
        if self.program_index is not None:
            where = f"program {self.program_index}, {where}"
        return f"{self.args[0]} ({where})"


@dataclass(frozen=True)
class View:
    view_id: int
    text: str
    type_name: str
    interactive: bool
    flags: frozenset
    bounds: Optional[Bounds]
    source_ids: frozenset
    depth: int
    props: dict = field(default_factory=dict, hash=False)
    container: bool = False
    # node id of the enclosing container view, set only when containers are retained
    parent: Optional[int] = None

    def line(self) -> str:
        """Rendering used in prompts: canonical field syntax, no provenance."""
        return format_fields(self.type_name, self.text, self.flags, self.bounds, self.props)


@dataclass(frozen=True)
class ViewList:
    views: tuple
    node_count: int
    token_count: Optional[int] = None

    def __len__(self) -> int:
        return len(self.views)

    def __iter__(self):
        return iter(self.views)

    def texts(self) -> list[str]:
        return [v.text for v in self.views]


def _evolve(v: View, **changes) -> View:
    # dataclasses.replace re-runs __init__ and dominates library time on large trees
    new = object.__new__(View)
    new.__dict__.update(v.__dict__)
    new.__dict__.update(changes)
    return new


def serialize_views(views: ViewList) -> str:
    lines = [f"viewlist v1 nodes={views.node_count}"]
    for v in views.views:
        record = v.line()
        record += " ids=[" + ",".join(str(i) for i in sorted(v.source_ids)) + "]"
        if v.container:
            record += " container"
        if v.parent is not None:
            record += f" parent={v.parent}"
        lines.append("  " * v.depth + record)
    return "\n".join(lines) + "\n"


# -- predicate compilation ---------------------------------------------------


def _compile_node(e: A.Expr) -> Callable[[UINode], bool]:
    if isinstance(e, A.Const):
        value = e.value
        return lambda n: value
    if isinstance(e, A.TagEquals):
        tag = e.tag
        return lambda n: n.tag == tag
    if isinstance(e, A.TagIn):
        tags = frozenset(e.tags)
        return lambda n: n.tag in tags
    if isinstance(e, A.AttrExists):
        key = e.key
        return lambda n: key in n.attributes
    if isinstance(e, A.AttrEquals):
        key, value = e.key, e.value
        return lambda n: n.attributes.get(key) == value
    if isinstance(e, A.AttrMatches):
        key = e.key
        try:
            rx = re.compile(e.pattern)
        except re.error as exc:
            message = f"invalid pattern /{e.pattern}/: {exc}"

            def broken(n):
                raise PredicateEvaluationError(message, n.node_id)

            return broken

        def matches(n):
            value = n.attributes.get(key)
            return value is not None and rx.fullmatch(value) is not None

        return matches
    if isinstance(e, A.TextEmpty):
        return lambda n: not n.text
    if isinstance(e, A.TextNonEmpty):
        return lambda n: bool(n.text)
    if isinstance(e, A.TextEquals):
        text = e.text
        return lambda n: n.text == text
    if isinstance(e, A.Flag):
        name = e.name
        return lambda n: name in n.flags
    if isinstance(e, A.ChildCount):
        op, k = _CMP_OPS[e.cmp], e.n
        return lambda n: op(len(n.children), k)
    if isinstance(e, A.Depth):
        op, k = _CMP_OPS[e.cmp], e.n
        return lambda n: op(n.depth, k)
    if isinstance(e, A.Not):
        inner = _compile_node(e.operand)
        return lambda n: not inner(n)
    if isinstance(e, A.And):
        left, right = _compile_node(e.left), _compile_node(e.right)
        return lambda n: left(n) and right(n)
    if isinstance(e, A.Or):
        left, right = _compile_node(e.left), _compile_node(e.right)
        return lambda n: left(n) or right(n)
    raise TypeError(f"{type(e).__name__} is not a node predicate")


def _compile_view(e: A.Expr) -> Callable[[View], bool]:
    if isinstance(e, A.Const):
        value = e.value
        return lambda v: value
    if isinstance(e, A.TextEmpty):
        return lambda v: not v.text
    if isinstance(e, A.TextNonEmpty):
        return lambda v: bool(v.text)
    if isinstance(e, A.Interactive):
        return lambda v: v.interactive
    if isinstance(e, A.TypeEquals):
        name = e.type_name
        return lambda v: v.type_name == name
    if isinstance(e, A.Not):
        inner = _compile_view(e.operand)
        return lambda v: not inner(v)
    if isinstance(e, A.And):
        left, right = _compile_view(e.left), _compile_view(e.right)
        return lambda v: left(v) and right(v)
    if isinstance(e, A.Or):
        left, right = _compile_view(e.left), _compile_view(e.right)
        return lambda v: left(v) or right(v)
    raise TypeError(f"{type(e).__name__} is not a view predicate")


def _compile_merge(e: A.Expr) -> Callable[[UINode, list], bool]:
    if isinstance(e, A.AllViews):
        pred = _compile_view(e.pred)
        return lambda n, vs: all(pred(v) for v in vs)
    if isinstance(e, A.AnyView):
        pred = _compile_view(e.pred)
        return lambda n, vs: any(pred(v) for v in vs)
    if isinstance(e, A.ViewCount):
        op, k = _CMP_OPS[e.cmp], e.n
        return lambda n, vs: op(len(vs), k)
    if isinstance(e, A.Not):
        inner = _compile_merge(e.operand)
        return lambda n, vs: not inner(n, vs)
    if isinstance(e, A.And):
        left, right = _compile_merge(e.left), _compile_merge(e.right)
        return lambda n, vs: left(n, vs) and right(n, vs)
    if isinstance(e, A.Or):
        left, right = _compile_merge(e.left), _compile_merge(e.right)
        return lambda n, vs: left(n, vs) or right(n, vs)
    guard = _compile_node(e)
    return lambda n, vs: guard(n)


# -- application -------------------------------------------------------------


def _union_bounds(boxes) -> Optional[Bounds]:
    out = None
    for b in boxes:
        if b is not None:
            out = b if out is None else out.union(b)
    return out


class CompiledProgram:
    def __init__(self, program: A.TransformProgram, retain_containers: bool = False):
        self.program = program
        self.retain_containers = retain_containers
        self.leaf_filter = _compile_node(program.leaf_filter)
        self.node_filter = _compile_node(program.node_filter)
        self.merge_when = _compile_merge(program.merge_when)
        props = program.leaf_props
        self.keep_text = "text" in props
        self.keep_bounds = "bounds" in props
        self.attr_keys = tuple(k for k in props if k not in ("text", "bounds"))
        self.text_rule = program.merge_props.text_rule
        self.type_rule = program.merge_props.type_rule

    def leaf_view(self, n: UINode, container: bool = False) -> View:
        attrs = n.attributes
        return View(
            0,
            n.text if self.keep_text else "",
            n.tag,
            bool(n.flags & INTERACTIVE_FLAGS),
            n.flags,
            n.bounds if self.keep_bounds else None,
            frozenset((n.node_id,)),
            n.depth,
            {k: attrs[k] for k in self.attr_keys if k in attrs},
            container,
        )

    def merged_view(self, n: UINode, views: list) -> View:
        if self.text_rule == "concat":
            text = " ".join(v.text for v in views if v.text)
        elif self.text_rule == "first":
            text = next((v.text for v in views if v.text), "")
        else:
            text = n.text
        if self.type_rule == "parent":
            type_name = n.tag
        else:
            counts = Counter(v.type_name for v in views)
            best = max(counts.values())
            type_name = next(v.type_name for v in views if counts[v.type_name] == best)
        flags = set(n.flags)
        sources = {n.node_id}
        props: dict = {}
        for v in views:
            flags |= v.flags
            sources |= v.source_ids
            for k, val in v.props.items():
                props.setdefault(k, val)
        flags = frozenset(flags)
        return View(
            0,
            text,
            type_name,
            bool(flags & INTERACTIVE_FLAGS),
            flags,
            _union_bounds(v.bounds for v in views),
            frozenset(sources),
            n.depth,
            props,
        )

    def transform(self, n: UINode) -> list:
        child_views: list = []
        for c in n.children:
            child_views.extend(self.transform(c))
        if not child_views:
            if self.leaf_filter(n):
                return []
            return [self.leaf_view(n)]
        if self.node_filter(n):
            return child_views
        if self.retain_containers:
            return self._transform_retaining(n, child_views)
        if self.merge_when(n, child_views):
            return [self.merged_view(n, child_views)]
        return child_views

    def _transform_retaining(self, n: UINode, child_views: list) -> list:
        # containers are structure only: they never influence or join a merge
        semantic = [v for v in child_views if not v.container]
        if self.merge_when(n, semantic):
            return [self.merged_view(n, semantic)]
        adopted = [v if v.parent is not None else _evolve(v, parent=n.node_id)
                   for v in child_views]
        return [self.leaf_view(n, container=True)] + adopted

    def apply(self, tree: UITree) -> ViewList:
        views = self.transform(tree.root)
        numbered = tuple(_evolve(v, view_id=i) for i, v in enumerate(views))
        return ViewList(numbered, tree.node_count)


def apply(program: A.TransformProgram, tree: UITree, retain_containers: bool = False) -> ViewList:
    return CompiledProgram(program, retain_containers).apply(tree)


# -- lifting and library folding --------------------------------------------

LIFT_ROOT_TAG = "root"


def _lift(views: ViewList, fold: bool = False) -> tuple[UITree, list]:
    """Lifted tree plus, per pre-order node id, the (source_ids, depth) that node stands for.

    A synthetic root stands for nothing and maps to an empty source set.  In
    ``fold`` mode the views come from a container-retaining application, so a
    view without a parent container is top-level and a lone top-level
    container becomes the root itself.
    """
    specs = []
    containers_by_node: dict = {}
    open_containers: list = []  # (depth, spec) for the depth-nesting fallback
    top: list = []
    for v in views.views:
        spec = NodeSpec(v.type_name, v.text, dict(v.props), set(v.flags), v.bounds)
        specs.append((spec, v))
        if v.parent is not None and v.parent in containers_by_node:
            containers_by_node[v.parent].children.append(spec)
        elif fold:
            top.append(spec)
        else:
            while open_containers and open_containers[-1][0] >= v.depth:
                open_containers.pop()
            if open_containers:
                open_containers[-1][1].children.append(spec)
            else:
                top.append(spec)
        if v.container:
            open_containers.append((v.depth, spec))
            for node_id in v.source_ids:
                containers_by_node[node_id] = spec
    by_spec = {id(spec): v for spec, v in specs}
    if fold and len(top) == 1 and by_spec[id(top[0])].container:
        root = top[0]
    else:
        root = NodeSpec(LIFT_ROOT_TAG, children=top)
    tree = build_tree(root, "canonical")

    provenance = []
    stack = [root]
    while stack:  # pre-order, matching build_tree's numbering
        s = stack.pop()
        v = by_spec.get(id(s))
        provenance.append((frozenset(), 0) if v is None else (v.source_ids, v.depth))
        stack.extend(reversed(s.children))
    return tree, provenance


def lift(views: ViewList) -> UITree:
    """Rebuild a tree from a view list so another program can run on it.

    Each view becomes a node.  A view nests under its enclosing container view
    when that is known, else under the nearest preceding container view of
    smaller depth, else under a synthetic root.  Only container views acquire
    children, so every other view lifts to a leaf.
    """
    return _lift(views)[0]


def _remap(out: ViewList, provenance: list, root_id: int, node_count: int) -> ViewList:
    remapped = []
    for v in out.views:
        sources = frozenset().union(*(provenance[i][0] for i in v.source_ids))
        if not sources:
            if v.container:
                continue  # a synthetic root kept as a container carries no content
            sources = frozenset((root_id,))
        depth = min((provenance[i][1] for i in v.source_ids if provenance[i][0]), default=0)
        parent = v.parent
        if parent is not None:
            origin = provenance[parent][0]
            parent = min(origin) if origin else None
        remapped.append(_evolve(v, source_ids=sources, depth=depth, parent=parent))
    return ViewList(tuple(_evolve(v, view_id=i) for i, v in enumerate(remapped)), node_count)


def apply_library(library: Sequence[A.TransformProgram], tree: UITree,
                  retain_containers: bool = False) -> ViewList:
    """Apply programs in order, re-lifting the views between programs.

    Intermediate programs retain containers so later programs still see the
    surviving hierarchy; only the last one honours ``retain_containers``.
    """
    if not library:
        return apply(A.identity_program(), tree, retain_containers)
    last = len(library) - 1
    views = None
    for index, program in enumerate(library):
        compiled = CompiledProgram(program, retain_containers if index == last else True)
        try:
            if views is None:
                views = compiled.apply(tree)
                continue
            if not any(not v.container for v in views.views):
                views = ViewList((), tree.node_count)
                break
            lifted, provenance = _lift(views, fold=True)
            views = _remap(compiled.apply(lifted), provenance, tree.root.node_id, tree.node_count)
        except PredicateEvaluationError as exc:
            exc.program_index = index
            raise
    return views
