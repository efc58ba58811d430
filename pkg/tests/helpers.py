"""Shared tree builders and strategies for the test suite."""

from __future__ import annotations

import itertools
from functools import lru_cache
from pathlib import Path

from hypothesis import strategies as st

from uitrim.tree import Bounds, NodeSpec, build_tree

DATA = Path(__file__).resolve().parent.parent / "src" / "uitrim" / "data"
FIXTURES = DATA / "fixtures"
EXAMPLES = DATA / "examples"

# small-domain vocabulary: 3 tags x 2 flags, text tied to tag
SMALL_TAGS = ("Button", "LinearLayout", "TextView")
SMALL_FLAGS = ("clickable", "visible")
SMALL_TEXT = {"Button": "OK", "LinearLayout": "", "TextView": "Total 12"}
SMALL_LABELS = tuple(
    (tag, frozenset(fs))
    for tag in SMALL_TAGS
    for fs in ((), ("clickable",), ("visible",), ("clickable", "visible"))
)


@lru_cache(maxsize=None)
def shapes(n: int) -> tuple:
    """All ordered rooted trees with ``n`` nodes, as nested tuples of children."""
    if n == 1:
        return ((),)
    out = []
    for kids in forests(n - 1):
        out.append(kids)
    return tuple(out)


@lru_cache(maxsize=None)
def forests(n: int) -> tuple:
    if n == 0:
        return ((),)
    out = []
    for first in range(1, n + 1):
        for head in shapes(first):
            for rest in forests(n - first):
                out.append((head,) + rest)
    return tuple(out)


def labeled(shape, labels) -> NodeSpec:
    """Attach labels to ``shape`` in pre-order."""
    it = iter(labels)

    def build(s):
        tag, flags = next(it)
        spec = NodeSpec(tag, SMALL_TEXT[tag], {}, set(flags))
        spec.children = [build(c) for c in s]
        return spec

    return build(shape)


def small_domain(max_nodes: int = 8, exhaustive_nodes: int = 2, labelings: int = 1) -> list:
    """Trees for oracle comparison.

    Every labeling of every shape up to ``exhaustive_nodes`` nodes, then every
    shape up to ``max_nodes`` nodes under ``labelings`` rotating labelings.
    """
    trees = []
    for n in range(1, exhaustive_nodes + 1):
        for shape in shapes(n):
            for labels in itertools.product(SMALL_LABELS, repeat=n):
                trees.append(build_tree(labeled(shape, labels)))
    k = len(SMALL_LABELS)
    index = 0
    for n in range(exhaustive_nodes + 1, max_nodes + 1):
        for shape in shapes(n):
            for r in range(labelings):
                offset = (index * 5 + r * 7) % k
                labels = [SMALL_LABELS[(offset + i * (3 + r)) % k] for i in range(n)]
                trees.append(build_tree(labeled(shape, labels)))
            index += 1
    return trees


# -- hypothesis strategies ---------------------------------------------------

TAGS = ("FrameLayout", "LinearLayout", "TextView", "Button", "EditText", "ImageView")
FLAGS = ("clickable", "editable", "checkable", "visible", "enabled", "focusable")
TEXTS = st.one_of(
    st.just(""),
    st.sampled_from(["Pay", "Pay Bill", "0.00", "Total", "Next"]),
    st.text(st.characters(blacklist_categories=("Cs",)), max_size=12),
)


@st.composite
def bounds(draw):
    x1 = draw(st.integers(-50, 1000))
    y1 = draw(st.integers(-50, 2000))
    return Bounds(x1, y1, x1 + draw(st.integers(0, 500)), y1 + draw(st.integers(0, 500)))


@st.composite
def node_specs(draw, max_leaves: int = 12):
    base = st.builds(lambda f: NodeSpec(*f), _spec_fields())

    def extend(children):
        return st.builds(lambda f, kids: NodeSpec(*f[:5], list(kids)), _spec_fields(),
                         st.lists(children, min_size=1, max_size=4))

    return draw(st.recursive(base, extend, max_leaves=max_leaves))


@st.composite
def _spec_fields(draw):
    tag = draw(st.sampled_from(TAGS))
    text = draw(TEXTS)
    attrs = draw(st.dictionaries(st.sampled_from(["resource-id", "content-desc", "package"]),
                                 st.text(max_size=6), max_size=2))
    flags = set(draw(st.lists(st.sampled_from(FLAGS), max_size=3)))
    box = draw(st.one_of(st.none(), bounds()))
    return (tag, text, attrs, flags, box)


def trees(max_leaves: int = 12):
    return node_specs(max_leaves).map(build_tree)
