"""UI tree model and parsers for uiautomator XML dumps and the canonical text format."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

FLAG_NAMES = (
    "clickable",
    "long_clickable",
    "focusable",
    "enabled",
    "visible",
    "scrollable",
    "editable",
    "checkable",
)
INTERACTIVE_FLAGS = frozenset({"clickable", "long_clickable", "editable", "checkable"})
SOURCES = ("android_xml", "canonical", "dom_export")

# uiautomator attribute name -> flag name
_XML_FLAGS = {
    "clickable": "clickable",
    "long-clickable": "long_clickable",
    "focusable": "focusable",
    "enabled": "enabled",
    "visible-to-user": "visible",
    "scrollable": "scrollable",
    "checkable": "checkable",
    "editable": "editable",
}
_BOUNDS_RE = re.compile(r"^\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]$")
_WS_RE = re.compile(r"\s+")


class TreeError(ValueError):
    """Base class for tree parsing errors."""


class MalformedDocument(TreeError):
    pass


class EmptyTree(TreeError):
    pass


class MalformedBounds(TreeError):
    pass


class SchemaViolation(TreeError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def normalize_text(text: Optional[str]) -> str:
    if not text:
        return ""
    return _WS_RE.sub(" ", text).strip()


@dataclass(frozen=True)
class Bounds:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise MalformedBounds(f"inverted bounds {self}")

    @classmethod
    def parse(cls, text: str) -> "Bounds":
        m = _BOUNDS_RE.match(text.strip())
        if not m:
            raise MalformedBounds(f"bounds {text!r} not of form [x1,y1][x2,y2]")
        return cls(*(int(g) for g in m.groups()))

    def union(self, other: "Bounds") -> "Bounds":
        return Bounds(
            min(self.x1, other.x1),
            min(self.y1, other.y1),
            max(self.x2, other.x2),
            max(self.y2, other.y2),
        )

    def __str__(self) -> str:
        return f"[{self.x1},{self.y1}][{self.x2},{self.y2}]"


@dataclass(frozen=True, eq=True)
class UINode:
    node_id: int
    tag: str
    text: str = ""
    attributes: Mapping[str, str] = field(default_factory=dict)
    flags: frozenset = frozenset()
    bounds: Optional[Bounds] = None
    children: tuple = ()
    depth: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def interactive(self) -> bool:
        return bool(self.flags & INTERACTIVE_FLAGS)

    def walk(self) -> Iterator["UINode"]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class UITree:
    root: UINode
    source: str = "canonical"

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())

    def nodes(self) -> Iterator[UINode]:
        return self.root.walk()

    def leaves(self) -> list[UINode]:
        return [n for n in self.root.walk() if n.is_leaf]

    def by_id(self) -> dict[int, UINode]:
        return {n.node_id: n for n in self.root.walk()}


@dataclass
class NodeSpec:
    """Mutable scratch node used while building a tree; ids and depths come later."""

    tag: str
    text: str = ""
    attributes: dict = field(default_factory=dict)
    flags: set = field(default_factory=set)
    bounds: Optional[Bounds] = None
    children: list = field(default_factory=list)


def build_tree(spec: NodeSpec, source: str = "canonical") -> UITree:
    """Freeze a NodeSpec hierarchy, assigning pre-order ids and depths."""
    counter = [0]

    def freeze(s: NodeSpec, depth: int) -> UINode:
        node_id = counter[0]
        counter[0] += 1
        kids = tuple(freeze(c, depth + 1) for c in s.children)
        return UINode(
            node_id=node_id,
            tag=s.tag,
            text=normalize_text(s.text),
            attributes=dict(s.attributes),
            flags=frozenset(s.flags),
            bounds=s.bounds,
            children=kids,
            depth=depth,
        )

    if source not in SOURCES:
        raise SchemaViolation("header.source", f"unknown source {source!r}")
    return UITree(freeze(spec, 0), source)


def node(tag: str, *children: NodeSpec, text: str = "", flags: Sequence[str] = (),
         bounds: Optional[Bounds] = None, **attributes: str) -> NodeSpec:
    """Shorthand for authoring fixture trees in code."""
    return NodeSpec(tag, text, dict(attributes), set(flags), bounds, list(children))


# -- android xml -------------------------------------------------------------


def parse_android_xml(document: str | bytes) -> UITree:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    stripped = re.sub(r"<\?.*?\?>|<!--.*?-->", "", document, flags=re.S)
    if not re.search(r"<[^\s/!?]", stripped):
        raise EmptyTree("document has no element nodes")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedDocument(f"unparseable XML: {exc}") from exc
    return build_tree(_xml_spec(root), "android_xml")


def _xml_spec(elem: ET.Element) -> NodeSpec:
    attrs = dict(elem.attrib)
    tag = elem.tag
    if tag == "node" and "class" in attrs:
        tag = attrs.pop("class")
    text = attrs.pop("text", "")
    flags = set()
    for key, flag in _XML_FLAGS.items():
        if key in attrs:
            value = attrs.pop(key)
            if value == "true":
                flags.add(flag)
            elif key == "visible-to-user" and value != "false":
                flags.add(flag)
        elif key == "visible-to-user":
            # uiautomator only dumps on-screen nodes unless told otherwise
            flags.add(flag)
    if tag.endswith("EditText"):
        flags.add("editable")
    bounds = Bounds.parse(attrs.pop("bounds")) if "bounds" in attrs else None
    children = [_xml_spec(c) for c in elem]
    return NodeSpec(tag, text, attrs, flags, bounds, children)


# -- canonical format --------------------------------------------------------

HEADER = "uitree v1"
_TAG_RE = re.compile(r"[^\s\"=\[\]{},]+")
_KEY_RE = re.compile(r"[^\s\"=\[\]{},]+")
_QUOTED_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
# anything str.splitlines() would break on, plus other controls
_NEEDS_ESCAPE = re.compile(r'[\\"\x00-\x1f\x7f\x85\u2028\u2029]')
_UNESCAPE = re.compile(r"\\(u[0-9a-fA-F]{4}|.)")


def _escape_char(m: re.Match) -> str:
    c = m.group(0)
    if c in ('"', "\\"):
        return "\\" + c
    if c == "\n":
        return "\\n"
    if c == "\t":
        return "\\t"
    return f"\\u{ord(c):04x}"


def quote(value: str) -> str:
    return '"' + _NEEDS_ESCAPE.sub(_escape_char, value) + '"'


def unquote(body: str) -> str:
    def sub(m: re.Match) -> str:
        esc = m.group(1)
        if len(esc) == 5:
            return chr(int(esc[1:], 16))
        return _ESCAPES.get(esc, esc)

    return _UNESCAPE.sub(sub, body)


def format_fields(tag: str, text: str, flags, bounds: Optional[Bounds],
                  attrs: Mapping[str, str]) -> str:
    """One record in canonical field syntax (shared by trees and views)."""
    parts = [tag]
    if text:
        parts.append(f"text={quote(text)}")
    if flags:
        ordered = [f for f in FLAG_NAMES if f in flags]
        parts.append("flags=[" + ",".join(ordered) + "]")
    if bounds is not None:
        parts.append(f"bounds={bounds}")
    if attrs:
        parts.append("attrs{" + ",".join(f"{k}={quote(v)}" for k, v in attrs.items()) + "}")
    return " ".join(parts)


def serialize_canonical(tree: UITree) -> str:
    lines = [f"{HEADER} {tree.source}"]
    for n in tree.nodes():
        lines.append("  " * n.depth + format_fields(n.tag, n.text, n.flags, n.bounds, n.attributes))
    return "\n".join(lines) + "\n"


def parse_canonical(document: str) -> UITree:
    lines = document.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyTree("empty document")
    header = lines[0].split()
    if header[:2] != HEADER.split() or len(header) != 3:
        raise MalformedDocument(f"line 1: expected header '{HEADER} <source>'")
    source = header[2]
    if source not in SOURCES:
        raise SchemaViolation("header.source", f"unknown source {source!r}")
    body = lines[1:]
    if not body:
        raise EmptyTree("document has no nodes")

    stack: list[NodeSpec] = []
    root: Optional[NodeSpec] = None
    for lineno, line in enumerate(body, start=2):
        if not line.strip():
            raise MalformedDocument(f"line {lineno}: blank line inside tree")
        indent = len(line) - len(line.lstrip(" "))
        if indent % 2:
            raise MalformedDocument(f"line {lineno}: indentation not a multiple of two")
        depth = indent // 2
        path = f"line {lineno}"
        spec = _parse_record(line[indent:], path)
        if root is None:
            if depth != 0:
                raise SchemaViolation(path, "first node must be at depth 0")
            root = spec
            stack = [spec]
            continue
        if depth == 0:
            raise SchemaViolation(path, "multiple roots")
        if depth > len(stack):
            raise SchemaViolation(path, f"depth {depth} skips a level")
        del stack[depth:]
        stack[-1].children.append(spec)
        stack.append(spec)
    assert root is not None
    return build_tree(root, source)


def _parse_record(text: str, path: str) -> NodeSpec:
    m = _TAG_RE.match(text)
    if not m:
        raise SchemaViolation(f"{path}.tag", "missing tag")
    spec = NodeSpec(m.group(0))
    pos = m.end()
    seen = set()
    while pos < len(text):
        if text[pos] != " ":
            raise MalformedDocument(f"{path}: unexpected {text[pos]!r} at column {pos + 1}")
        pos += 1
        for name in ("text=", "flags=", "bounds=", "attrs{"):
            if text.startswith(name, pos):
                break
        else:
            raise MalformedDocument(f"{path}: unknown field at column {pos + 1}")
        field_name = name.rstrip("={")
        if field_name in seen:
            raise MalformedDocument(f"{path}: duplicate field {field_name}")
        seen.add(field_name)
        pos += len(name)
        if field_name == "text":
            q = _QUOTED_RE.match(text, pos)
            if not q:
                raise MalformedDocument(f"{path}: unterminated text at column {pos + 1}")
            spec.text = unquote(q.group(1))
            pos = q.end()
        elif field_name == "flags":
            end = text.find("]", pos)
            if not text.startswith("[", pos) or end < 0:
                raise MalformedDocument(f"{path}: malformed flags")
            names = [f for f in text[pos + 1:end].split(",") if f]
            for f in names:
                if f not in FLAG_NAMES:
                    raise SchemaViolation(f"{path}.flags", f"unknown flag {f!r}")
            spec.flags = set(names)
            pos = end + 1
        elif field_name == "bounds":
            m2 = re.compile(r"\[-?\d+,-?\d+\]\[-?\d+,-?\d+\]").match(text, pos)
            if not m2:
                raise MalformedBounds(f"{path}: malformed bounds")
            spec.bounds = Bounds.parse(m2.group(0))
            pos = m2.end()
        else:
            pos = _parse_attrs(text, pos, spec.attributes, path)
    return spec


def _parse_attrs(text: str, pos: int, out: dict, path: str) -> int:
    if text.startswith("}", pos):
        return pos + 1
    while True:
        k = _KEY_RE.match(text, pos)
        if not k or not text.startswith("=", k.end()):
            raise MalformedDocument(f"{path}: malformed attrs at column {pos + 1}")
        q = _QUOTED_RE.match(text, k.end() + 1)
        if not q:
            raise MalformedDocument(f"{path}: attribute {k.group(0)} value must be quoted")
        out[k.group(0)] = unquote(q.group(1))
        pos = q.end()
        if text.startswith(",", pos):
            pos += 1
        elif text.startswith("}", pos):
            return pos + 1
        else:
            raise MalformedDocument(f"{path}: unterminated attrs at column {pos + 1}")


def load_tree(path) -> UITree:
    """Parse a tree file, sniffing XML vs canonical by its first character."""
    from pathlib import Path

    data = Path(path).read_text(encoding="utf-8")
    if data.lstrip().startswith("<"):
        return parse_android_xml(data)
    return parse_canonical(data)
