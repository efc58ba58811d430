import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings

from helpers import FIXTURES, EXAMPLES, trees
from uitrim.tree import (
    Bounds,
    EmptyTree,
    MalformedBounds,
    MalformedDocument,
    SchemaViolation,
    build_tree,
    load_tree,
    node,
    parse_android_xml,
    parse_canonical,
    serialize_canonical,
)


def test_bounds_parse():
    assert Bounds.parse("[0,0][1080,2340]") == Bounds(0, 0, 1080, 2340)


@pytest.mark.parametrize("text", ["[0,0][10]", "0,0,10,10", "[a,0][1,1]", ""])
def test_bounds_malformed(text):
    with pytest.raises(MalformedBounds):
        Bounds.parse(text)


def test_bounds_inverted():
    with pytest.raises(MalformedBounds):
        Bounds(10, 0, 0, 10)


def test_android_fixture_node_count_matches_element_count():
    document = (FIXTURES / "android_7.xml").read_text()
    expected = sum(1 for _ in ET.fromstring(document).iter())
    tree = parse_android_xml(document)
    # one node per element, the hierarchy wrapper included
    assert tree.node_count == expected == 7


def test_android_fixture_flags_and_class():
    tree = load_tree(FIXTURES / "android_7.xml")
    clickable = [n for n in tree.nodes() if "clickable" in n.flags]
    assert [n.tag for n in clickable] == ["android.widget.EditText", "android.widget.Button",
                                          "android.widget.ImageButton"]
    edit = clickable[0]
    assert "editable" in edit.flags and edit.text == "0.00"
    assert edit.bounds == Bounds(540, 231, 1038, 357)


def test_empty_xml():
    with pytest.raises(EmptyTree):
        parse_android_xml('<?xml version="1.0"?>\n<!-- nothing -->')


def test_malformed_xml():
    with pytest.raises(MalformedDocument):
        parse_android_xml("<hierarchy><node></hierarchy>")


def test_malformed_bounds_in_xml():
    with pytest.raises(MalformedBounds):
        parse_android_xml('<hierarchy><node class="A" bounds="[1,2]"/></hierarchy>')


def test_bill_amount_tree():
    tree = load_tree(FIXTURES / "bill_amount.tree")
    assert tree.node_count == 5
    assert [n.text for n in tree.leaves()] == ["Bill Amount", "0.00", "Calculate"]


def test_preorder_ids_and_depths():
    tree = build_tree(node("A", node("B", node("C")), node("D")))
    assert [(n.tag, n.node_id, n.depth) for n in tree.nodes()] == [
        ("A", 0, 0), ("B", 1, 1), ("C", 2, 2), ("D", 3, 1)]


def test_text_normalized():
    tree = build_tree(node("A", text="  two\n\twords  "))
    assert tree.root.text == "two words"


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.tree")) + sorted(FIXTURES.glob("*.xml")))
def test_fixture_round_trip(path):
    tree = load_tree(path)
    text = serialize_canonical(tree)
    again = parse_canonical(text)
    assert serialize_canonical(again) == text
    assert again.root == tree.root


def test_example_trees_round_trip():
    from uitrim.evaluation import format_example, load_examples, parse_example

    for ex in load_examples(EXAMPLES):
        assert parse_example(format_example(ex), ex.example_id) == ex


@pytest.mark.parametrize("document, error", [
    ("", EmptyTree),
    ("uitree v1 canonical\n", EmptyTree),
    ("uitree v2 canonical\nA\n", MalformedDocument),
    ("uitree v1 mystery\nA\n", SchemaViolation),
    ("uitree v1 canonical\nA\nB\n", SchemaViolation),
    ("uitree v1 canonical\nA\n    B\n", SchemaViolation),
    ("uitree v1 canonical\nA\n B\n", MalformedDocument),
    ("uitree v1 canonical\nA flags=[flying]\n", SchemaViolation),
    ("uitree v1 canonical\nA text=\"x\" text=\"y\"\n", MalformedDocument),
    ("uitree v1 canonical\nA bounds=[1,1]\n", MalformedBounds),
    ("uitree v1 canonical\nA attrs{k=v}\n", MalformedDocument),
])
def test_canonical_errors(document, error):
    with pytest.raises(error):
        parse_canonical(document)


def test_escapes_survive():
    tree = build_tree(node("A", text='say "hi"\\   \x07', key='a,b}{"'))
    text = serialize_canonical(tree)
    assert len(text.splitlines()) == 2
    assert parse_canonical(text).root == tree.root


@settings(max_examples=150, deadline=None)
@given(trees())
def test_random_round_trip(tree):
    text = serialize_canonical(tree)
    again = parse_canonical(text)
    assert again.root == tree.root
    assert serialize_canonical(again) == text


@settings(max_examples=100, deadline=None)
@given(trees())
def test_ids_are_preorder_and_depths_consistent(tree):
    nodes = list(tree.nodes())
    assert [n.node_id for n in nodes] == list(range(len(nodes)))
    for n in nodes:
        for c in n.children:
            assert c.depth == n.depth + 1
