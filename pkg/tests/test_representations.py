from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from helpers import FIXTURES, trees
from uitrim.dsl import ast as A
from uitrim.interpreter import apply
from uitrim.representations import (
    MissingSeed,
    PromptBundle,
    assemble_prompt,
    render,
    render_tree,
)
from uitrim.tree import build_tree, load_tree, node

IDENTITY = A.identity_program()


@pytest.fixture
def bill():
    return apply(IDENTITY, load_tree(FIXTURES / "bill_amount.tree"))


def test_hierarchical_indents_by_depth(bill):
    rep = render(bill, "hierarchical")
    assert [len(line) - len(line.lstrip(" ")) for line in rep.lines] == [4, 4, 2]


def test_dfs_flat_has_no_indent(bill):
    rep = render(bill, "dfs")
    assert rep.kind == "dfs_flat"
    assert all(not line.startswith(" ") for line in rep.lines)


@settings(max_examples=60, deadline=None)
@given(trees(), st.integers(0, 2**32))
def test_orderings_are_permutations(tree, seed):
    views = apply(IDENTITY, tree)
    flat = render(views, "dfs_flat")
    shuffled = render(views, "random", seed=seed)
    stripped = [line.lstrip(" ") for line in render(views, "hierarchical").lines]
    assert Counter(flat.lines) == Counter(shuffled.lines) == Counter(stripped)
    assert flat.token_count == shuffled.token_count


def test_random_needs_seed(bill):
    with pytest.raises(MissingSeed):
        render(bill, "random")


def test_random_is_seed_deterministic():
    tree = build_tree(node("A", *[node("T", text=f"item {i}") for i in range(12)]))
    views = apply(IDENTITY, tree)
    assert render(views, "random", seed=7).lines == render(views, "random", seed=7).lines
    assert render(views, "random", seed=7).lines != render(views, "random", seed=8).lines


def test_unknown_kind(bill):
    with pytest.raises(ValueError):
        render(bill, "sideways")


def test_ops_lists_visible_interactive_elements():
    tree = load_tree(FIXTURES / "android_7.xml")
    rep = render_tree(tree, "ops")
    # ids count the hierarchy wrapper as node 0
    assert rep.lines == ("<input id=4>0.00</input>",
                         "<button id=5>Calculate</button>",
                         "<button id=6>Settings</button>")


def test_ops_deduplicates_consecutive_labels():
    tree = build_tree(node("F", node("B", node("T", text="Go"), flags=["clickable", "visible"]),
                           node("T", text="Go", flags=["clickable", "visible"])))
    # the wrapper and its child share category and label
    assert render_tree(tree, "ops").lines == ("<button id=1>Go</button>",)


def test_ops_skips_invisible():
    tree = build_tree(node("F", node("B", text="Hidden", flags=["clickable"])))
    assert render_tree(tree, "ops").lines == ()


def test_leaf_baseline():
    tree = load_tree(FIXTURES / "android_7.xml")
    rep = render_tree(tree, "leaf")
    assert len(rep.lines) == len(tree.leaves())
    assert rep.lines == ("<text id=3>Bill Amount</text>", "<input id=4>0.00</input>",
                         "<button id=5>Calculate</button>", "<button id=6></button>")


def test_leaf_baseline_escapes_markup():
    tree = build_tree(node("T", text="a<b>&c"))
    assert render_tree(tree, "leaf").lines == ("<text id=0>a&lt;b&gt;&amp;c</text>",)


def test_flattened_sections():
    tree = load_tree(FIXTURES / "android_7.xml")
    rep = render_tree(tree, "flattened")
    # the amount field is clickable, and clickable outranks input
    assert rep.lines[0] == ("Screen with 4 elements: 3 clickable items, 0 text inputs,"
                            " 0 scrollable views, 1 static text")
    assert rep.lines[1:] == (
        "Clickable items:", "- 0.00 [id=4]", "- Calculate [id=5]", "- Settings [id=6]",
        "Static text:", "- Bill Amount [id=3]",
    )


def test_flattened_two_clickable_one_input():
    on = ("clickable", "visible")
    tree = build_tree(node("Form", node("Button", text="OK", flags=on),
                           node("Button", text="Cancel", flags=on),
                           node("EditText", text="name", flags=("editable", "visible"))))
    lines = render_tree(tree, "flattened").lines
    sizes = {}
    for line in lines[1:]:
        if line.endswith(":"):
            current = line
            sizes[current] = 0
        else:
            sizes[current] += 1
    # the static-text section is always emitted, possibly empty
    assert {k: v for k, v in sizes.items() if v} == {"Clickable items:": 2, "Text inputs:": 1}


def test_token_count_matches_text(bill):
    from uitrim.tokens import DEFAULT_COUNTER

    rep = render(bill)
    assert rep.token_count == DEFAULT_COUNTER.count(rep.text)


def test_assemble_prompt_counts_components():
    bundle = PromptBundle(system="You are an agent.", task="Pay the bill", ui="<button>Pay</button>")
    prompt = assemble_prompt(bundle)
    assert prompt.counts["system"] == 5
    assert prompt.counts["task"] == 3
    assert prompt.counts["context"] == 0
    assert prompt.total == sum(prompt.counts.values())
    assert not prompt.pretokenized


def test_assemble_prompt_pretokenized():
    bundle = PromptBundle(ui="ignored text", counts={"ui": 100, "system": 20})
    prompt = assemble_prompt(bundle)
    assert prompt.counts["ui"] == 100 and prompt.total == 120
    assert prompt.pretokenized
