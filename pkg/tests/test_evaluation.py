import pytest
from hypothesis import given, settings, strategies as st

from helpers import EXAMPLES, FIXTURES, trees
from oracle import scan_tokens
from uitrim.dsl import ast as A
from uitrim.dsl.parser import parse_library, parse_program
from uitrim.evaluation import (
    COMPLETENESS_PENALTY,
    TargetView,
    TrainingExample,
    completeness_reward,
    efficiency_reward,
    format_report,
    load_examples,
    parse_example,
    reduction,
    score_program,
)
from uitrim.interpreter import View, ViewList, apply
from uitrim.tokens import DEFAULT_COUNTER, ExternalCounterFailure, TokenCounter
from uitrim.tree import build_tree, node


def views_of(*specs):
    out = []
    for i, (text, interactive) in enumerate(specs):
        out.append(View(i, text, "T", interactive, frozenset(), None, frozenset({i}), 0))
    return ViewList(tuple(out), len(specs))


def example(name):
    return parse_example((FIXTURES / f"{name}.example").read_text(), name)


# -- tokens --------------------------------------------------------------------


@pytest.mark.parametrize("text, n", [
    ("", 0),
    ("Bill Amount 0.00", 5),
    ("  \n\t", 0),
    ('TextView text="Hi"', 6),
    ("abc123def", 3),
    ("$0.00", 4),
])
def test_default_counter_examples(text, n):
    assert DEFAULT_COUNTER.count(text) == n == scan_tokens(text)


@settings(max_examples=300)
@given(st.text(st.characters(whitelist_categories=("Lu", "Ll", "Nd", "Po", "Zs", "Sm"))))
def test_default_counter_matches_scanner(text):
    assert DEFAULT_COUNTER.count(text) == scan_tokens(text)


@settings(max_examples=200)
@given(st.text(max_size=40), st.text(max_size=40))
def test_counter_additive_over_whitespace_join(a, b):
    assert DEFAULT_COUNTER.count(a + " " + b) == DEFAULT_COUNTER.count(a) + DEFAULT_COUNTER.count(b)


def test_external_counter(tmp_path):
    script = tmp_path / "wc.py"
    script.write_text("import sys; print(len(sys.stdin.read().split()))")
    import sys

    counter = TokenCounter.from_spec(f"external:{sys.executable} {script}")
    assert counter.count("a b c") == 3


def test_external_counter_failure(tmp_path):
    import sys

    counter = TokenCounter.from_spec(f"external:{sys.executable} -c 'print(\"many\")'")
    with pytest.raises(ExternalCounterFailure):
        counter.count("x")


# -- efficiency ----------------------------------------------------------------


def test_reduction_formula():
    assert reduction(1206, 596) == pytest.approx(0.506, abs=0.001)
    assert reduction(1206, 596) == pytest.approx(610 / 1206)


@pytest.mark.parametrize("before, after, expected", [
    (100, 150, 0.0), (100, 0, 1.0), (0, 0, 0.0), (0, 10, 0.0), (10, 10, 0.0)])
def test_reduction_clamped(before, after, expected):
    assert reduction(before, after) == expected


@settings(max_examples=80, deadline=None)
@given(trees())
def test_identity_has_zero_efficiency(tree):
    assert efficiency_reward(tree, apply(A.identity_program(), tree)) == 0.0


def test_efficiency_scale_free():
    # duplicating every row of a screen leaves the reduction unchanged
    row = lambda: node("LinearLayout", node("TextView", text="Name"),
                       node("EditText", text="Ada", flags=["editable"]))
    one = build_tree(node("FrameLayout", row(), node("View")))
    two = build_tree(node("FrameLayout", row(), node("View"), row(), node("View")))
    p = parse_program("program p { leaf-filter: text empty; node-filter: false;"
                      " merge-when: tag = \"LinearLayout\"; }")
    assert efficiency_reward(one, apply(p, one)) == pytest.approx(
        efficiency_reward(two, apply(p, two)))


# -- completeness --------------------------------------------------------------


def test_all_present():
    score, violations = completeness_reward(
        views_of(("Pay", True), ("Total 12", False)),
        [TargetView("Pay", True, 1), TargetView("Total", False, 2)])
    assert (score, violations) == (0.0, [])


def test_lost_information():
    score, violations = completeness_reward(views_of(("Pay", True)),
                                            [TargetView("Cancel", True, 1)])
    assert score == COMPLETENESS_PENALTY
    assert [v.kind for v in violations] == ["LostInformation"]


def test_lost_interactivity():
    score, violations = completeness_reward(views_of(("Pay", False)),
                                            [TargetView("Pay", True, 1)])
    assert score == -10
    assert [v.kind for v in violations] == ["LostInteractivity"]


def test_over_merge():
    score, violations = completeness_reward(views_of(("Pay Cancel", True)),
                                            [TargetView("Pay", True, 1),
                                             TargetView("Cancel", True, 2)])
    assert score == -10
    assert [v.kind for v in violations] == ["OverMerge"]


def test_same_group_merge_allowed():
    score, _ = completeness_reward(views_of(("Bill Amount 0.00", True)),
                                   [TargetView("Bill Amount", False, 1),
                                    TargetView("0.00", True, 1)])
    assert score == 0.0


def test_substring_of_longer_target_not_counted():
    score, violations = completeness_reward(
        views_of(("Pay Bill", False), ("Pay", True)),
        [TargetView("Pay Bill", False, 0), TargetView("Pay", True, 6)])
    assert (score, violations) == (0.0, [])


def test_penalty_not_stacked():
    score, violations = completeness_reward(views_of(("x", False)),
                                            [TargetView("a"), TargetView("b")])
    assert score == -10 and len(violations) == 2


@pytest.mark.parametrize("name, expected", [
    ("overmerge", ["OverMerge"]),
    ("overmerge_repaired", []),
    ("lost_information", ["LostInformation"]),
    ("lost_information_repaired", []),
])
def test_fixture_programs(name, expected):
    ex = example("bill_amount")
    p = parse_library((FIXTURES / f"{name}.program").read_text())[0]
    report = score_program(p, [ex])
    assert [v.kind for v in report.violations] == expected
    assert report.per_example[0].completeness == (-10.0 if expected else 0.0)


def test_identity_is_violation_free_on_bundled_examples():
    report = score_program(A.identity_program(), load_examples(EXAMPLES))
    assert report.violation_free
    assert report.total == 0.0


def test_totals_add_up():
    ex = example("bill_amount")
    target = tuple(ex.target)
    examples = [TrainingExample(f"e{i}", ex.orig, target) for i in range(4)]
    p = parse_library((FIXTURES / "lost_information_repaired.program").read_text())[0]
    single = score_program(p, examples[:1])
    report = score_program(p, examples)
    assert report.total == pytest.approx(4 * single.total)
    assert report.mean == pytest.approx(single.total)


def test_penalty_applied_per_example():
    ex = example("bill_amount")
    p = parse_library((FIXTURES / "lost_information.program").read_text())[0]
    report = score_program(p, [ex, TrainingExample("b", ex.orig, ex.target)])
    assert [s.completeness for s in report.per_example] == [-10.0, -10.0]


def test_empty_target_text_rejected():
    ex = example("bill_amount")
    with pytest.raises(ValueError):
        TrainingExample("x", ex.orig, (TargetView(""),))


def test_report_format():
    ex = example("bill_amount")
    text = format_report(score_program(A.identity_program(), [ex]))
    assert text == ("example_id\tcompleteness\tefficiency\n"
                    "bill_amount\t0\t0.000000\n"
                    "total\t\t0.000000\n")
