import json

import pytest
from hypothesis import given, strategies as st

from helpers import DATA
from uitrim.profiler import (
    EmptyLog,
    MalformedLogRecord,
    PromptLogRecord,
    format_rows,
    parse_record,
    profile,
    profile_file,
    read_log,
)
from uitrim.representations import COMPONENTS, PromptBundle


def record(i, ui="", agent="A", **parts):
    return PromptLogRecord(str(i), "M", "B", agent, PromptBundle(ui=ui, **parts))


def test_empty_log():
    with pytest.raises(EmptyLog):
        profile([])


def test_empty_ui_gives_zero_ratio():
    rows = profile([record(0, system="be helpful")])
    assert rows[0].ui_ratio == 0.0
    assert rows[0].display()["ui_ratio"] == "0.0%"


def test_all_empty_prompt():
    rows = profile([record(0)])
    assert rows[0].total == 0 and rows[0].ui_ratio == 0.0


def test_groups_are_sorted_and_means_per_group():
    rows = profile([record(0, "a b", agent="Z"), record(1, "a b c d", agent="Z"),
                    record(2, "x", agent="Y")])
    assert [(r.agent, r.records, r.means["ui"]) for r in rows] == [("Y", 1, 1.0), ("Z", 2, 3.0)]


@given(st.lists(st.text(st.sampled_from("ab 1."), max_size=20), min_size=1, max_size=5),
       st.integers(1, 4))
def test_mean_invariant_under_duplication(uis, k):
    base = [record(i, u) for i, u in enumerate(uis)]
    dup = [record(i, u) for i, u in enumerate(uis * k)]
    assert profile(base)[0].means == pytest.approx(profile(dup)[0].means)


@given(st.lists(st.text(st.sampled_from("ab 1.<>"), max_size=20), min_size=6, max_size=6))
def test_components_partition_total(parts):
    bundle = dict(zip(COMPONENTS, parts))
    row = profile([PromptLogRecord("r", "M", "B", "A", PromptBundle(**bundle))])[0]
    assert row.total == sum(row.means.values())
    assert 0.0 <= row.ui_ratio <= 1.0


def test_blank_labels_rejected():
    with pytest.raises(MalformedLogRecord):
        parse_record(json.dumps({"model": "", "benchmark": "B", "agent": "A"}))


def test_unknown_component_rejected():
    with pytest.raises(MalformedLogRecord):
        parse_record(json.dumps({"model": "M", "benchmark": "B", "agent": "A",
                                 "components": {"memory": "x"}}))


def test_bad_json_rejected():
    with pytest.raises(MalformedLogRecord):
        parse_record("{not json", 3)


def test_bundled_log_reproduces_breakdown():
    rows = profile_file(DATA / "table1_pretokenized.jsonl")
    assert len(rows) == len(read_log(DATA / "table1_pretokenized.jsonl"))
    react = next(r for r in rows if (r.model, r.benchmark, r.agent)
                 == ("GPT-4o", "AndroidControl", "ReAct"))
    shown = react.display()
    assert shown["total"] == 3220
    assert shown["ui_ratio"] == "86.7%"
    assert react.pretokenized


def test_format_rows_header_and_delimiter():
    rows = profile([record(0, "a")])
    text = format_rows(rows, ",")
    lines = text.splitlines()
    assert lines[0].split(",")[:4] == ["model", "benchmark", "agent", "records"]
    assert lines[1] == "M,B,A,1,0,0,0,1,0,0,1,100.0%,false"
