import re

import pytest
from hypothesis import example, given, settings

from src.models.tree import subdivide_all_edges
from src.services.newick_service import parse_newick, serialize_newick
from src.utils.error_handler import InputError, NewickParseError
from tests.strategies import trees


def test_parse_numbers_nodes_in_preorder():
    t = parse_newick("((a,b),(c,d));")
    assert t.children(0) == (1, 4)
    assert [t.taxon(v) for v in (2, 3, 5, 6)] == ["a", "b", "c", "d"]


def test_lengths_internal_labels_and_comments_are_dropped():
    noisy = parse_newick("((a:1.0,b:2e-3)x:0.5, [a comment] c:3) root;\n")
    assert noisy == parse_newick("((a,b),c);")


def test_quoted_labels_round_trip():
    t = parse_newick("('a b','it''s',c);")
    assert t.taxa == frozenset({"a b", "it's", "c"})
    assert serialize_newick(t) == "('a b','it''s',c);"


def test_single_leaf_tree():
    t = parse_newick("a;")
    assert t.num_nodes == 1
    assert serialize_newick(t) == "a;"


@pytest.mark.parametrize("text, offset, message", [
    ("", 0, "empty input"),
    ("(a,b)", 5, "missing ';'"),
    ("((a,b);", 6, "missing ')'"),
    ("(a,b));", 5, "unexpected ')'"),
    ("(a,,b);", 3, "empty leaf name"),
    ("(a,a);", 3, "duplicate leaf label"),
    ("(a,b);x", 6, "trailing garbage"),
    ("(a,b:x);", 5, "invalid branch length"),
    ("(é,é);", 4, "duplicate leaf label"),
])
def test_parse_errors_report_byte_offsets(text, offset, message):
    with pytest.raises(NewickParseError, match=re.escape(message)) as info:
        parse_newick(text)
    assert info.value.offset == offset
    assert f"byte offset {offset}" in str(info.value)


def test_subdivided_trees_cannot_be_serialized():
    subdivided, _ = subdivide_all_edges(parse_newick("(a,b);"))
    with pytest.raises(InputError):
        serialize_newick(subdivided)


def test_load_tree_skips_comment_lines(load_fixture_tree):
    assert load_fixture_tree("completable_basic.nwk") == parse_newick("((a,b),(c,d));")


@settings(max_examples=1000)
@given(trees())
@example(parse_newick("((a,b),(c,d));"))
@example(parse_newick("(a,b,c,d);"))
def test_serialize_parse_identity(t):
    assert parse_newick(serialize_newick(t)) == t
