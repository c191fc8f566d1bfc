from itertools import combinations

import pytest
from hypothesis import given, settings

from src.models.characters import Character, CharacterSet
from src.models.network import is_galled
from src.models.tree import subdivide_all_edges
from src.modules.completion import (
    FaNeighborIndex,
    IncomparableFaNeighbors,
    NotGalled,
    TooManyFAs,
    fa_neighbor_index,
    galled_completion,
    redundancy_free_network,
    refine_and_complete,
    restrict_to_candidates,
)
from src.modules.ptn_verify import OperationCounter, explains, first_appearances
from src.services.newick_service import parse_newick
from src.utils.error_handler import PreconditionError
from tests.strategies import trees_with_characters


def test_basic_instance_completes_to_the_fixture_network(load_fixture_tree, load_fixture_characters,
                                                         load_fixture_network):
    t = load_fixture_tree("completable_basic.nwk")
    outcome = galled_completion(t, load_fixture_characters("completable_basic.sets"))
    assert outcome.completable
    assert outcome.network == load_fixture_network("completable_basic_galled.net")
    assert outcome.origins == {"C1": 1, "C2": 1, "C3": 7}
    assert outcome.to_dict(t) == {"verdict": "completable", "transfers": 1}


def test_minimal_neighbor_and_simple_pair(load_fixture_tree, load_fixture_characters):
    t = load_fixture_tree("minimal_neighbor.nwk")
    characters = load_fixture_characters("minimal_neighbor.sets")
    index = fa_neighbor_index(t, characters)
    assert isinstance(index, FaNeighborIndex)

    node = t.node_of_taxon
    x, y, z = t.parent(node("s1")), t.parent(node("s3")), node("s1")
    assert sorted(index.neighbors_of(y)) == sorted([x, z])
    assert index.simple_pairs() == [(node("s6"), node("s8"))]

    _, above = subdivide_all_edges(t)
    network = redundancy_free_network(t, index)
    assert network.transfer_edges == ((above[z], above[y]), (above[node("s6")], above[node("s8")]))

    outcome = galled_completion(t, characters)
    assert outcome.completable
    assert len(outcome.network.transfer_edges) == 2


def test_too_many_first_appearances():
    spread = parse_newick("(a,b,c,d);")
    outcome = galled_completion(spread, CharacterSet([Character("W", {"a", "b", "c"})]))
    assert isinstance(outcome.rejection, TooManyFAs)
    assert outcome.to_dict(spread) == {
        "verdict": "rejected", "reason": "TooManyFAs", "character": "W", "first_appearances": ["a", "b", "c"],
    }

    t = parse_newick("((a,b),(c,d));")
    characters = CharacterSet([Character("ok", {"a", "b"}), Character("X", {"a", "c", "d"})])
    assert galled_completion(t, characters).completable


def test_two_simple_pairs_through_the_root_clash():
    t = parse_newick("((a,b),(c,d));")
    outcome = galled_completion(t, CharacterSet([Character("X", {"a", "b", "d"}), Character("Y", {"a", "c"})]))
    assert isinstance(outcome.rejection, NotGalled)


def test_incomparable_neighbours_are_rejected():
    t = parse_newick("((a,b),(c,d),(e,f));")
    characters = CharacterSet([Character("P", {"a", "c"}), Character("Q", {"a", "e"})])
    outcome = galled_completion(t, characters)
    assert isinstance(outcome.rejection, IncomparableFaNeighbors)
    assert outcome.rejection.node == t.node_of_taxon("a")
    payload = outcome.to_dict(t)
    assert payload["reason"] == "IncomparableFaNeighbors"
    assert sorted(payload["pair"]) == ["c", "e"]


def test_crossing_chains_are_not_galled(load_fixture_tree, load_fixture_characters):
    t = load_fixture_tree("crossing_chains.nwk")
    outcome = galled_completion(t, load_fixture_characters("crossing_chains.sets"))
    assert isinstance(outcome.rejection, NotGalled)
    assert outcome.redundancy_free is not None
    assert not is_galled(outcome.redundancy_free)
    payload = outcome.to_dict(t)
    assert payload["reason"] == "NotGalled"
    assert len(payload["cycles"]) == 2


def test_all_clade_characters_need_no_transfer():
    t = parse_newick("((a,b),(c,d));")
    characters = CharacterSet(Character(f"K{v}", t.clade_leaves(v)) for v in t.nodes())
    outcome = galled_completion(t, characters)
    assert outcome.completable
    assert outcome.network.transfer_edges == ()
    assert outcome.network.support == t


def test_subdivided_input_is_a_precondition_error():
    subdivided, _ = subdivide_all_edges(parse_newick("(a,b);"))
    with pytest.raises(PreconditionError):
        galled_completion(subdivided, CharacterSet([Character("A", {"a"})]))


def test_restrict_to_candidates_drops_blocking_characters():
    t = parse_newick("(a,b,c,d);")
    characters = CharacterSet([Character("W", {"a", "b", "c"}), Character("V", {"a", "b"})])
    kept, dropped = restrict_to_candidates(t, characters)
    assert kept.names == ["V"]
    assert [c.name for c in dropped] == ["W"]
    assert galled_completion(t, kept).completable


def test_refinement_resolves_a_polytomy():
    t = parse_newick("(a,b,c,d);")
    characters = CharacterSet([Character("W", {"a", "b", "c"})])
    assert not galled_completion(t, characters).completable
    refined, outcome = refine_and_complete(t, characters)
    assert outcome.completable
    assert refined.children(0) == (5, 3, 4)
    assert frozenset("ab") in refined.clades()


def test_refinement_gives_up_when_nothing_helps():
    t = parse_newick("((a,b),(c,d));")
    characters = CharacterSet([Character("P", {"a", "c"}), Character("Q", {"b", "d"})])
    assert refine_and_complete(t, characters) is None


def _balanced_newick(labels):
    if len(labels) == 1:
        return labels[0]
    half = len(labels) // 2
    return f"({_balanced_newick(labels[:half])},{_balanced_newick(labels[half:])})"


def test_operation_count_scales_linearly_with_characters():
    t = parse_newick(_balanced_newick([f"x{i}" for i in range(512)]) + ";")
    clades = [t.clade_leaves(v) for v in t.nodes()]
    counts = []
    for size in (10, 100, 1000):
        counter = OperationCounter()
        characters = CharacterSet(Character(f"K{i}", clades[i]) for i in range(size))
        assert galled_completion(t, characters, counter).completable
        counts.append(counter.count)
    assert counts[1] <= 3 * 10 * counts[0]
    assert counts[2] <= 3 * 10 * counts[1]


@settings(max_examples=150, deadline=None)
@given(trees_with_characters(max_taxa=6))
def test_completable_verdicts_have_valid_witnesses(instance):
    t, characters = instance
    outcome = galled_completion(t, characters)
    if outcome.completable:
        assert is_galled(outcome.network)
        assert explains(outcome.network, characters).all_explained
        assert all(len(first_appearances(t, c)) <= 2 for c in characters)
        assert len(outcome.redundancy_free.transfer_nodes) == 2 * len(outcome.redundancy_free.transfer_edges)
        assert outcome.network.base_tree() == t
    else:
        assert outcome.rejection is not None


@settings(max_examples=150, deadline=None)
@given(trees_with_characters(max_taxa=6))
def test_characters_sharing_a_first_appearance_have_comparable_partners(instance):
    t, characters = instance
    if not galled_completion(t, characters).completable:
        return
    fas = {c.name: first_appearances(t, c) for c in characters}
    for a, b in combinations(characters, 2):
        if len(fas[a.name]) != 2 or len(fas[b.name]) != 2:
            continue
        shared = set(fas[a.name]) & set(fas[b.name])
        if len(shared) != 1:
            continue
        (other_a,) = set(fas[a.name]) - shared
        (other_b,) = set(fas[b.name]) - shared
        assert t.is_comparable(other_a, other_b)


def test_nested_partners_of_a_shared_first_appearance_share_one_transfer():
    t = parse_newick("((a,b),(c,(d,e)));")
    outcome = galled_completion(t, CharacterSet([Character("X", {"a", "c", "d", "e"}), Character("Y", {"a", "d", "e"})]))
    assert outcome.completable
    assert len(outcome.network.transfer_edges) == 1
