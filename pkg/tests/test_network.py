import pytest
from hypothesis import given, settings

from src.models.network import (
    LgtNetwork,
    find_intersecting_cycles,
    is_galled,
    suppress_subdivision_nodes,
)
from src.models.tree import subdivide_all_edges
from src.modules.oracle import enumerate_galled_networks
from src.services.newick_service import parse_newick
from src.utils.error_handler import ModelError
from tests.strategies import naive_is_galled, reachable, trees


@pytest.fixture
def star_network_tree():
    # (a,b,c,d) with every edge subdivided: p(a)=5, p(b)=6, p(c)=7, p(d)=8
    subdivided, _ = subdivide_all_edges(parse_newick("(a,b,c,d);"))
    return subdivided


def test_transfer_endpoints_must_be_incomparable(star_network_tree):
    with pytest.raises(ModelError, match="incomparable"):
        LgtNetwork(star_network_tree, [(5, 1)])


def test_transfer_nodes_need_one_support_child():
    tree = parse_newick("((a,b),(c,d));")
    with pytest.raises(ModelError, match="support child"):
        LgtNetwork(tree, [(1, 4)])


def test_duplicate_and_unknown_transfer_edges(star_network_tree):
    with pytest.raises(ModelError, match="twice"):
        LgtNetwork(star_network_tree, [(5, 6), (5, 6)])
    with pytest.raises(ModelError, match="unknown"):
        LgtNetwork(star_network_tree, [(5, 42)])


def test_network_views(star_network_tree):
    n = LgtNetwork(star_network_tree, [(5, 6)])
    assert n.transfer_nodes == frozenset({5, 6})
    assert n.successors(5) == (1, 6)
    assert n.in_degree(6) == 2
    assert n.reticulations() == [6]
    graph = n.to_networkx()
    assert graph.edges[5, 6]["kind"] == "transfer"
    assert graph.edges[0, 5]["kind"] == "support"
    assert graph.number_of_edges() == len(n.support_edges()) + 1


def test_base_tree_of_fixture_network(load_fixture_network):
    n = load_fixture_network("completable_basic_galled.net")
    assert n.base_tree() == parse_newick("((a,b),(c,d));")


def test_suppress_keeps_transfer_endpoints(star_network_tree):
    n = LgtNetwork(star_network_tree, [(5, 6)])
    suppressed = suppress_subdivision_nodes(n)
    assert suppressed.num_nodes == 7
    assert suppressed.transfer_edges == ((5, 6),)
    assert suppress_subdivision_nodes(suppressed) == suppressed


def test_fixture_networks_galledness(load_fixture_network):
    assert is_galled(load_fixture_network("completable_basic_galled.net"))
    two_cycles = load_fixture_network("completable_basic_two_cycles.net")
    assert not is_galled(two_cycles)
    assert find_intersecting_cycles(two_cycles) == ((7, 8), (9, 10))


def test_cycles_meeting_in_a_single_node_are_not_galled(star_network_tree):
    n = LgtNetwork(star_network_tree, [(5, 6), (7, 8)])
    assert set(find_intersecting_cycles(n)) == {(5, 6), (7, 8)}


def test_antiparallel_transfers_are_not_galled(star_network_tree):
    n = LgtNetwork(star_network_tree, [(5, 6), (6, 5)])
    assert find_intersecting_cycles(n) == ((5, 6), (6, 5))


def test_trees_and_disjoint_cycles_are_galled():
    subdivided, above = subdivide_all_edges(parse_newick("((a,b),(c,d));"))
    assert is_galled(LgtNetwork(subdivided))
    n = LgtNetwork(subdivided, [(above[2], above[3]), (above[6], above[5])])
    assert is_galled(n)


@settings(max_examples=40, deadline=None)
@given(trees(min_taxa=2, max_taxa=4))
def test_galledness_matches_cycle_pair_scan(t):
    subdivided, above = subdivide_all_edges(t)
    points = sorted(above.values())
    pairs = [(u, v) for u in points for v in points if u != v and not subdivided.is_comparable(u, v)]
    # every pair of candidate edges, plus each single edge
    for i, e in enumerate(pairs):
        n = LgtNetwork(subdivided, [e])
        assert is_galled(n)
        for f in pairs[i + 1:]:
            n = LgtNetwork(subdivided, [e, f])
            assert is_galled(n) == naive_is_galled(n)


@settings(max_examples=25, deadline=None)
@given(trees(min_taxa=2, max_taxa=4))
def test_enumerated_networks_satisfy_subtree_and_reachability_properties(t):
    for n in enumerate_galled_networks(t, 2):
        assert is_galled(n)
        support = n.support
        nodes = list(n.nodes())

        # A node above two transfer nodes holds some transfer edge entirely below it
        for v in nodes:
            below = [x for x in n.transfer_nodes if support.is_ancestor(x, v)]
            if len(below) >= 2:
                assert any(support.is_ancestor(a, v) and support.is_ancestor(b, v) for a, b in n.transfer_edges)

        # Reaching an incomparable node always goes through a single transfer edge
        for x in nodes:
            for y in reachable(n, x):
                if support.is_comparable(x, y):
                    continue
                assert any(support.is_ancestor(a, x) and support.is_ancestor(y, b) for a, b in n.transfer_edges)


def test_galledness_ignores_node_relabeling():
    # Same network as completable_basic_galled.net with the children of the root swapped
    tree = parse_newick("((c,d),(a,b));")
    subdivided, above = subdivide_all_edges(tree)
    b, c = tree.node_of_taxon("b"), tree.node_of_taxon("c")
    assert is_galled(LgtNetwork(subdivided, [(above[b], above[c])]))
