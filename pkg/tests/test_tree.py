import pytest
from hypothesis import given, settings

from src.models.network import LgtNetwork, suppress_subdivision_nodes
from src.models.tree import Tree, TreeBuilder, expand_node, subdivide_all_edges, subdivide_edges
from src.services.newick_service import parse_newick
from src.utils.error_handler import InputError, ModelError, PreconditionError
from tests.strategies import naive_ancestors, trees


@pytest.fixture
def tree():
    # 0 root, 1 (a,b), 2 a, 3 b, 4 (c,d,e), 5 c, 6 d, 7 e
    return parse_newick("((a,b),(c,d,e));")


def test_preorder_numbering_and_structure(tree):
    assert tree.root == 0
    assert tree.children(0) == (1, 4)
    assert tree.children(4) == (5, 6, 7)
    assert tree.parent(6) == 4
    assert tree.parent(0) is None
    assert tree.leaves() == (2, 3, 5, 6, 7)
    assert tree.taxa_order == ("a", "b", "c", "d", "e")
    assert tree.node_of_taxon("d") == 6
    assert tree.depth(6) == 2
    assert not tree.has_subdivision_nodes


def test_postorder_visits_children_first(tree):
    order = tree.postorder()
    assert order == (2, 3, 1, 5, 6, 7, 4, 0)


def test_is_ancestor_is_reflexive_and_rooted(tree):
    for v in tree.nodes():
        assert tree.is_ancestor(v, v)
        assert tree.is_ancestor(v, tree.root)
    assert not tree.is_ancestor(2, 3)
    assert not tree.is_ancestor(3, 2)
    assert tree.is_ancestor(6, 4)
    assert not tree.is_ancestor(4, 6)


def test_lca(tree):
    assert tree.lca(5, 5) == 5
    assert tree.lca(2, 6) == 0
    assert tree.lca(5, 7) == 4
    assert tree.lca(1, 3) == 1


def test_clade_leaves(tree):
    assert tree.clade_leaves(tree.root) == frozenset("abcde")
    assert tree.clade_leaves(3) == frozenset("b")
    assert tree.clade_leaves(4) == frozenset("cde")
    for v in tree.nodes():
        if not tree.is_leaf(v):
            assert sum(len(tree.clade_leaves(c)) for c in tree.children(v)) == len(tree.clade_leaves(v))


def test_invalid_node_ids_are_input_errors(tree):
    with pytest.raises(InputError):
        tree.is_ancestor(0, 99)
    with pytest.raises(InputError):
        tree.lca(-1, 2)
    with pytest.raises(InputError):
        tree.node_of_taxon("zz")


@pytest.mark.parametrize("children, labels", [
    ([[1], [], []], {1: "a", 2: "b"}),          # two roots
    ([[1, 2], [2], []], {2: "a"}),              # node with two parents
    ([[1, 2], [], []], {1: "a"}),               # unlabelled leaf
    ([[1], []], {0: "r", 1: "a"}),              # labelled internal node
    ([[1, 2], [], []], {1: "a", 2: "a"}),       # duplicate taxon
    ([], {}),
])
def test_malformed_trees_are_rejected(children, labels):
    with pytest.raises(ModelError):
        Tree(children, labels)


def test_subdivide_all_edges_numbers_after_originals(tree):
    subdivided, above = subdivide_all_edges(tree)
    assert subdivided.num_nodes == tree.num_nodes + (tree.num_nodes - 1)
    assert above == {v: tree.num_nodes + i for i, v in enumerate(tree.preorder()[1:])}
    for v, s in above.items():
        assert subdivided.children(s) == (v,)
        assert subdivided.parent(s) == tree.parent(v)
    assert subdivided.has_subdivision_nodes


def test_subdivide_single_edge_tree_gives_a_path():
    builder = TreeBuilder()
    root = builder.add_node()
    builder.add_node(root, "a")
    subdivided, above = subdivide_all_edges(builder.build())
    assert subdivided.num_nodes == 3
    assert subdivided.children(0) == (2,)
    assert above == {1: 2}
    assert subdivided.has_subdivision_nodes


def test_subdivision_preconditions(tree):
    subdivided, _ = subdivide_all_edges(tree)
    with pytest.raises(PreconditionError):
        subdivide_all_edges(subdivided)
    with pytest.raises(PreconditionError):
        subdivide_edges(tree, [tree.root])


def test_subdivide_selected_edges_only(tree):
    subdivided, above = subdivide_edges(tree, [6, 2])
    assert above == {2: 8, 6: 9}
    assert subdivided.children(1) == (8, 3)
    assert subdivided.children(4) == (5, 9, 7)


def test_expand_node_inserts_group_parent(tree):
    refined = expand_node(tree, 4, [6, 7])
    assert refined.children(4) == (5, 8)
    assert refined.children(8) == (6, 7)
    assert frozenset("de") in refined.clades()
    with pytest.raises(PreconditionError):
        expand_node(tree, 4, [5, 6, 7])
    with pytest.raises(PreconditionError):
        expand_node(tree, 4, [2, 5])


def test_trees_compare_by_structure():
    assert parse_newick("((a,b),c);") == parse_newick("((a,b),c);")
    assert parse_newick("((a,b),c);") != parse_newick("(a,(b,c));")


@given(trees())
def test_lca_matches_upward_walk(t):
    for u in t.nodes():
        up_u = naive_ancestors(t, u)
        for v in t.nodes():
            up_v = set(naive_ancestors(t, v))
            expected = next(x for x in up_u if x in up_v)
            assert t.lca(u, v) == expected
            assert t.is_ancestor(u, v) == (v in up_u)


@settings(max_examples=50)
@given(trees())
def test_ancestry_is_a_partial_order(t):
    nodes = list(t.nodes())
    for u in nodes:
        for v in nodes:
            if u != v and t.is_ancestor(u, v):
                assert not t.is_ancestor(v, u)
                for w in nodes:
                    if t.is_ancestor(v, w):
                        assert t.is_ancestor(u, w)


@given(trees())
def test_subdivide_then_suppress_is_identity(t):
    subdivided, _ = subdivide_all_edges(t)
    assert subdivided.num_nodes == 2 * t.num_nodes - 1
    assert suppress_subdivision_nodes(LgtNetwork(subdivided)).support == t
