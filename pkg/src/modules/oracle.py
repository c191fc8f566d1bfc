"""Exhaustive ground truth for small instances.

Completion is searched over the once-subdivided tree: every edge may carry
one transfer node and transfer edges join subdivision nodes of incomparable
edges.  In a galled network the cycles of two transfer edges are disjoint,
so by default only families with pairwise disjoint cycles are explored
(which also makes them matchings).  ``widen=True`` drops that restriction
and checks every oriented edge set with the full galledness test.
"""
import random
from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from src.models.characters import Character, CharacterSet
from src.models.network import Edge, LgtNetwork, is_galled, suppress_subdivision_nodes
from src.models.tree import Tree, TreeBuilder, subdivide_all_edges
from src.modules.ptn_verify import find_origin
from src.utils.error_handler import InputError, PreconditionError
from src.utils.logger import get_logger

logger = get_logger("oracle")

MAX_TREE_TAXA = 7
MAX_COMPLETION_EDGES = 12
MAX_COMPAT_TAXA = 5
MAX_COMPAT_CHARACTERS = 4
WIDEN_MAX_EDGES = 6

# A tree shape: a taxon for leaves, a tuple of shapes for internal nodes
Shape = Union[str, tuple]


def _set_partitions(items: Sequence[str]) -> Iterator[List[List[str]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]
        yield [[first]] + partition


def _shapes(items: Sequence[str], position: Dict[str, int]) -> Iterator[Shape]:
    if len(items) == 1:
        yield items[0]
        return
    for partition in _set_partitions(items):
        if len(partition) < 2:
            continue
        blocks = sorted(partition, key=lambda block: position[block[0]])
        for combo in product(*(list(_shapes(block, position)) for block in blocks)):
            yield tuple(combo)


def _shape_to_tree(shape: Shape) -> Tree:
    builder = TreeBuilder()
    stack: List[Tuple[Shape, Optional[int]]] = [(shape, None)]
    while stack:
        node, parent = stack.pop()
        if isinstance(node, str):
            builder.add_node(parent, node)
            continue
        v = builder.add_node(parent)
        for child in reversed(node):
            stack.append((child, v))
    return builder.build()


def enumerate_trees(taxa: Iterable[str], max_taxa: int = MAX_TREE_TAXA) -> Iterator[Tree]:
    """Every rooted tree on ``taxa`` without unary nodes, once each."""
    order = sorted(taxa) if isinstance(taxa, (set, frozenset)) else list(taxa)
    if not order:
        raise InputError("cannot enumerate trees over an empty taxa set")
    if len(order) > max_taxa:
        raise PreconditionError(f"tree enumeration is limited to {max_taxa} taxa, got {len(order)}")
    position = {taxon: i for i, taxon in enumerate(order)}
    for shape in _shapes(order, position):
        yield _shape_to_tree(shape)


@dataclass
class OracleVerdict:
    ok: bool
    network: Optional[LgtNetwork] = None
    tree: Optional[Tree] = None
    examined: int = 0


class _SubdividedTree:
    """The once-subdivided tree with every oriented candidate transfer edge and its cycle."""

    def __init__(self, t: Tree):
        self.tree = t
        self.subdivided, above = subdivide_all_edges(t)
        sub = self.subdivided
        points = sorted(above.values())
        self.pairs: List[Edge] = [
            (u, v) for u in points for v in points if u != v and not sub.is_comparable(u, v)
        ]
        self.cycles: Dict[Edge, FrozenSet[int]] = {}
        for u, v in self.pairs:
            top = sub.lca(u, v)
            self.cycles[(u, v)] = frozenset(self._path(u, top)) | frozenset(self._path(v, top))

    def _path(self, v: int, top: int) -> List[int]:
        path = [v]
        while v != top:
            v = self.subdivided.parent(v)
            path.append(v)
        return path

    def network(self, edges: Sequence[Edge]) -> LgtNetwork:
        return LgtNetwork(self.subdivided, edges)


def _disjoint_families(space: _SubdividedTree, limit: int) -> Iterator[Tuple[Edge, ...]]:
    """Sets of candidate edges with pairwise disjoint cycles, smallest index first."""
    pairs = space.pairs

    def extend(start: int, chosen: Tuple[Edge, ...], used: FrozenSet[int]) -> Iterator[Tuple[Edge, ...]]:
        yield chosen
        if len(chosen) == limit:
            return
        for i in range(start, len(pairs)):
            cycle = space.cycles[pairs[i]]
            if cycle & used:
                continue
            yield from extend(i + 1, chosen + (pairs[i],), used | cycle)

    yield from extend(0, (), frozenset())


def _explains_all(n: LgtNetwork, characters: Sequence[Character]) -> bool:
    return all(find_origin(n, c) is not None for c in characters)


def brute_force_completable(t: Tree, cs: CharacterSet, widen: bool = False,
                            max_edges: int = MAX_COMPLETION_EDGES,
                            widen_max_edges: int = WIDEN_MAX_EDGES) -> OracleVerdict:
    if t.has_subdivision_nodes:
        raise PreconditionError("the oracle works on trees without subdivision nodes")
    cs.require_within(t.taxa)
    edges = t.num_nodes - 1
    limit = widen_max_edges if widen else max_edges
    if edges > limit:
        raise PreconditionError(f"exhaustive completion is limited to {limit} edges, tree has {edges}")

    space = _SubdividedTree(t)
    bare = space.network(())
    pending = [c for c in cs if find_origin(bare, c) is None]
    if not pending:
        return OracleVerdict(True, suppress_subdivision_nodes(bare), t, examined=1)

    examined = 0
    if widen:
        candidates: Iterable[Tuple[Edge, ...]] = (
            family
            for size in range(len(cs) + 1)
            for family in combinations(space.pairs, size)
        )
    else:
        candidates = _disjoint_families(space, len(cs))

    for family in candidates:
        examined += 1
        network = space.network(family)
        if widen and not is_galled(network):
            continue
        if _explains_all(network, pending):
            logger.debug(f"Oracle witness with {len(family)} transfers after {examined} candidates")
            return OracleVerdict(True, suppress_subdivision_nodes(network), t, examined)
    return OracleVerdict(False, examined=examined)


def brute_force_compatible(cs: CharacterSet, taxa: Optional[Iterable[str]] = None,
                           max_taxa: int = MAX_COMPAT_TAXA,
                           max_characters: int = MAX_COMPAT_CHARACTERS) -> OracleVerdict:
    order = list(taxa) if taxa is not None else sorted(cs.taxa)
    if isinstance(taxa, (set, frozenset)):
        order = sorted(taxa)
    if len(order) > max_taxa:
        raise PreconditionError(f"exhaustive compatibility is limited to {max_taxa} taxa, got {len(order)}")
    if len(cs) > max_characters:
        raise PreconditionError(
            f"exhaustive compatibility is limited to {max_characters} characters, got {len(cs)}"
        )
    cs.require_within(order, "the taxa")

    examined = 0
    for tree in enumerate_trees(order):
        verdict = brute_force_completable(tree, cs)
        examined += verdict.examined
        if verdict.ok:
            return OracleVerdict(True, verdict.network, tree, examined)
    return OracleVerdict(False, examined=examined)


def enumerate_galled_networks(t: Tree, k: int, max_edges: int = MAX_COMPLETION_EDGES) -> Iterator[LgtNetwork]:
    """Galled networks over the once-subdivided ``t`` with at most ``k`` transfer edges."""
    if t.num_nodes - 1 > max_edges:
        raise PreconditionError(f"network enumeration is limited to {max_edges} edges")
    space = _SubdividedTree(t)
    for family in _disjoint_families(space, k):
        yield space.network(family)


# ----------------------------------------------------------------------
# Random instances


def random_tree(taxa: Sequence[str], rng: random.Random, binary_bias: float = 0.5) -> Tree:
    """Random rooted tree without unary nodes; ``binary_bias`` is the chance of a two-way split."""
    if not taxa:
        raise InputError("cannot build a tree over an empty taxa set")

    def grow(items: List[str]) -> Shape:
        if len(items) == 1:
            return items[0]
        items = items[:]
        rng.shuffle(items)
        blocks = 2 if rng.random() < binary_bias else rng.randint(2, len(items))
        cuts = sorted(rng.sample(range(1, len(items)), blocks - 1))
        bounds = [0] + cuts + [len(items)]
        return tuple(grow(items[a:b]) for a, b in zip(bounds, bounds[1:]))

    return _shape_to_tree(grow(list(taxa)))


def random_character_set(taxa: Sequence[str], rng: random.Random, max_characters: int = MAX_COMPAT_CHARACTERS) -> CharacterSet:
    if not taxa:
        raise InputError("cannot draw characters over an empty taxa set")
    order = list(taxa)
    wanted = rng.randint(1, max_characters)
    seen = set()
    characters = []
    for _ in range(8 * wanted):
        if len(characters) == wanted:
            break
        members = frozenset(rng.sample(order, rng.randint(1, len(order))))
        if members in seen:
            continue
        seen.add(members)
        characters.append(Character(f"C{len(characters) + 1}", members))
    return CharacterSet(characters, taxa=order)
