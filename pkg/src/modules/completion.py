"""Galled tree completion.

Given a tree and characters, decide whether transfer edges can be added so the
result is a galled perfect transfer network, and build one when it exists.
Every character must have at most two first appearances; the two FAs of a
character are "FA neighbours".  One transfer edge is added per node with two
or more neighbours (from the edge above its minimal neighbour) and one per
simple pair; the result is a witness iff it is galled.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, Optional, Set, Tuple, Union

from src.models.characters import Character, CharacterSet
from src.models.network import (
    Edge,
    LgtNetwork,
    find_intersecting_cycles,
    suppress_subdivision_nodes,
)
from src.models.tree import Tree, expand_node, subdivide_all_edges
from src.modules.ptn_verify import OperationCounter, explains, first_appearances, render_clade
from src.utils.error_handler import PreconditionError
from src.utils.logger import get_logger

logger = get_logger("completion")


@dataclass(frozen=True)
class TooManyFAs:
    character: Character
    first_appearances: Tuple[int, ...]

    def to_dict(self, t: Tree) -> Dict[str, Any]:
        return {
            "reason": "TooManyFAs",
            "character": self.character.name,
            "first_appearances": [render_clade(t, v) for v in self.first_appearances],
        }


@dataclass(frozen=True)
class IncomparableFaNeighbors:
    node: int
    pair: Tuple[int, int]

    def to_dict(self, t: Tree) -> Dict[str, Any]:
        return {
            "reason": "IncomparableFaNeighbors",
            "node": render_clade(t, self.node),
            "pair": [render_clade(t, v) for v in self.pair],
        }


@dataclass(frozen=True)
class NotGalled:
    """Two transfer edges of the redundancy-free network whose cycles meet."""
    cycle_pair: Tuple[Edge, Edge]
    network: LgtNetwork

    def to_dict(self, t: Tree) -> Dict[str, Any]:
        support = self.network.support
        return {
            "reason": "NotGalled",
            "cycles": [
                {"donor": render_clade(support, u), "recipient": render_clade(support, v)}
                for u, v in self.cycle_pair
            ],
        }


Rejection = Union[TooManyFAs, IncomparableFaNeighbors, NotGalled]


@dataclass
class FaNeighborIndex:
    tree: Tree
    neighbors: Dict[int, List[int]] = field(default_factory=dict)
    pair_character: Dict[FrozenSet[int], Character] = field(default_factory=dict)
    first_appearances: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def neighbors_of(self, v: int) -> List[int]:
        return self.neighbors.get(v, [])

    @property
    def possibly_simple(self) -> Set[int]:
        return {v for v, partners in self.neighbors.items() if len(partners) == 1}

    def simple_pairs(self) -> List[Tuple[int, int]]:
        pairs = []
        for v in sorted(self.possibly_simple):
            w = self.neighbors[v][0]
            if v < w and self.neighbors[w] == [v]:
                pairs.append((v, w))
        return pairs


@dataclass
class CompletionOutcome:
    network: Optional[LgtNetwork] = None
    origins: Dict[str, Optional[int]] = field(default_factory=dict)
    redundancy_free: Optional[LgtNetwork] = None
    rejection: Optional[Rejection] = None

    @property
    def completable(self) -> bool:
        return self.network is not None

    def to_dict(self, t: Tree) -> Dict[str, Any]:
        if self.completable:
            return {"verdict": "completable", "transfers": len(self.network.transfer_edges)}
        return {"verdict": "rejected", **self.rejection.to_dict(t)}


def fa_neighbor_index(t: Tree, cs: CharacterSet,
                      counter: Optional[OperationCounter] = None) -> Union[FaNeighborIndex, TooManyFAs]:
    if t.has_subdivision_nodes:
        raise PreconditionError("completion needs a tree without subdivision nodes")
    cs.require_within(t.taxa)

    index = FaNeighborIndex(tree=t)
    for c in cs:
        fas = first_appearances(t, c, counter)
        index.first_appearances[c.name] = fas
        if len(fas) > 2:
            logger.info(f"❌ Character {c.name!r} has {len(fas)} first appearances")
            return TooManyFAs(c, fas)
        if len(fas) == 2:
            u, v = fas
            index.neighbors.setdefault(u, []).append(v)
            index.neighbors.setdefault(v, []).append(u)
            index.pair_character[frozenset(fas)] = c
    return index


def _simple_pair_edge(t: Tree, v: int, w: int) -> Tuple[int, int]:
    # Donor is the side holding the smallest taxon label
    if min(t.clade_leaves(v)) < min(t.clade_leaves(w)):
        return v, w
    return w, v


def redundancy_free_network(t: Tree, idx: FaNeighborIndex,
                            counter: Optional[OperationCounter] = None) -> Union[LgtNetwork, IncomparableFaNeighbors]:
    subdivided, above = subdivide_all_edges(t)
    edges: List[Edge] = []
    marked: Set[int] = set()

    for v in t.postorder():
        partners = idx.neighbors_of(v)
        if counter is not None:
            counter.add(1 + len(partners))
        if not partners:
            continue

        c_min = partners[0]
        for u in partners:
            if not t.is_comparable(u, c_min):
                logger.info(f"❌ Node {v} has incomparable FA neighbours {c_min} and {u}")
                return IncomparableFaNeighbors(v, (c_min, u))
            if t.is_ancestor(u, c_min):
                c_min = u

        if len(partners) >= 2:
            edges.append((above[c_min], above[v]))
        elif c_min in marked:
            donor, recipient = _simple_pair_edge(t, v, c_min)
            edges.append((above[donor], above[recipient]))
        else:
            marked.add(v)

    logger.debug(f"Redundancy-free network: {len(edges)} transfer edges over {subdivided.num_nodes} nodes")
    return LgtNetwork(subdivided, edges)


def _check_neighbor_chains(t: Tree, idx: FaNeighborIndex) -> None:
    # Characters sharing an FA have pairwise comparable other FAs
    for v, partners in idx.neighbors.items():
        ordered = sorted(partners, key=t.depth)
        assert all(t.is_ancestor(lower, upper) for upper, lower in zip(ordered, ordered[1:])), \
            f"FA neighbours of node {v} are not a chain: {ordered}"


def galled_completion(t: Tree, cs: CharacterSet,
                      counter: Optional[OperationCounter] = None) -> CompletionOutcome:
    index = fa_neighbor_index(t, cs, counter)
    if isinstance(index, TooManyFAs):
        return CompletionOutcome(rejection=index)

    network = redundancy_free_network(t, index, counter)
    if isinstance(network, IncomparableFaNeighbors):
        return CompletionOutcome(rejection=network)

    witness = find_intersecting_cycles(network)
    if witness is not None:
        logger.info(f"❌ Redundancy-free network is not galled: {witness[0]} and {witness[1]} share a cycle node")
        return CompletionOutcome(redundancy_free=network, rejection=NotGalled(witness, network))

    # Each node carries at most one transfer edge
    assert len(network.transfer_nodes) == 2 * len(network.transfer_edges)
    _check_neighbor_chains(t, index)

    completed = suppress_subdivision_nodes(network)
    report = explains(completed, cs)
    assert report.all_explained, f"galled completion fails to explain {report.unexplained()}"

    logger.info(f"✅ Galled completion found with {len(completed.transfer_edges)} transfer edges")
    return CompletionOutcome(network=completed, origins=report.origins, redundancy_free=network)


def restrict_to_candidates(t: Tree, cs: CharacterSet) -> Tuple[CharacterSet, List[Character]]:
    """Splits off the characters with more than two first appearances."""
    cs.require_within(t.taxa)
    blocking = [c for c in cs if len(first_appearances(t, c)) > 2]
    if blocking:
        logger.info(f"Dropping {len(blocking)} characters with more than two first appearances")
    dropped = set(blocking)
    return cs.filter(lambda c: c not in dropped), blocking


def refine_and_complete(t: Tree, cs: CharacterSet,
                        max_degree: int = 6) -> Optional[Tuple[Tree, CompletionOutcome]]:
    """Tries single polytomy expansions until one yields a galled completion.

    Polytomies are visited in NodeId order, groups by increasing size and then
    lexicographically by child position.  Nodes with more than ``max_degree``
    children are skipped.
    """
    for v in t.nodes():
        kids = t.children(v)
        if not 3 <= len(kids) <= max_degree:
            continue
        for size in range(2, len(kids)):
            for group in combinations(kids, size):
                refined = expand_node(t, v, group)
                outcome = galled_completion(refined, cs)
                if outcome.completable:
                    logger.info(f"✅ Expanding node {v} around {list(group)} makes the tree completable")
                    return refined, outcome
    return None
