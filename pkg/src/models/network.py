"""LGT networks: a support tree plus explicitly designated transfer edges."""
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from src.models.tree import Tree
from src.utils.error_handler import InputError, ModelError
from src.utils.logger import get_logger

logger = get_logger("network")

Edge = Tuple[int, int]


class LgtNetwork:
    """A support tree with transfer edges (donor, recipient) between incomparable nodes."""

    def __init__(self, support: Tree, transfer_edges: Iterable[Edge] = ()):
        edges: List[Edge] = []
        seen: Set[Edge] = set()
        for u, v in transfer_edges:
            try:
                comparable = support.is_comparable(u, v)
            except InputError:
                raise ModelError(f"transfer edge ({u}, {v}) references an unknown node") from None
            if comparable:
                raise ModelError(
                    f"transfer edge ({u}, {v}) joins comparable nodes; "
                    "transfer endpoints must be incomparable in the support tree"
                )
            if (u, v) in seen:
                raise ModelError(f"transfer edge ({u}, {v}) listed twice")
            seen.add((u, v))
            edges.append((u, v))

        endpoints = frozenset(x for e in edges for x in e)
        for x in sorted(endpoints):
            if len(support.children(x)) != 1:
                raise ModelError(
                    f"transfer node {x} must have exactly one support child, has {len(support.children(x))}"
                )

        self._support = support
        self._transfers: Tuple[Edge, ...] = tuple(edges)
        self._transfer_nodes = endpoints

        successors: List[List[int]] = [list(support.children(v)) for v in support.nodes()]
        in_degree = [0 if support.parent(v) is None else 1 for v in support.nodes()]
        for u, v in edges:
            successors[u].append(v)
            in_degree[v] += 1
        self._successors = tuple(tuple(s) for s in successors)
        self._in_degree = tuple(in_degree)

    @property
    def support(self) -> Tree:
        return self._support

    @property
    def transfer_edges(self) -> Tuple[Edge, ...]:
        return self._transfers

    @property
    def transfer_nodes(self) -> FrozenSet[int]:
        return self._transfer_nodes

    @property
    def num_nodes(self) -> int:
        return self._support.num_nodes

    def nodes(self) -> range:
        return self._support.nodes()

    @property
    def taxa(self) -> FrozenSet[str]:
        return self._support.taxa

    def support_edges(self) -> List[Edge]:
        return [(p, c) for p in self._support.preorder() for c in self._support.children(p)]

    def successors(self, v: int) -> Tuple[int, ...]:
        return self._successors[v]

    def in_degree(self, v: int) -> int:
        return self._in_degree[v]

    def reticulations(self) -> List[int]:
        return [v for v in self.nodes() if self._in_degree[v] >= 2]

    def base_tree(self) -> Tree:
        """The support tree with every subdivision node suppressed."""
        tree, _ = _suppress(self._support, frozenset())
        return tree

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for v in self.nodes():
            graph.add_node(v, taxon=self._support.taxon(v))
        graph.add_edges_from(self.support_edges(), kind="support")
        graph.add_edges_from(self._transfers, kind="transfer")
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LgtNetwork):
            return NotImplemented
        return self._support == other._support and self._transfers == other._transfers

    def __hash__(self) -> int:
        return hash((self._support, self._transfers))

    def __repr__(self) -> str:
        return f"LgtNetwork(nodes={self.num_nodes}, transfers={list(self._transfers)})"


def _suppress(t: Tree, protected: FrozenSet[int]) -> Tuple[Tree, Dict[int, int]]:
    def removable(v: int) -> bool:
        return len(t.children(v)) == 1 and t.parent(v) is not None and v not in protected

    kept = [v for v in t.nodes() if not removable(v)]
    new_id = {v: i for i, v in enumerate(kept)}

    children: List[List[int]] = []
    for v in kept:
        row = []
        for c in t.children(v):
            while removable(c):
                c = t.children(c)[0]
            row.append(new_id[c])
        children.append(row)
    labels = {new_id[v]: label for v, label in t.leaf_taxon.items()}
    return Tree(children, labels), new_id


def suppress_subdivision_nodes(n: LgtNetwork) -> LgtNetwork:
    """Removes support nodes of in- and out-degree one that carry no transfer edge.

    Surviving nodes keep their relative order and are renumbered densely.
    """
    tree, new_id = _suppress(n.support, n.transfer_nodes)
    return LgtNetwork(tree, [(new_id[u], new_id[v]) for u, v in n.transfer_edges])


def find_intersecting_cycles(n: LgtNetwork) -> Optional[Tuple[Edge, Edge]]:
    """Two transfer edges whose cycles share a node, or None when ``n`` is galled.

    Every non-bridge biconnected component must be a single cycle (hence hold
    one reticulation) and no node may sit on two such cycles.
    """
    edges = n.transfer_edges
    if len(edges) < 2:
        return None

    order = {e: i for i, e in enumerate(edges)}
    for u, v in edges:
        # The simple undirected graph would merge these two into one edge
        if (v, u) in order:
            first, second = sorted(((u, v), (v, u)), key=order.__getitem__)
            return first, second

    graph = nx.Graph()
    graph.add_nodes_from(n.nodes())
    graph.add_edges_from(n.support_edges())
    graph.add_edges_from(edges)
    transfer_of = {frozenset(e): e for e in edges}

    owner: Dict[int, int] = {}
    component_transfers: List[List[Edge]] = []
    for component in nx.biconnected_component_edges(graph):
        if len(component) < 2:
            continue
        nodes = {x for e in component for x in e}
        transfers = sorted(
            (transfer_of[frozenset(e)] for e in component if frozenset(e) in transfer_of),
            key=order.__getitem__,
        )

        in_degree: Dict[int, int] = {}
        for a, b in component:
            directed = transfer_of.get(frozenset((a, b)))
            if directed is None:
                directed = (a, b) if n.support.parent(b) == a else (b, a)
            in_degree[directed[1]] = in_degree.get(directed[1], 0) + 1
        reticulations = [x for x, d in in_degree.items() if d >= 2]

        if len(reticulations) > 1 or len(component) != len(nodes):
            logger.debug(f"Component over {sorted(nodes)} holds {len(transfers)} transfers")
            return transfers[0], transfers[1]

        index = len(component_transfers)
        component_transfers.append(transfers)
        for x in sorted(nodes):
            if x in owner:
                logger.debug(f"Cycles of {component_transfers[owner[x]][0]} and {transfers[0]} meet at node {x}")
                return component_transfers[owner[x]][0], transfers[0]
            owner[x] = index
    return None


def is_galled(n: LgtNetwork) -> bool:
    return find_intersecting_cycles(n) is None
