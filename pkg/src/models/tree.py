"""Immutable rooted trees with constant-time ancestry queries.

Nodes are dense integers ``0..n-1``; leaves carry unique string taxa.  A
tree is validated once at construction and never mutated afterwards; every
operation that "changes" a tree returns a new one.
"""
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.utils.error_handler import InputError, ModelError, PreconditionError


class Tree:
    def __init__(self, children: Sequence[Sequence[int]], leaf_taxon: Mapping[int, str]):
        n = len(children)
        if n == 0:
            raise ModelError("a tree needs at least one node")

        self._children: Tuple[Tuple[int, ...], ...] = tuple(tuple(kids) for kids in children)
        parent: List[Optional[int]] = [None] * n
        for v, kids in enumerate(self._children):
            for c in kids:
                if not isinstance(c, int) or not 0 <= c < n:
                    raise ModelError(f"node {v} has an invalid child id {c!r}")
                if parent[c] is not None:
                    raise ModelError(f"node {c} has more than one parent")
                parent[c] = v

        roots = [v for v in range(n) if parent[v] is None]
        if len(roots) != 1:
            raise ModelError(f"a tree needs exactly one root, found {len(roots)}")
        self._root = roots[0]
        self._parent: Tuple[Optional[int], ...] = tuple(parent)

        # Preorder plus subtree sizes give the Euler intervals [tin, tout]
        preorder: List[int] = []
        depth = [0] * n
        stack = [self._root]
        while stack:
            v = stack.pop()
            preorder.append(v)
            for c in reversed(self._children[v]):
                depth[c] = depth[v] + 1
                stack.append(c)
        if len(preorder) != n:
            raise ModelError("the child relation contains a cycle")

        size = [1] * n
        for v in reversed(preorder):
            p = parent[v]
            if p is not None:
                size[p] += size[v]
        tin = [0] * n
        for i, v in enumerate(preorder):
            tin[v] = i
        self._tin = tuple(tin)
        self._tout = tuple(tin[v] + size[v] - 1 for v in range(n))
        self._depth = tuple(depth)
        self._preorder = tuple(preorder)

        labels: Dict[int, str] = {}
        node_of: Dict[str, int] = {}
        for v, label in leaf_taxon.items():
            if not isinstance(v, int) or not 0 <= v < n:
                raise ModelError(f"taxon {label!r} assigned to invalid node {v!r}")
            if self._children[v]:
                raise ModelError(f"internal node {v} cannot carry taxon {label!r}")
            if not label:
                raise ModelError(f"leaf {v} has an empty taxon label")
            if label in node_of:
                raise ModelError(f"taxon {label!r} labels more than one leaf")
            labels[v] = label
            node_of[label] = v
        for v in preorder:
            if not self._children[v] and v not in labels:
                raise ModelError(f"leaf {v} has no taxon label")
        self._leaf_taxon = labels
        self._node_of = node_of

        self._clades: Optional[List[FrozenSet[str]]] = None
        self._postorder: Optional[Tuple[int, ...]] = None
        self._lca_table = None

    # ------------------------------------------------------------------
    # structure

    @property
    def root(self) -> int:
        return self._root

    @property
    def num_nodes(self) -> int:
        return len(self._children)

    def __len__(self) -> int:
        return len(self._children)

    def nodes(self) -> range:
        return range(len(self._children))

    def children(self, v: int) -> Tuple[int, ...]:
        self._check(v)
        return self._children[v]

    def parent(self, v: int) -> Optional[int]:
        self._check(v)
        return self._parent[v]

    def is_leaf(self, v: int) -> bool:
        self._check(v)
        return not self._children[v]

    def leaves(self) -> Tuple[int, ...]:
        return tuple(v for v in self._preorder if not self._children[v])

    def taxon(self, v: int) -> Optional[str]:
        self._check(v)
        return self._leaf_taxon.get(v)

    @property
    def leaf_taxon(self) -> Dict[int, str]:
        return dict(self._leaf_taxon)

    @property
    def taxa(self) -> FrozenSet[str]:
        return frozenset(self._node_of)

    @property
    def taxa_order(self) -> Tuple[str, ...]:
        """Taxa in left-to-right leaf order."""
        return tuple(self._leaf_taxon[v] for v in self.leaves())

    def node_of_taxon(self, label: str) -> int:
        try:
            return self._node_of[label]
        except KeyError:
            raise InputError(f"unknown taxon {label!r}") from None

    def depth(self, v: int) -> int:
        self._check(v)
        return self._depth[v]

    def preorder(self) -> Tuple[int, ...]:
        return self._preorder

    def postorder(self) -> Tuple[int, ...]:
        if self._postorder is None:
            order: List[int] = []
            stack: List[Tuple[int, int]] = [(self._root, 0)]
            while stack:
                v, i = stack[-1]
                kids = self._children[v]
                if i < len(kids):
                    stack[-1] = (v, i + 1)
                    stack.append((kids[i], 0))
                else:
                    stack.pop()
                    order.append(v)
            self._postorder = tuple(order)
        return self._postorder

    @property
    def has_subdivision_nodes(self) -> bool:
        return any(len(kids) == 1 and self._parent[v] is not None for v, kids in enumerate(self._children))

    # ------------------------------------------------------------------
    # ancestry

    def is_ancestor(self, u: int, v: int) -> bool:
        """True iff ``v`` lies on the root-to-``u`` path (reflexive)."""
        self._check(u)
        self._check(v)
        return self._tin[v] <= self._tin[u] <= self._tout[v]

    def is_comparable(self, u: int, v: int) -> bool:
        return self.is_ancestor(u, v) or self.is_ancestor(v, u)

    def lca(self, u: int, v: int) -> int:
        self._check(u)
        self._check(v)
        if self._lca_table is None:
            self._lca_table = self._build_lca_table()
        euler, first, table = self._lca_table

        left, right = first[u], first[v]
        if left > right:
            left, right = right, left
        k = (right - left + 1).bit_length() - 1
        a = table[k][left]
        b = table[k][right - (1 << k) + 1]
        return euler[a] if self._depth[euler[a]] <= self._depth[euler[b]] else euler[b]

    def _build_lca_table(self):
        euler: List[int] = [self._root]
        first = [0] * len(self._children)
        stack: List[Tuple[int, int]] = [(self._root, 0)]
        while stack:
            v, i = stack[-1]
            kids = self._children[v]
            if i < len(kids):
                stack[-1] = (v, i + 1)
                c = kids[i]
                first[c] = len(euler)
                euler.append(c)
                stack.append((c, 0))
            else:
                stack.pop()
                if stack:
                    euler.append(stack[-1][0])

        # Sparse table over euler positions, keyed by minimum depth
        depth_at = [self._depth[v] for v in euler]
        table = [list(range(len(euler)))]
        k = 1
        while (1 << k) <= len(euler):
            prev = table[-1]
            half = 1 << (k - 1)
            row = []
            for i in range(len(euler) - (1 << k) + 1):
                a, b = prev[i], prev[i + half]
                row.append(a if depth_at[a] <= depth_at[b] else b)
            table.append(row)
            k += 1
        return euler, first, table

    # ------------------------------------------------------------------
    # clades

    def clade_leaves(self, v: int) -> FrozenSet[str]:
        """Taxa of the leaves below ``v``, inclusive."""
        self._check(v)
        if self._clades is None:
            clades: List[FrozenSet[str]] = [frozenset()] * len(self._children)
            for w in reversed(self._preorder):
                if not self._children[w]:
                    clades[w] = frozenset((self._leaf_taxon[w],))
                else:
                    clades[w] = frozenset().union(*(clades[c] for c in self._children[w]))
            self._clades = clades
        return self._clades[v]

    def clades(self) -> FrozenSet[FrozenSet[str]]:
        return frozenset(self.clade_leaves(v) for v in self.nodes())

    # ------------------------------------------------------------------

    def _check(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < len(self._children):
            raise InputError(f"invalid node id {v!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return self._children == other._children and self._leaf_taxon == other._leaf_taxon

    def __hash__(self) -> int:
        return hash((self._children, tuple(sorted(self._leaf_taxon.items()))))

    def __repr__(self) -> str:
        return f"Tree(nodes={self.num_nodes}, taxa={len(self._node_of)})"


class TreeBuilder:
    """Mutable scaffold used by parsers and constructions; ``build`` freezes it."""

    def __init__(self):
        self._children: List[List[int]] = []
        self._taxon: Dict[int, str] = {}

    def add_node(self, parent: Optional[int] = None, taxon: Optional[str] = None) -> int:
        v = len(self._children)
        self._children.append([])
        if parent is not None:
            self._children[parent].append(v)
        if taxon is not None:
            self._taxon[v] = taxon
        return v

    def set_taxon(self, v: int, taxon: str) -> None:
        self._taxon[v] = taxon

    def children(self, v: int) -> List[int]:
        return self._children[v]

    def __len__(self) -> int:
        return len(self._children)

    def build(self) -> Tree:
        return Tree(self._children, self._taxon)


def subdivide_edges(t: Tree, nodes: Iterable[int]) -> Tuple[Tree, Dict[int, int]]:
    """Subdivides the edge above each given node once.

    Originals keep their ids; subdivision nodes follow in preorder of the
    child endpoint.  Returns the new tree and the map ``v -> p_new(v)``.
    """
    wanted = set(nodes)
    for v in wanted:
        if t.parent(v) is None:
            raise PreconditionError(f"node {v} is the root and has no edge above it")

    subdivision: Dict[int, int] = {}
    next_id = t.num_nodes
    for v in t.preorder():
        if v in wanted:
            subdivision[v] = next_id
            next_id += 1

    children: List[List[int]] = [[] for _ in range(next_id)]
    for p in t.nodes():
        children[p] = [subdivision.get(c, c) for c in t.children(p)]
    for v, s in subdivision.items():
        children[s] = [v]
    return Tree(children, t.leaf_taxon), subdivision


def subdivide_all_edges(t: Tree) -> Tuple[Tree, Dict[int, int]]:
    if t.has_subdivision_nodes:
        raise PreconditionError("tree already contains subdivision nodes")
    return subdivide_edges(t, (v for v in t.nodes() if v != t.root))


def expand_node(t: Tree, v: int, group: Sequence[int]) -> Tree:
    """Refines the polytomy at ``v``: ``group`` becomes the children of a new child of ``v``.

    The new node takes the position of the first grouped child and gets id ``n``.
    """
    kids = t.children(v)
    members = set(group)
    if not members <= set(kids):
        raise PreconditionError(f"group {sorted(members)} is not a subset of the children of {v}")
    if not 2 <= len(members) < len(kids):
        raise PreconditionError("a refinement group needs at least two and fewer than all children")

    new_node = t.num_nodes
    children: List[List[int]] = [list(t.children(w)) for w in t.nodes()]
    replaced: List[int] = []
    grouped: List[int] = []
    for c in kids:
        if c in members:
            if not grouped:
                replaced.append(new_node)
            grouped.append(c)
        else:
            replaced.append(c)
    children[v] = replaced
    children.append(grouped)
    return Tree(children, t.leaf_taxon)
