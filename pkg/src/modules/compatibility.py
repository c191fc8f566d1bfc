"""Galled compatibility: is there any galled PTN explaining a character set?

The decision recurses on the character set.  A maximal character compatible
with all others splits the instance into its inside and its outside.
Otherwise two maximal incompatible characters A and B propose a split of A
into {A\\B, A∩B}; the characters straddling the split must form a chain,
the clades that chain forces must be laminar, and every remaining
character must sit among the leaf children of a single node, where it is
solved recursively.  Witness trees and networks are assembled during the
same traversal.
"""
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from src.models.characters import Character, CharacterSet
from src.models.network import LgtNetwork, is_galled
from src.models.tree import Tree, TreeBuilder, subdivide_edges
from src.modules.ptn_verify import explains, first_appearances
from src.utils.error_handler import InputError, PreconditionError, TaxaMismatchError
from src.utils.logger import get_logger

logger = get_logger("compatibility")

TaxonSet = FrozenSet[str]


def _incompatible(a: TaxonSet, b: TaxonSet) -> bool:
    return bool(a & b) and bool(a - b) and bool(b - a)


def incompatible(a: Character, b: Character) -> bool:
    return _incompatible(a.members, b.members)


def _maximal(cs: Sequence[Character]) -> List[Character]:
    return [c for c in cs if not any(c.members < d.members for d in cs)]


def find_maximal_compatible(cs: Iterable[Character]) -> Optional[Character]:
    characters = list(cs)
    for c in _maximal(characters):
        if not any(incompatible(c, d) for d in characters):
            return c
    return None


def find_maximal_incompatible_pair(cs: Iterable[Character]) -> Tuple[Character, Character]:
    characters = list(cs)
    maximal = _maximal(characters)
    if not maximal:
        raise PreconditionError("no characters to pair")
    if find_maximal_compatible(characters) is not None:
        raise PreconditionError("a maximal character compatible with all others exists")

    a = maximal[0]
    partners = [d for d in characters if incompatible(a, d)]
    b = max(partners, key=len)
    assert not any(b.members < d.members for d in characters), f"{b.name} is not maximal"
    return a, b


@dataclass(frozen=True)
class ChainInfo:
    """Characters straddling a split, nested on one side and equal on the other."""
    members: Tuple[Character, ...]
    side: TaxonSet
    bottom: TaxonSet
    stable: TaxonSet
    reversed: bool


def build_chain(cs: Iterable[Character], a1: Iterable[str], a2: Iterable[str]) -> Optional[ChainInfo]:
    a1, a2 = frozenset(a1), frozenset(a2)
    characters = list(cs)
    if not a1 or not a2 or a1 & a2 or not any(c.members == a1 | a2 for c in characters):
        raise PreconditionError("{a1, a2} must partition a character of the set")

    straddling = [c for c in characters if c.members & a1 and c.members & a2]
    for side, stable, flipped in ((a1, a2, False), (a2, a1, True)):
        ordered = sorted(straddling, key=lambda c: len(c.members & side))
        if any(c.members - side != stable for c in ordered):
            continue
        if any(not (x.members & side) < (y.members & side) for x, y in zip(ordered, ordered[1:])):
            continue
        if ordered[-1].members & side != side:
            continue
        logger.debug(f"Chain of {[c.name for c in ordered]} ({'reversed' if flipped else 'direct'} orientation)")
        return ChainInfo(tuple(ordered), side, ordered[0].members & side, stable, flipped)
    return None


@dataclass(frozen=True)
class ForcedSet:
    characters: Tuple[Character, ...]
    clades: FrozenSet[TaxonSet]


def forced_sets(cs: Iterable[Character], chain: ChainInfo) -> ForcedSet:
    in_chain = set(chain.members)
    clades = set()
    for x in chain.members:
        clades.add(x.members & chain.side)
        clades.add(x.members & chain.stable)

    forced = []
    for c in cs:
        if c in in_chain:
            forced.append(c)
        elif c.members >= chain.bottom or c.members >= chain.stable:
            forced.append(c)
            clades.add(c.members)
    return ForcedSet(tuple(forced), frozenset(clades))


# ----------------------------------------------------------------------
# Tree sketches: mutable nodes used while a witness is being assembled


class _Node:
    __slots__ = ("taxon", "children", "parent")

    def __init__(self, taxon: Optional[str] = None):
        self.taxon = taxon
        self.children: List["_Node"] = []
        self.parent: Optional["_Node"] = None

    def adopt(self, child: "_Node") -> None:
        child.parent = self
        self.children.append(child)


@dataclass
class _Sketch:
    root: Optional[_Node]
    # each pair means: transfer from the edge above the first node to the edge above the second
    transfers: List[Tuple[_Node, _Node]] = field(default_factory=list)


def _star(taxa: Sequence[str]) -> Optional[_Node]:
    if not taxa:
        return None
    if len(taxa) == 1:
        return _Node(taxa[0])
    root = _Node()
    for taxon in taxa:
        root.adopt(_Node(taxon))
    return root


def _laminar_sketch(clades: Iterable[TaxonSet], taxa: Sequence[str]) -> Optional[Tuple[_Node, Dict[TaxonSet, _Node]]]:
    universe = frozenset(taxa)
    if not universe:
        raise InputError("a tree needs at least one taxon")
    position = {taxon: i for i, taxon in enumerate(taxa)}

    family = set()
    for clade in clades:
        if not clade <= universe:
            raise TaxaMismatchError(f"clade {sorted(clade)} is not within the taxa")
        if 1 < len(clade) < len(universe):
            family.add(clade)
    ordered = sorted(family, key=lambda c: (-len(c), sorted(position[x] for x in c)))

    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if a & b and not b <= a:
                logger.debug(f"Clades {sorted(a)} and {sorted(b)} overlap")
                return None

    if len(universe) == 1:
        leaf = _Node(taxa[0])
        return leaf, {universe: leaf}

    root = _Node()
    node_of: Dict[TaxonSet, _Node] = {universe: root}
    members: Dict[int, List[Tuple[int, _Node]]] = {id(root): []}

    def smallest_container(taxon_set: TaxonSet, candidates: Sequence[TaxonSet]) -> TaxonSet:
        for d in reversed(candidates):
            if taxon_set < d:
                return d
        return universe

    for i, clade in enumerate(ordered):
        node = _Node()
        node_of[clade] = node
        members[id(node)] = []
        parent = node_of[smallest_container(clade, ordered[:i])]
        members[id(parent)].append((min(position[x] for x in clade), node))
    for taxon in taxa:
        leaf = _Node(taxon)
        node_of[frozenset((taxon,))] = leaf
        parent = node_of[smallest_container(frozenset((taxon,)), ordered)]
        members[id(parent)].append((position[taxon], leaf))

    for clade, node in node_of.items():
        for _, child in sorted(members.get(id(node), []), key=lambda item: item[0]):
            node.adopt(child)
    return root, node_of


def _freeze(root: _Node) -> Tuple[Tree, Dict[int, int]]:
    builder = TreeBuilder()
    ids: Dict[int, int] = {}
    stack: List[Tuple[_Node, Optional[int]]] = [(root, None)]
    while stack:
        node, parent = stack.pop()
        ids[id(node)] = builder.add_node(parent, node.taxon)
        for child in reversed(node.children):
            stack.append((child, ids[id(node)]))
    return builder.build(), ids


def tree_from_clades(clades: Iterable[Iterable[str]], taxa: Iterable[str]) -> Optional[Tree]:
    """The tree whose non-trivial clades are exactly ``clades``, or None if they overlap."""
    order = _taxa_order(taxa)
    sketch = _laminar_sketch((frozenset(c) for c in clades), order)
    if sketch is None:
        return None
    return _freeze(sketch[0])[0]


# ----------------------------------------------------------------------
# Decision procedure


class TryStatus(Enum):
    YES = "yes"
    NO = "no"
    INVALID_PARTITION = "invalid partition"


@dataclass
class TryResult:
    status: TryStatus
    tree: Optional[Tree] = None
    reason: str = ""
    sketch: Optional[_Sketch] = field(default=None, repr=False)


@dataclass
class CompatOutcome:
    compatible: bool
    tree: Optional[Tree] = None
    network: Optional[LgtNetwork] = None
    origins: Dict[str, Optional[int]] = field(default_factory=dict)
    trace: List[str] = field(default_factory=list)
    recursion_nodes: int = 0


def _describe(taxon_set: TaxonSet, taxa: Sequence[str]) -> str:
    return "{" + ",".join(x for x in taxa if x in taxon_set) + "}"


class GalledCompatibilitySolver:
    """One decision run: counts recursion nodes and records why subproblems fail."""

    def __init__(self):
        self.calls = 0
        self.trace: List[str] = []

    def solve(self, characters: Tuple[Character, ...], taxa: Sequence[str], depth: int = 0) -> Optional[_Sketch]:
        self.calls += 1
        indent = "  " * depth
        if not characters:
            return _Sketch(_star(taxa))

        split = find_maximal_compatible(characters)
        if split is not None:
            logger.debug(f"{indent}{split.name} is maximal and compatible with every character")
            inside = tuple(c for c in characters if c.members < split.members)
            outside = tuple(c for c in characters if not c.members & split.members)
            left = self.solve(inside, [x for x in taxa if x in split.members], depth + 1)
            if left is None:
                self.trace.append(f"{indent}inside {split.name}: no galled tree")
                return None
            right_taxa = [x for x in taxa if x not in split.members]
            right = self.solve(outside, right_taxa, depth + 1)
            if right is None:
                self.trace.append(f"{indent}outside {split.name}: no galled tree")
                return None
            complement = frozenset(right_taxa)
            return self._merge(left, right, keep_right_root=any(c.members == complement for c in outside))

        a, b = find_maximal_incompatible_pair(characters)
        result = self.try_partition(characters, a.members - b.members, a.members & b.members, taxa, depth)
        if result.status is TryStatus.INVALID_PARTITION:
            self.trace.append(f"{indent}split of {a.name} by {b.name}: {result.reason}")
            result = self.try_partition(characters, b.members - a.members, a.members & b.members, taxa, depth)
            if result.status is TryStatus.INVALID_PARTITION:
                self.trace.append(f"{indent}split of {b.name} by {a.name}: {result.reason}")
        if result.status is TryStatus.YES:
            return result.sketch
        if result.status is TryStatus.NO:
            self.trace.append(f"{indent}{result.reason}")
        self.trace.append(f"{indent}no galled tree for {', '.join(c.name for c in characters)}")
        return None

    @staticmethod
    def _merge(left: _Sketch, right: _Sketch, keep_right_root: bool = False) -> _Sketch:
        if right.root is None:
            return left
        root = _Node()
        root.adopt(left.root)
        # the right root is the clade taxa\split; flatten it only when nothing needs that clade
        endpoint = any(right.root is x or right.root is y for x, y in right.transfers)
        if right.root.taxon is not None or keep_right_root or endpoint:
            root.adopt(right.root)
        else:
            for child in right.root.children:
                root.adopt(child)
        return _Sketch(root, left.transfers + right.transfers)

    def try_partition(self, characters: Tuple[Character, ...], a1: TaxonSet, a2: TaxonSet,
                      taxa: Sequence[str], depth: int = 0) -> TryResult:
        indent = "  " * depth
        chain = build_chain(characters, a1, a2)
        if chain is None:
            return TryResult(TryStatus.INVALID_PARTITION,
                             reason=f"characters across {_describe(a1, taxa)}|{_describe(a2, taxa)} form no chain")

        forced = forced_sets(characters, chain)
        laminar = _laminar_sketch(forced.clades, taxa)
        if laminar is None:
            return TryResult(TryStatus.INVALID_PARTITION, reason="forced clades overlap")
        root, node_of = laminar

        forced_characters = set(forced.characters)
        groups: Dict[int, Tuple[_Node, List[Character]]] = {}
        for c in characters:
            if c in forced_characters or len(c.members) == 1:
                continue
            parents = {id(node_of[frozenset((x,))].parent): node_of[frozenset((x,))].parent for x in c.members}
            if len(parents) > 1:
                return TryResult(TryStatus.INVALID_PARTITION,
                                 reason=f"{c.name} spans leaves of different parents")
            (key, parent), = parents.items()
            groups.setdefault(key, (parent, []))[1].append(c)

        sketch = _Sketch(root, [(node_of[chain.bottom], node_of[chain.stable])])
        logger.debug(
            f"{indent}split {_describe(chain.side, taxa)}|{_describe(chain.stable, taxa)}: "
            f"bottom {_describe(chain.bottom, taxa)}, {len(groups)} groups"
        )
        for parent, group in groups.values():
            group_taxa = [x for x in taxa if any(x in c.members for c in group)]
            sub = self.solve(tuple(group), group_taxa, depth + 1)
            if sub is None:
                return TryResult(TryStatus.NO,
                                 reason=f"characters {', '.join(c.name for c in group)} below one node have no galled tree")
            self._graft(parent, sub, {id(node_of[frozenset((x,))]) for x in group_taxa})
            sketch.transfers.extend(sub.transfers)

        return TryResult(TryStatus.YES, tree=_freeze(root)[0], sketch=sketch)

    @staticmethod
    def _graft(parent: _Node, sub: _Sketch, replaced: set) -> None:
        kept: List[_Node] = []
        slot = None
        for child in parent.children:
            if id(child) in replaced:
                if slot is None:
                    slot = len(kept)
            else:
                kept.append(child)

        if not kept:
            # parent would be left with a single child: hang the subtree's children directly
            assert all(sub.root is not x and sub.root is not y for x, y in sub.transfers)
            parent.children = []
            for child in sub.root.children:
                parent.adopt(child)
            return

        sub.root.parent = parent
        kept.insert(slot, sub.root)
        parent.children = kept


def _taxa_order(taxa: Iterable[str]) -> List[str]:
    if isinstance(taxa, (set, frozenset)):
        return sorted(taxa)
    order = list(taxa)
    if len(set(order)) != len(order):
        raise InputError("taxa list contains duplicates")
    return order


def _realize(sketch: _Sketch) -> Tuple[Tree, LgtNetwork]:
    tree, ids = _freeze(sketch.root)
    pairs = [(ids[id(x)], ids[id(y)]) for x, y in sketch.transfers]
    subdivided, above = subdivide_edges(tree, [v for pair in pairs for v in pair])
    return tree, LgtNetwork(subdivided, [(above[u], above[v]) for u, v in pairs])


def _prepare(cs: CharacterSet, taxa: Optional[Iterable[str]]) -> List[str]:
    order = _taxa_order(taxa if taxa is not None else cs.taxa)
    if not order:
        raise InputError("no taxa given")
    cs.require_within(order, "the taxa")
    return order


def _fa_clades(tree: Tree, c: Character) -> FrozenSet[TaxonSet]:
    return frozenset(tree.clade_leaves(v) for v in first_appearances(tree, c))


def _check_incompatible_pairs(tree: Tree, cs: CharacterSet) -> None:
    """Every incompatible pair has one clade member; the other is split by it into two clades."""
    fa_clades = {c.members: _fa_clades(tree, c) for c in cs}
    for a, b in combinations(cs, 2):
        if not incompatible(a, b):
            continue
        a_split_by_b = fa_clades[a.members] == {a.members - b.members, a.members & b.members}
        b_split_by_a = fa_clades[b.members] == {b.members - a.members, a.members & b.members}
        assert (a_split_by_b and fa_clades[b.members] == {b.members}) or \
               (b_split_by_a and fa_clades[a.members] == {a.members}), \
            f"{a.name} and {b.name} are not a clade and its split in the witness tree"


def galled_compatible(cs: CharacterSet, taxa: Optional[Iterable[str]] = None) -> CompatOutcome:
    order = _prepare(cs, taxa)
    solver = GalledCompatibilitySolver()
    sketch = solver.solve(tuple(cs), order)
    assert solver.calls <= 3 * max(1, len(cs)), f"{solver.calls} recursion nodes for {len(cs)} characters"

    if sketch is None:
        logger.info(f"❌ Characters are not galled-compatible ({solver.calls} subproblems)")
        return CompatOutcome(False, trace=solver.trace, recursion_nodes=solver.calls)

    tree, network = _realize(sketch)
    assert is_galled(network), "reconstructed network is not galled"
    report = explains(network, cs)
    assert report.all_explained, f"reconstructed network fails to explain {report.unexplained()}"
    _check_incompatible_pairs(tree, cs)

    logger.info(
        f"✅ Galled-compatible: witness with {len(network.transfer_edges)} transfer edges "
        f"({solver.calls} subproblems)"
    )
    return CompatOutcome(True, tree=tree, network=network, origins=report.origins,
                         recursion_nodes=solver.calls)


def try_partition(cs: CharacterSet, a1: Iterable[str], a2: Iterable[str],
                  taxa: Optional[Iterable[str]] = None) -> TryResult:
    order = _prepare(cs, taxa)
    return GalledCompatibilitySolver().try_partition(tuple(cs), frozenset(a1), frozenset(a2), order)


def reconstruct_network(cs: CharacterSet, taxa: Optional[Iterable[str]] = None) -> Optional[Tuple[Tree, LgtNetwork]]:
    outcome = galled_compatible(cs, taxa)
    if not outcome.compatible:
        return None
    return outcome.tree, outcome.network
