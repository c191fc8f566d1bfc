"""Perfect-transfer checks: forbidden sets, origins and first appearances.

A character is explained by an LGT network when some node outside its
forbidden set reaches every carrier leaf without passing through forbidden
nodes.  First appearances are the highest tree nodes whose clades lie inside
a character.
"""
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from src.models.characters import Character, CharacterSet
from src.models.network import LgtNetwork
from src.models.tree import Tree
from src.utils.error_handler import TaxaMismatchError
from src.utils.logger import get_logger

logger = get_logger("ptn_verify")


@dataclass
class OperationCounter:
    """Counts elementary steps (node visits, neighbour scans) for scaling checks."""
    count: int = 0

    def add(self, steps: int = 1) -> None:
        self.count += steps


def _require_taxa(available: FrozenSet[str], c: Character) -> None:
    unknown = c.members - available
    if unknown:
        raise TaxaMismatchError(
            f"character {c.name!r} references unknown taxa: {', '.join(sorted(unknown))}"
        )


def _forbidden_flags(n: LgtNetwork, c: Character) -> List[bool]:
    tree = n.support
    flags = [False] * tree.num_nodes
    for v in tree.postorder():
        if tree.is_leaf(v):
            flags[v] = tree.taxon(v) not in c.members
        else:
            flags[v] = any(flags[child] for child in tree.children(v))
    return flags


def forbidden_set(n: LgtNetwork, c: Character) -> FrozenSet[int]:
    """Nodes with a support-descendant leaf outside ``c``."""
    _require_taxa(n.taxa, c)
    flags = _forbidden_flags(n, c)
    return frozenset(v for v in n.nodes() if flags[v])


def _reach(n: LgtNetwork, start: int, flags: Sequence[bool]) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in n.successors(v):
            if not flags[w] and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def find_origin(n: LgtNetwork, c: Character) -> Optional[int]:
    """Smallest candidate node reaching every carrier of ``c`` inside N - F_C(N).

    Candidates are the non-forbidden nodes whose support parent is forbidden
    or absent; every origin lies below one of them.
    """
    _require_taxa(n.taxa, c)
    tree = n.support
    flags = _forbidden_flags(n, c)
    targets = {tree.node_of_taxon(taxon) for taxon in c.members}

    for v in n.nodes():
        if flags[v]:
            continue
        p = tree.parent(v)
        if p is not None and not flags[p]:
            continue
        if targets <= _reach(n, v, flags):
            return v
    return None


@dataclass(frozen=True)
class CharacterVerdict:
    character: Character
    origin: Optional[int]

    @property
    def explained(self) -> bool:
        return self.origin is not None


@dataclass
class ExplanationReport:
    verdicts: List[CharacterVerdict]

    @property
    def all_explained(self) -> bool:
        return all(verdict.explained for verdict in self.verdicts)

    @property
    def origins(self) -> Dict[str, Optional[int]]:
        return {verdict.character.name: verdict.origin for verdict in self.verdicts}

    def unexplained(self) -> List[Character]:
        return [verdict.character for verdict in self.verdicts if not verdict.explained]


def explains(n: LgtNetwork, cs: CharacterSet) -> ExplanationReport:
    cs.require_within(n.taxa, "the network")
    verdicts = [CharacterVerdict(c, find_origin(n, c)) for c in cs]
    report = ExplanationReport(verdicts)
    logger.debug(
        f"{sum(v.explained for v in verdicts)}/{len(verdicts)} characters explained "
        f"by network with {len(n.transfer_edges)} transfers"
    )
    return report


def first_appearances(t: Tree, c: Character, counter: Optional[OperationCounter] = None) -> Tuple[int, ...]:
    """Highest nodes whose clades lie inside ``c``, in NodeId order."""
    _require_taxa(t.taxa, c)
    inside = [False] * t.num_nodes
    for v in t.postorder():
        if t.is_leaf(v):
            inside[v] = t.taxon(v) in c.members
        else:
            inside[v] = all(inside[child] for child in t.children(v))
    if counter is not None:
        counter.add(t.num_nodes)

    fas = tuple(
        v for v in t.nodes()
        if inside[v] and (t.parent(v) is None or not inside[t.parent(v)])
    )
    # Partition of c: disjoint clades (hence incomparable nodes) covering c
    assert sum(len(t.clade_leaves(v)) for v in fas) == len(c.members)
    assert frozenset().union(*(t.clade_leaves(v) for v in fas)) == c.members
    return fas


@dataclass(frozen=True)
class FaStatRow:
    character: Character
    first_appearances: Tuple[int, ...]
    leaf_fas: int
    internal_fas: int

    @property
    def fas(self) -> int:
        return len(self.first_appearances)

    @property
    def galled_blocking(self) -> bool:
        return self.fas > 2


def fa_statistics(t: Tree, cs: CharacterSet) -> List[FaStatRow]:
    cs.require_within(t.taxa)
    rows = []
    for c in cs:
        fas = first_appearances(t, c)
        leaves = sum(1 for v in fas if t.is_leaf(v))
        rows.append(FaStatRow(c, fas, leaves, len(fas) - leaves))
    blocking = sum(row.galled_blocking for row in rows)
    if blocking:
        logger.info(f"{blocking}/{len(rows)} characters have more than two first appearances")
    return rows


@dataclass
class FaDistribution:
    histogram: Dict[int, int]
    candidates: List[str]


def fa_distribution(rows: Iterable[FaStatRow]) -> FaDistribution:
    """Counts characters per number of first appearances.

    ``candidates`` names the characters with at most two first appearances,
    the only ones that can appear together in a galled completion.
    """
    histogram: Dict[int, int] = {}
    candidates = []
    for row in rows:
        histogram[row.fas] = histogram.get(row.fas, 0) + 1
        if not row.galled_blocking:
            candidates.append(row.character.name)
    return FaDistribution(dict(sorted(histogram.items())), candidates)


def render_clade(t: Tree, v: int) -> str:
    if t.is_leaf(v):
        return t.taxon(v)
    clade = t.clade_leaves(v)
    return "{" + ",".join(taxon for taxon in t.taxa_order if taxon in clade) + "}"


def render_fa_table(t: Tree, rows: Iterable[FaStatRow]) -> str:
    lines = ["character\tfas\tleaf_fas\tinternal_fas\tgalled_blocking\tfirst_appearances"]
    for row in rows:
        clades = ";".join(render_clade(t, v) for v in row.first_appearances)
        lines.append(
            f"{row.character.name}\t{row.fas}\t{row.leaf_fas}\t{row.internal_fas}\t"
            f"{'yes' if row.galled_blocking else 'no'}\t{clades}"
        )
    return "\n".join(lines) + "\n"
