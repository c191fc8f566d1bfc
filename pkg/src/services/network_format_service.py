"""Line-oriented and Graphviz renderings of LGT networks.

Structured format (UTF-8, one record per line, ``#`` starts a comment)::

    # galled-ptn network
    node <id> [taxon]
    sedge <parent> <child>
    tedge <donor> <recipient>
    origin <character> <node>

Node ids are contiguous from 0.  Support edges of one parent appear in child
order, so a parse reproduces the exact child order of the exported tree.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from src.models.network import LgtNetwork
from src.models.tree import Tree
from src.utils.error_handler import InputError, ModelError, NetworkFormatError
from src.utils.logger import get_logger

logger = get_logger("network_format")

HEADER = "# galled-ptn network"
EXPORT_FORMATS = ("structured", "dot")

Origins = Mapping[str, Optional[int]]


@dataclass
class NetworkRecord:
    network: LgtNetwork
    origins: Dict[str, int] = field(default_factory=dict)


def _structured(n: LgtNetwork, origins: Optional[Origins], comments: List[str]) -> str:
    tree = n.support
    lines = [HEADER]
    lines.extend(f"# {comment}" for comment in comments)
    for v in tree.nodes():
        taxon = tree.taxon(v)
        lines.append(f"node {v}" if taxon is None else f"node {v} {taxon}")
    for p, c in n.support_edges():
        lines.append(f"sedge {p} {c}")
    for u, v in n.transfer_edges:
        lines.append(f"tedge {u} {v}")
    for name, node in (origins or {}).items():
        if node is not None:
            lines.append(f"origin {name} {node}")
    return "\n".join(lines) + "\n"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(n: LgtNetwork, origins: Optional[Origins], comments: List[str]) -> str:
    tree = n.support
    annotations: Dict[int, List[str]] = {}
    for name, node in (origins or {}).items():
        if node is not None:
            annotations.setdefault(node, []).append(name)

    lines = ["digraph ptn {"]
    lines.extend(f"  // {comment}" for comment in comments)
    lines.append('  node [shape=circle, label="", width=0.2];')
    for v in tree.nodes():
        attributes = []
        taxon = tree.taxon(v)
        origin_names = annotations.get(v)
        if taxon is not None:
            label = taxon if not origin_names else f"{taxon}\\n{', '.join(origin_names)}"
            attributes.append(f"label={_dot_quote(label)}")
            attributes.append("shape=plaintext")
        elif origin_names:
            attributes.append(f"xlabel={_dot_quote(', '.join(origin_names))}")
        if v in n.transfer_nodes:
            attributes.append("shape=point")
        suffix = f" [{', '.join(attributes)}]" if attributes else ""
        lines.append(f"  n{v}{suffix};")
    for p, c in n.support_edges():
        lines.append(f"  n{p} -> n{c} [arrowhead=none];")
    for u, v in n.transfer_edges:
        lines.append(f"  n{u} -> n{v} [style=dashed, arrowhead=normal, color=red, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_network(n: LgtNetwork, origins: Optional[Origins] = None, fmt: str = "structured",
                   comments: Optional[List[str]] = None) -> str:
    if fmt == "structured":
        return _structured(n, origins, comments or [])
    if fmt == "dot":
        return _dot(n, origins, comments or [])
    raise InputError(f"unknown network format {fmt!r}; expected one of {', '.join(EXPORT_FORMATS)}")


def _int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise NetworkFormatError(f"expected a node id, found {token!r}", line) from None


def parse_network_record(text: str) -> NetworkRecord:
    labels: Dict[int, str] = {}
    declared: Dict[int, int] = {}
    support: List[Tuple[int, int, int]] = []
    transfers: List[Tuple[int, int, int]] = []
    origins: List[Tuple[str, int, int]] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()

        if keyword == "node":
            node_token, _, taxon = rest.partition(" ")
            v = _int(node_token, number)
            if v in declared:
                raise NetworkFormatError(f"node {v} declared twice (first on line {declared[v]})", number)
            declared[v] = number
            taxon = taxon.strip()
            if taxon:
                labels[v] = taxon
        elif keyword in ("sedge", "tedge"):
            parts = rest.split()
            if len(parts) != 2:
                raise NetworkFormatError(f"'{keyword}' expects two node ids", number)
            u, v = _int(parts[0], number), _int(parts[1], number)
            (support if keyword == "sedge" else transfers).append((u, v, number))
        elif keyword == "origin":
            name, _, node_token = rest.rpartition(" ")
            if not name.strip():
                raise NetworkFormatError("'origin' expects a character name and a node id", number)
            origins.append((name.strip(), _int(node_token, number), number))
        else:
            raise NetworkFormatError(f"unknown record {keyword!r}", number)

    if not declared:
        raise NetworkFormatError("no nodes declared")
    n = len(declared)
    if set(declared) != set(range(n)):
        raise NetworkFormatError(f"node ids must be contiguous from 0 to {n - 1}")

    children: List[List[int]] = [[] for _ in range(n)]
    for u, v, number in support + transfers:
        if u not in declared or v not in declared:
            raise NetworkFormatError(f"edge ({u}, {v}) references an undeclared node", number)
    for u, v, _ in support:
        children[u].append(v)

    tree = Tree(children, labels)
    try:
        network = LgtNetwork(tree, [(u, v) for u, v, _ in transfers])
    except ModelError as e:
        line = next((number for u, v, number in transfers if f"({u}, {v})" in str(e)), None)
        raise ModelError(f"line {line}: {e}" if line is not None else str(e)) from e

    origin_map: Dict[str, int] = {}
    for name, node, number in origins:
        if node not in declared:
            raise NetworkFormatError(f"origin of {name!r} is undeclared node {node}", number)
        origin_map[name] = node

    logger.debug(f"Parsed network with {n} nodes and {len(transfers)} transfer edges")
    return NetworkRecord(network=network, origins=origin_map)


def parse_network(text: str) -> LgtNetwork:
    return parse_network_record(text).network


def load_network(path: str) -> NetworkRecord:
    return parse_network_record(Path(path).read_text(encoding="utf-8"))
