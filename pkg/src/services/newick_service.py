"""Newick reading and writing for rooted, topology-only trees.

Internal labels, branch lengths and ``[...]`` comments are accepted and
dropped.  Nodes are numbered in preorder, so ``parse_newick(serialize_newick(t))``
reproduces ``t`` exactly when ``t`` itself came from preorder numbering.
"""
from pathlib import Path
from typing import List, Optional, Set

from src.models.tree import Tree, TreeBuilder
from src.utils.error_handler import InputError, NewickParseError
from src.utils.logger import get_logger

logger = get_logger("newick")

_DELIMITERS = set("(),:;[]'")
_NEEDS_QUOTES = _DELIMITERS | set(" \t\r\n")
_LENGTH_CHARS = set("0123456789.eE+-")


class NewickParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.builder = TreeBuilder()
        self.labels: Set[str] = set()

    def error(self, message: str, pos: Optional[int] = None) -> NewickParseError:
        at = self.pos if pos is None else pos
        return NewickParseError(message, len(self.text[:at].encode("utf-8")))

    def peek(self) -> Optional[str]:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def skip_blank(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "[":
                end = self.text.find("]", self.pos)
                if end < 0:
                    raise self.error("unterminated comment")
                self.pos = end + 1
            else:
                break

    def read_label(self) -> str:
        self.skip_blank()
        if self.peek() == "'":
            start = self.pos
            self.pos += 1
            chunks: List[str] = []
            while True:
                end = self.text.find("'", self.pos)
                if end < 0:
                    raise self.error("unterminated quoted label", start)
                chunks.append(self.text[self.pos:end])
                self.pos = end + 1
                if self.peek() == "'":
                    chunks.append("'")
                    self.pos += 1
                else:
                    return "".join(chunks)

        start = self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in _DELIMITERS or c.isspace():
                break
            self.pos += 1
        return self.text[start:self.pos]

    def read_length(self) -> None:
        self.skip_blank()
        if self.peek() != ":":
            return
        self.pos += 1
        self.skip_blank()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _LENGTH_CHARS:
            self.pos += 1
        token = self.text[start:self.pos]
        try:
            float(token)
        except ValueError:
            raise self.error(f"invalid branch length {token!r}", start) from None

    def parse(self) -> Tree:
        self.skip_blank()
        if self.peek() is None:
            raise self.error("empty input")

        open_nodes: List[int] = []
        expect_node = True
        while True:
            self.skip_blank()
            c = self.peek()
            if c is None:
                if open_nodes:
                    raise self.error("unbalanced parentheses: missing ')'")
                raise self.error("missing ';' at end of tree")

            if expect_node:
                parent = open_nodes[-1] if open_nodes else None
                if c == "(":
                    open_nodes.append(self.builder.add_node(parent))
                    self.pos += 1
                    continue
                start = self.pos
                label = self.read_label()
                if not label:
                    raise self.error("empty leaf name", start)
                if label in self.labels:
                    raise self.error(f"duplicate leaf label {label!r}", start)
                self.labels.add(label)
                self.builder.add_node(parent, taxon=label)
                self.read_length()
                expect_node = False
                continue

            if c == ",":
                if not open_nodes:
                    raise self.error("',' outside of parentheses")
                self.pos += 1
                expect_node = True
            elif c == ")":
                if not open_nodes:
                    raise self.error("unbalanced parentheses: unexpected ')'")
                open_nodes.pop()
                self.pos += 1
                self.read_label()
                self.read_length()
            elif c == ";":
                if open_nodes:
                    raise self.error("unbalanced parentheses: missing ')'")
                self.pos += 1
                break
            else:
                raise self.error(f"unexpected character {c!r}")

        self.skip_blank()
        if self.peek() is not None:
            raise self.error("trailing garbage after ';'")
        return self.builder.build()


def parse_newick(text: str) -> Tree:
    tree = NewickParser(text).parse()
    logger.debug(f"Parsed Newick tree with {tree.num_nodes} nodes and {len(tree.taxa)} taxa")
    return tree


def _quote(label: str) -> str:
    if any(c in _NEEDS_QUOTES for c in label):
        return "'" + label.replace("'", "''") + "'"
    return label


def serialize_newick(t: Tree) -> str:
    if t.has_subdivision_nodes:
        raise InputError("tree has subdivision nodes and cannot be written as Newick")

    rendered: List[str] = [""] * t.num_nodes
    for v in t.postorder():
        if t.is_leaf(v):
            rendered[v] = _quote(t.taxon(v))
        else:
            rendered[v] = "(" + ",".join(rendered[c] for c in t.children(v)) + ")"
    return rendered[t.root] + ";"


def load_tree(path: str) -> Tree:
    text = Path(path).read_text(encoding="utf-8")
    # Fixture files may carry '#' provenance lines above the tree
    body = "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))
    return parse_newick(body)
