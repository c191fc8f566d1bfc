import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.models.characters import Character, CharacterSet
from src.utils.error_handler import InputError, MatrixFormatError
from src.utils.logger import get_logger

logger = get_logger("matrix")

FORMATS = ("csv", "sets")


@dataclass
class CharacterMatrix:
    """Presence/absence table: one row per taxon, one 0/1 column per character."""
    taxa: List[str]
    characters: List[str]
    cells: List[List[int]]

    def column(self, j: int) -> List[str]:
        return [taxon for taxon, row in zip(self.taxa, self.cells) if row[j] == 1]

    def to_character_set(self) -> CharacterSet:
        return CharacterSet(
            (Character(name, frozenset(self.column(j))) for j, name in enumerate(self.characters)),
            taxa=self.taxa,
        )


def _content_lines(text: str):
    """Yields (line number, line) for lines that are neither blank nor comments."""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield number, line


def parse_csv_matrix(text: str) -> CharacterMatrix:
    lines = list(_content_lines(text))
    if not lines:
        raise MatrixFormatError("missing header row", 1)

    header_line, header_text = lines[0]
    header = [cell.strip() for cell in next(csv.reader([header_text]))]
    if not header or header[0].lower() != "taxon":
        raise MatrixFormatError("header must start with 'taxon'", header_line)

    names = header[1:]
    seen_names = set()
    for name in names:
        if not name:
            raise MatrixFormatError("empty character name in header", header_line)
        if name in seen_names:
            raise MatrixFormatError(f"duplicate character name {name!r}", header_line)
        seen_names.add(name)

    taxa: List[str] = []
    cells: List[List[int]] = []
    for number, line in lines[1:]:
        row = [cell.strip() for cell in next(csv.reader([line]))]
        if len(row) != len(header):
            raise MatrixFormatError(f"expected {len(header)} cells, found {len(row)}", number)
        taxon = row[0]
        if not taxon:
            raise MatrixFormatError("empty taxon label", number)
        if taxon in taxa:
            raise MatrixFormatError(f"duplicate taxon {taxon!r}", number)
        values = []
        for name, cell in zip(names, row[1:]):
            if cell not in ("0", "1"):
                raise MatrixFormatError(f"non-binary cell {cell!r} for character {name!r}", number)
            values.append(int(cell))
        taxa.append(taxon)
        cells.append(values)

    for j, name in enumerate(names):
        if not any(row[j] for row in cells):
            raise MatrixFormatError(f"character {name!r} is empty", header_line)

    return CharacterMatrix(taxa=taxa, characters=names, cells=cells)


def parse_sets_matrix(text: str) -> Tuple[CharacterSet, List[str]]:
    declared: Optional[List[str]] = None
    declared_line = 0
    entries: List[Tuple[str, List[str], int]] = []
    names: Dict[str, int] = {}

    for number, line in _content_lines(text):
        if ":" not in line:
            raise MatrixFormatError("expected 'Name: taxon taxon ...'", number)
        name, _, rest = line.partition(":")
        name = name.strip()
        members = rest.split()

        if name.lower() == "taxa":
            if declared is not None:
                raise MatrixFormatError("'taxa:' declared twice", number)
            if len(set(members)) != len(members):
                raise MatrixFormatError("duplicate taxon in 'taxa:' line", number)
            declared, declared_line = members, number
            continue

        if not name:
            raise MatrixFormatError("empty character name", number)
        if name in names:
            raise MatrixFormatError(f"duplicate character name {name!r} (first on line {names[name]})", number)
        if not members:
            raise MatrixFormatError(f"character {name!r} is empty", number)
        names[name] = number
        entries.append((name, members, number))

    if declared is not None:
        known = set(declared)
        for name, members, number in entries:
            for taxon in members:
                if taxon not in known:
                    raise MatrixFormatError(
                        f"character {name!r} uses taxon {taxon!r} not declared on line {declared_line}", number
                    )
        taxa = list(declared)
    else:
        taxa = []
        for _, members, _ in entries:
            for taxon in members:
                if taxon not in taxa:
                    taxa.append(taxon)

    characters = CharacterSet((Character(name, frozenset(members)) for name, members, _ in entries), taxa=taxa)
    return characters, taxa


def parse_character_matrix(text: str, fmt: str) -> Tuple[CharacterSet, List[str]]:
    if fmt == "csv":
        matrix = parse_csv_matrix(text)
        characters, taxa = matrix.to_character_set(), list(matrix.taxa)
    elif fmt == "sets":
        characters, taxa = parse_sets_matrix(text)
    else:
        raise InputError(f"unknown matrix format {fmt!r}; expected one of {', '.join(FORMATS)}")

    logger.debug(f"Parsed {len(characters)} characters over {len(taxa)} taxa ({fmt})")
    return characters, taxa


def detect_format(path: str) -> str:
    return "csv" if Path(path).suffix.lower() == ".csv" else "sets"


def load_character_matrix(path: str, fmt: Optional[str] = None) -> Tuple[CharacterSet, List[str]]:
    text = Path(path).read_text(encoding="utf-8")
    return parse_character_matrix(text, fmt or detect_format(path))


def parse_taxa_list(text: str) -> List[str]:
    taxa: List[str] = []
    for number, line in _content_lines(text):
        for taxon in line.split():
            if taxon in taxa:
                raise MatrixFormatError(f"duplicate taxon {taxon!r}", number)
            taxa.append(taxon)
    return taxa


def load_taxa_list(path: str) -> List[str]:
    return parse_taxa_list(Path(path).read_text(encoding="utf-8"))


def format_character_sets(characters: CharacterSet, taxa: Optional[List[str]] = None) -> str:
    """Renders characters in the ``sets`` format (inverse of parse_sets_matrix)."""
    order = list(taxa) if taxa is not None else sorted(characters.taxa)
    position = {taxon: i for i, taxon in enumerate(order)}
    lines = ["taxa: " + " ".join(order)]
    for character in characters:
        members = sorted(character.members, key=lambda taxon: position.get(taxon, len(order)))
        lines.append(f"{character.name}: {' '.join(members)}")
    return "\n".join(lines) + "\n"
