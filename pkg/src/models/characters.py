from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from src.utils.error_handler import InputError, TaxaMismatchError
from src.utils.logger import get_logger

logger = get_logger("characters")


@dataclass(frozen=True)
class Character:
    """A named binary trait: the set of taxa that carry it."""
    name: str
    members: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise InputError(f"character {self.name!r} is empty")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, taxon: str) -> bool:
        return taxon in self.members

    def describe(self) -> str:
        return f"{self.name}={{{','.join(sorted(self.members))}}}"


class CharacterSet:
    """Ordered, member-deduplicated collection of characters over a taxa universe.

    The first character with a given member set wins; later copies are kept in
    ``dropped`` so callers can report them.
    """

    def __init__(self, characters: Iterable[Character], taxa: Optional[Iterable[str]] = None):
        kept: List[Character] = []
        dropped: List[Character] = []
        seen: Dict[FrozenSet[str], Character] = {}
        for character in characters:
            if character.members in seen:
                logger.warning(
                    f"⚠️ Character {character.name!r} duplicates {seen[character.members].name!r}; dropped"
                )
                dropped.append(character)
                continue
            seen[character.members] = character
            kept.append(character)

        union = frozenset().union(*(c.members for c in kept))
        universe = frozenset(taxa) if taxa is not None else union
        unknown = union - universe
        if unknown:
            raise TaxaMismatchError(f"characters reference unknown taxa: {', '.join(sorted(unknown))}")

        self.characters: Tuple[Character, ...] = tuple(kept)
        self.taxa: FrozenSet[str] = universe
        self.dropped: Tuple[Character, ...] = tuple(dropped)

    def __iter__(self) -> Iterator[Character]:
        return iter(self.characters)

    def __len__(self) -> int:
        return len(self.characters)

    def __getitem__(self, index: int) -> Character:
        return self.characters[index]

    def __eq__(self, other: object) -> bool:
        # Set semantics: order is presentation only
        if not isinstance(other, CharacterSet):
            return NotImplemented
        return self.taxa == other.taxa and set(self.characters) == set(other.characters)

    def __hash__(self) -> int:
        return hash((self.taxa, frozenset(self.characters)))

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.characters]

    def by_name(self, name: str) -> Character:
        for character in self.characters:
            if character.name == name:
                return character
        raise InputError(f"unknown character {name!r}")

    def filter(self, keep: Callable[[Character], bool]) -> "CharacterSet":
        return CharacterSet((c for c in self.characters if keep(c)), taxa=self.taxa)

    def with_taxa(self, taxa: Iterable[str]) -> "CharacterSet":
        return CharacterSet(self.characters, taxa=taxa)

    def require_within(self, taxa: Iterable[str], what: str = "the tree") -> None:
        available = frozenset(taxa)
        unknown = frozenset().union(*(c.members for c in self.characters)) - available
        if unknown:
            raise TaxaMismatchError(f"characters use taxa missing from {what}: {', '.join(sorted(unknown))}")

    def __repr__(self) -> str:
        return f"CharacterSet({', '.join(c.describe() for c in self.characters)})"
