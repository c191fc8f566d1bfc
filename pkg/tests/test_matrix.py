import pytest

from src.models.characters import Character, CharacterSet
from src.services.matrix_service import (
    format_character_sets,
    load_character_matrix,
    parse_character_matrix,
    parse_csv_matrix,
    parse_sets_matrix,
    parse_taxa_list,
)
from src.utils.error_handler import InputError, MatrixFormatError, TaxaMismatchError


def test_csv_and_sets_fixtures_agree(fixture_path):
    from_csv, csv_taxa = load_character_matrix(fixture_path("completable_basic.csv"))
    from_sets, sets_taxa = load_character_matrix(fixture_path("completable_basic.sets"))
    assert from_csv == from_sets
    assert csv_taxa == sets_taxa == ["a", "b", "c", "d"]
    assert from_sets.names == ["C1", "C2", "C3"]


def test_csv_matrix_columns():
    matrix = parse_csv_matrix("taxon,X,Y\na,1,0\nb,1,1\nc,0,1\n")
    assert matrix.column(0) == ["a", "b"]
    assert matrix.to_character_set().by_name("Y").members == frozenset("bc")


@pytest.mark.parametrize("text, line, message", [
    ("species,X\na,1\n", 1, "header must start with 'taxon'"),
    ("taxon,X,X\na,1,1\n", 1, "duplicate character name"),
    ("taxon,X\na,1\nb\n", 3, "expected 2 cells"),
    ("taxon,X\na,1\na,0\n", 3, "duplicate taxon"),
    ("taxon,X\na,2\n", 2, "non-binary cell"),
    ("taxon,X,Y\na,1,0\nb,1,0\n", 1, "character 'Y' is empty"),
    ("", 1, "missing header row"),
])
def test_csv_errors_carry_line_numbers(text, line, message):
    with pytest.raises(MatrixFormatError, match=message) as info:
        parse_csv_matrix(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}: ")


def test_sets_format_with_comments_and_declared_taxa():
    characters, taxa = parse_sets_matrix("# provenance\ntaxa: a b c d\n\nA: a b\nB: c\n")
    assert taxa == ["a", "b", "c", "d"]
    assert characters.taxa == frozenset("abcd")
    assert [c.describe() for c in characters] == ["A={a,b}", "B={c}"]


@pytest.mark.parametrize("text, line, message", [
    ("taxa: a b\nA: a z\n", 2, "not declared"),
    ("A: a\nA: b\n", 2, "duplicate character name"),
    ("A:\n", 1, "is empty"),
    ("just words\n", 1, "expected 'Name: taxon"),
    ("taxa: a a\n", 1, "duplicate taxon"),
])
def test_sets_errors_carry_line_numbers(text, line, message):
    with pytest.raises(MatrixFormatError, match=message) as info:
        parse_sets_matrix(text)
    assert info.value.line == line


def test_duplicate_characters_are_dropped_with_a_record():
    characters, _ = parse_sets_matrix("A: a b\nB: b a\nC: c\n")
    assert characters.names == ["A", "C"]
    assert [c.name for c in characters.dropped] == ["B"]


def test_character_sets_compare_as_sets():
    one = CharacterSet([Character("A", {"a"}), Character("B", {"b"})])
    two = CharacterSet([Character("B", {"b"}), Character("A", {"a"})])
    assert one == two


def test_characters_must_be_non_empty_and_within_taxa():
    with pytest.raises(InputError):
        Character("E", set())
    with pytest.raises(TaxaMismatchError):
        CharacterSet([Character("A", {"a", "z"})], taxa=["a", "b"])


def test_unknown_format_is_rejected():
    with pytest.raises(InputError):
        parse_character_matrix("A: a\n", "nexus")


def test_taxa_list_and_sets_rendering():
    assert parse_taxa_list("# taxa\na b\nc\n") == ["a", "b", "c"]
    with pytest.raises(MatrixFormatError):
        parse_taxa_list("a b\nb\n")

    characters, taxa = parse_sets_matrix("taxa: a b c\nA: c a\n")
    text = format_character_sets(characters, taxa)
    assert text == "taxa: a b c\nA: a c\n"
    assert parse_sets_matrix(text)[0] == characters
