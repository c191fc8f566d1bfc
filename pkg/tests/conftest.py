import logging
from pathlib import Path

import pytest

from src.services.matrix_service import load_character_matrix
from src.services.network_format_service import load_network
from src.services.newick_service import load_tree
from src.utils.logger import ROOT_LOGGER

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixture_path():
    def resolve(name: str) -> str:
        return str(FIXTURES / name)
    return resolve


@pytest.fixture
def load_fixture_tree(fixture_path):
    return lambda name: load_tree(fixture_path(name))


@pytest.fixture
def load_fixture_characters(fixture_path):
    def load(name: str):
        characters, _ = load_character_matrix(fixture_path(name))
        return characters
    return load


@pytest.fixture
def load_fixture_network(fixture_path):
    return lambda name: load_network(fixture_path(name)).network


@pytest.fixture(autouse=True)
def reset_logging():
    # main() attaches stream handlers bound to the capture streams of one test
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    logger.setLevel(logging.NOTSET)
