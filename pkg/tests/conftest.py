import glob
import pathlib

import pytest

from corpusforge.langid import LangProfile
from corpusforge.vocab import load_vocab

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
GOLDEN = pathlib.Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir() -> pathlib.Path:
    return GOLDEN


@pytest.fixture(scope="session")
def profile() -> LangProfile:
    return LangProfile.load(FIXTURES / "langid_profile.json")


@pytest.fixture(scope="session")
def vocab():
    return load_vocab(FIXTURES / "test_vocab.model")


@pytest.fixture(scope="session")
def corpus_files() -> list[str]:
    files = sorted(glob.glob(str(FIXTURES / "corpus" / "shard-*")))
    assert files, "fixture corpus missing; run scripts/make_fixture_corpus.py"
    return files
