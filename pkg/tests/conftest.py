import sys
from pathlib import Path

import pytest

# test-only oracles and helpers live next to the tests
sys.path.insert(0, str(Path(__file__).parent))

from synth_corpus import generate_corpus  # noqa: E402


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus_small")
    generate_corpus(root, seed=3, files_per_language=60)
    return root


@pytest.fixture(scope="session")
def big_corpus(tmp_path_factory):
    """~2 MB synthetic corpus for the full backtest runs."""
    root = tmp_path_factory.mktemp("corpus_big")
    stats = generate_corpus(root, seed=0, files_per_language=680)
    assert stats["bytes"] > 1_800_000
    return root
