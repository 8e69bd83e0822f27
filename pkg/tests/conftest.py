import random

import pytest

from dlmparse.synth import GrammarConfig, generate_corpus


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def small_corpus():
    """Fixed 60-sentence synthetic treebank shared by fast tests."""
    return generate_corpus(60, seed=7)


@pytest.fixture(scope="session")
def large_vocab_grammar():
    return GrammarConfig(
        vocab={"NN": 60, "VB": 40, "JJ": 30, "DT": 8, "IN": 10, "RB": 10}
    )
