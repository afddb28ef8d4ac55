"""Shared fixtures: the seven-token worked example used across the suite."""

import numpy as np
import pytest

from decodekit.core import TokenDistribution, Vocabulary

SEVEN_TOKENS = ("analyze", "optimize", "function", "tasks", "data", "errors", "solve")
SEVEN_PROBS = (0.175, 0.172, 0.170, 0.165, 0.120, 0.100, 0.098)

# Entropy of SEVEN_PROBS, hand-computed (natural log).
SEVEN_ENTROPY = 1.9186391053990972


@pytest.fixture
def seven_vocab():
    return Vocabulary.from_tokens(SEVEN_TOKENS)


@pytest.fixture
def seven_dist(seven_vocab):
    return TokenDistribution(seven_vocab, np.array(SEVEN_PROBS))
