import numpy as np
import pytest

from epidyn import (
    DiscreteConcepts,
    KnowledgeFunction,
    KnowledgeSetting,
    TabularLikelihood,
)


@pytest.fixture
def flat_round():
    """The four-agent flat/round-earth worked example.

    Experiences f1, f2, f3 suggest a flat earth as much as a round one;
    r1, r2 only a round one.  Agent 1 knows flat-at-f1; agents 2 and 3 map
    both f1 and r1 to flat resp. round; agent 4 mixes both concepts.
    """
    setting = KnowledgeSetting(
        np.arange(5.0)[:, None],
        DiscreteConcepts([[0.0], [1.0], [2.0]], labels=("none", "flat", "round")),
    )
    flat, round_, none = [1.0], [2.0], [0.0]
    population = [
        KnowledgeFunction(setting, [flat, none, none, none, none]),
        KnowledgeFunction(setting, [flat, none, none, flat, none]),
        KnowledgeFunction(setting, [round_, none, none, round_, none]),
        KnowledgeFunction(setting, [flat, none, none, round_, none]),
    ]
    # flat explains the f experiences but not the r ones; round explains all
    table = np.array(
        [
            [0.5, 1.0, 1.0],
            [0.5, 1.0, 1.0],
            [0.5, 1.0, 1.0],
            [0.5, 0.0, 1.0],
            [0.5, 0.0, 1.0],
        ]
    )
    landscape = TabularLikelihood(table)
    return setting, population, landscape


# Printed 4x4 credibility matrix of the worked example; the formula gives
# 1/2 at entry (1, 3) (0-indexed) where the print shows 1.
FLAT_ROUND_PRINTED = np.array(
    [
        [1.0, 1.0, 1.0, 1.0],
        [0.5, 0.0, 1.0, 1.0],
        [0.5, 0.0, 1.0, 0.5],
        [0.5, 0.0, 1.0, 1.0],
    ]
)


@pytest.fixture
def banded_primitive():
    """4x4 banded 0/1 matrix whose cube is the first strictly positive power."""
    return np.array(
        [
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 1.0, 1.0, 0.0],
            [0.0, 1.0, 1.0, 1.0],
            [0.0, 0.0, 1.0, 1.0],
        ]
    )


def random_stochastic(rng, n):
    M = rng.uniform(0.0, 1.0, size=(n, n)) + 1e-12
    return M / M.sum(axis=1, keepdims=True)
