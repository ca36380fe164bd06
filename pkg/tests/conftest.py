"""Shared test systems: the small zoo every suite exercises."""

import math

import numpy as np
import pytest

from qdim import (
    GibbsMeasure,
    LevelSchedule,
    Mobius,
    ProductMeasure,
    Similarity,
    System,
)

LOG2_OVER_LOG3 = math.log(2.0) / math.log(3.0)


def autonomous(maps, interval=(0.0, 1.0), **kwargs) -> System:
    return System(LevelSchedule(interval, (tuple(maps),)), **kwargs)


@pytest.fixture(scope="session")
def tiling():
    """Two half-scale similarities filling [0,1]; every q-dimension is 1."""
    return autonomous([Similarity(0.5, 0.0), Similarity(0.5, 0.5)])


@pytest.fixture(scope="session")
def cantor():
    """Middle-thirds Cantor system."""
    return autonomous([Similarity(1 / 3, 0.0), Similarity(1 / 3, 2 / 3)])


@pytest.fixture(scope="session")
def mobius():
    """Autonomous pair x -> 1/(x+2), 1/(x+3) on [0,1]."""
    return autonomous([Mobius(2.0), Mobius(3.0)])


@pytest.fixture(scope="session")
def alternating():
    """Period-2 similarity schedule: two 1/4-maps, then three 1/5-maps."""
    return System(
        LevelSchedule(
            (0.0, 1.0),
            (
                (Similarity(0.25, 0.0), Similarity(0.25, 0.75)),
                (Similarity(0.2, 0.0), Similarity(0.2, 0.4), Similarity(0.2, 0.8)),
            ),
        )
    )


@pytest.fixture(scope="session")
def uniform2():
    return ProductMeasure.uniform([2])


@pytest.fixture(scope="session")
def skewed():
    return ProductMeasure(tail=((0.3, 0.7),))


@pytest.fixture(scope="session")
def gibbs_zero():
    return GibbsMeasure(np.zeros((2, 2)))


@pytest.fixture(scope="session")
def gibbs_markov():
    return GibbsMeasure(np.log(np.array([[0.6, 0.4], [0.5, 0.5]])))


@pytest.fixture(scope="session")
def zoo(tiling, cantor, mobius, uniform2, skewed, gibbs_zero):
    """(name, system, measure) triples used by the cross-cutting property suites."""
    return [
        ("tiling", tiling, uniform2),
        ("cantor-uniform", cantor, uniform2),
        ("cantor-skewed", cantor, skewed),
        ("mobius-gibbs", mobius, gibbs_zero),
    ]
