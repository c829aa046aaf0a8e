import random

import pytest

from dyadicwalsh.dyadic import DyadicPoint
from dyadicwalsh.mset import MSetConfig, ProductPermutation


@pytest.fixture
def rng():
    return random.Random(20240607)


@pytest.fixture
def mset_config():
    def factory(d=2, S=2, seed=None):
        permutation = None
        if seed is not None:
            stages = range(1, min(S, 2) + 1)
            permutation = ProductPermutation.random(d, stages, random.Random(seed))
        return MSetConfig(d, S, permutation)
    return factory


@pytest.fixture
def random_points():
    def factory(d, depth, count, seed=0, accept=None):
        points = []
        generator = random.Random(seed)
        while len(points) < count:
            g = DyadicPoint.random(d, depth, generator)
            if accept is None or accept(g):
                points.append(g)
        return points
    return factory


@pytest.fixture
def perm_entries():
    def factory(d=2):
        entries = [{'stage': 2, 'coordinate': j, 'perm': [3, 1, 0, 2]} for j in range(1, d + 1)]
        entries.append({'stage': 1, 'coordinate': 1, 'perm': [0]})
        return entries
    return factory
