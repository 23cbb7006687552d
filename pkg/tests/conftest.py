import numpy as np
import pytest

from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct
from rcldpc.gf2 import SparseBinaryMatrix, systematize

MU_A = [[0.21, 5], [0.25, 3], [0.25, 2], [0.29, 1]]
NU_A = [[1.0, 5]]


def dist_a() -> DegreeDistribution:
    return DegreeDistribution.from_pairs(MU_A, NU_A)


def regular_dist(dv: int, dc: int) -> DegreeDistribution:
    return DegreeDistribution.from_pairs([[1.0, dv - 1]], [[1.0, dc - 1]])


def random_sparse(rng: np.random.Generator, m: int, n: int, density: float) -> SparseBinaryMatrix:
    return SparseBinaryMatrix.from_dense((rng.random((m, n)) < density).astype(np.uint8))


@pytest.fixture(scope="session")
def small_peg():
    """(3,6)-regular N=100 PEG code with its generator."""
    cfg = ConstructionConfig(n=100, m=50, distribution=regular_dist(3, 6), seed=11)
    h = peg_construct(cfg)
    g, _ = systematize(h)
    return h, g


@pytest.fixture(scope="session")
def irregular_peg_200():
    """Irregular code-A-style N=200 PEG code with its generator."""
    cfg = ConstructionConfig(n=200, m=100, distribution=dist_a(), seed=5)
    h = peg_construct(cfg)
    g, _ = systematize(h)
    return h, g
