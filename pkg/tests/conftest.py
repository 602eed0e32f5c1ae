import numpy as np
import pytest

import ensemble_feedback as ef

ROOT_HALF = 1.0 / np.sqrt(2.0)


@pytest.fixture
def arc():
    return ef.ParamArc(-1.0, 1.0)


@pytest.fixture
def pair_a():
    return ef.example41a()


@pytest.fixture
def pair_b():
    return ef.example41b()


@pytest.fixture
def grid_a(pair_a):
    return pair_a.default_grid(201, insert=[0.0, -ROOT_HALF, ROOT_HALF])


@pytest.fixture
def grid_b(pair_b):
    return pair_b.default_grid(201, insert=[0.0, -ROOT_HALF, ROOT_HALF])


@pytest.fixture
def oscillator_fixture():
    """g = 2 + theta on [-1, 1], k two past the threshold, target (sin, cos)."""
    g = ef.PolyScalar.of(2.0, 1.0)
    ens = ef.OscillatorEnsemble(1.0, g)
    grid = ens.grid(201)
    threshold = ef.k_star(ens, grid)
    return ens.with_k(threshold.value + 2.0), grid
