import logging

import numpy as np
import pytest

from systems.LtiSystem import LtiSystem
from systems.SystemFamilies import random_lti
from systems.Trajectory import Trajectory


@pytest.fixture
def logger():
    return logging.getLogger('unident.tests')


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def s1_system(rng):
    """p = l = m = 4 with every entry of A, B, C free."""
    return random_lti(4, 4, 4, rng, 'full')


@pytest.fixture
def s2_system(rng):
    """p = l = m = 4 with only the first row of A free."""
    return random_lti(4, 4, 4, rng, 'first_row')


@pytest.fixture
def scalar_system():
    return LtiSystem([[0.5]], [[1.0]], [[1.0]], LtiSystem.full_mask(1, 1, 1))


@pytest.fixture
def full_rank_input(rng):
    return Trajectory.random_input(50, 4, rng=rng)


@pytest.fixture
def system_file(tmp_path, s1_system):
    path = tmp_path / 'system.json'
    s1_system.to_json(path)
    return path

