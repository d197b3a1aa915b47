import logging

import pytest

from mhd_ensemble.ensemble_scheme import PhysParams
from mhd_ensemble.fem import MixedSpace
from mhd_ensemble.mesh import unit_square
from mhd_ensemble.mms_verify import MMSProblem, PerturbationEnsemble

logging.basicConfig(level=logging.INFO)


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: acceptance-scale runs (minutes)')


@pytest.fixture
def square2():
    return unit_square(2)


@pytest.fixture
def space2():
    return MixedSpace(unit_square(2))


@pytest.fixture
def space4():
    return MixedSpace(unit_square(4))


@pytest.fixture
def phys():
    return PhysParams(0.01, 0.001)


@pytest.fixture
def mms_problem(phys):
    return MMSProblem(phys, PerturbationEnsemble(1e-3, 4))
