import math

import numpy as np
import pytest

from slowline.bands import band_edges
from slowline.devices import qubit_device, qubit_q1, test_device, untapered_device


@pytest.fixture(scope="session")
def test_spec():
    return test_device()


@pytest.fixture(scope="session")
def untapered_26():
    return untapered_device(26)


@pytest.fixture(scope="session")
def qubit_spec():
    return qubit_device()


@pytest.fixture(scope="session")
def qubit_spec_nobend():
    return qubit_device(bend_c_series=None)


@pytest.fixture(scope="session")
def q1():
    return qubit_q1()


@pytest.fixture(scope="session")
def midband(qubit_spec_nobend):
    lo, hi = band_edges(qubit_spec_nobend.interior)
    return 0.5 * (lo + hi)


@pytest.fixture(scope="session")
def tapered_26(untapered_26):
    from slowline.taper import TaperProblem, optimize
    return optimize(TaperProblem(base=untapered_26, n_modified=2)).spec


@pytest.fixture(scope="session")
def tapered_50():
    from slowline.devices import untapered_device
    from slowline.taper import TaperProblem, optimize
    return optimize(TaperProblem(base=untapered_device(50), n_modified=2)).spec
