import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from taylor_edges.catalog import (
    a1,
    two_element_majority,
    two_element_semilattice,
    z2_minority,
)
from taylor_edges.csp import Template


@pytest.fixture(scope="session")
def semilattice():
    return two_element_semilattice()


@pytest.fixture(scope="session")
def z2():
    return z2_minority()


@pytest.fixture(scope="session")
def majority():
    return two_element_majority()


@pytest.fixture(scope="session")
def alg_a1():
    return a1()


@pytest.fixture(scope="session")
def ternary_template():
    return Template.hs_closure([z2_minority(), two_element_majority(), a1()])


@pytest.fixture(scope="session")
def semilattice_template():
    return Template.hs_closure([two_element_semilattice()])


@pytest.fixture(scope="session")
def full_catalog(ternary_template, semilattice_template):
    return list(ternary_template.members) + list(semilattice_template.members)
