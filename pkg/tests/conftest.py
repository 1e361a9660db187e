"""Shared chain fixtures.

Four instances cover the shapes the tests care about: the symmetric
two-node chain, a dense asymmetric three-node chain, the nine-node ring
used by the reproduction runs, and a single self-loop node whose hop count
is exactly geometric.
"""

import numpy as np
import pytest

from walkbandit.chain import ChainInstance
from walkbandit.instances import nine_node_ring
from walkbandit.lowerbounds import two_node_pair


@pytest.fixture(scope="session")
def fig1() -> ChainInstance:
    return two_node_pair(0.0).primary


@pytest.fixture(scope="session")
def k3() -> ChainInstance:
    return ChainInstance(
        np.array([[0.2, 0.3, 0.1], [0.25, 0.1, 0.15], [0.0, 0.4, 0.3]]), 0.7,
        name="k3")


@pytest.fixture(scope="session")
def ring() -> ChainInstance:
    return nine_node_ring()


@pytest.fixture(scope="session")
def k1() -> ChainInstance:
    return ChainInstance(np.array([[0.5]]), 0.5, name="self-loop")
