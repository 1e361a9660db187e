"""Built-in chain instances used by the CLI and the reproduction runs."""

from __future__ import annotations

import numpy as np

from .chain import ChainInstance
from .lowerbounds import bernoulli_family, two_node_pair
from .simulate import FixedLengths, LengthProcess, SharedGaussianAbsorbLengths


def two_node_instance(eps: float = 0.0) -> ChainInstance:
    """The primary two-node chain with self-loop boost ``eps`` on node 1."""
    return two_node_pair(eps).primary


def nine_node_ring() -> ChainInstance:
    """Nine nodes on a ring: self-loop 0.3, each neighbour 0.1, absorb 0.5."""
    k = 9
    m = np.zeros((k, k))
    for i in range(k):
        m[i, i] = 0.3
        m[i, (i + 1) % k] = 0.1
        m[i, (i - 1) % k] = 0.1
    return ChainInstance(m, 0.5, name="nine-node-ring")


def ring_length_process(seed: int) -> SharedGaussianAbsorbLengths:
    """The ring's companion length process: shared clipped Gaussian,
    Normal(0.5, 0.1) per epoch, absorbing edge of node 0 shifted up by 0.5."""
    return SharedGaussianAbsorbLengths(9, seed)


BUILTIN_INSTANCES = ("fig1", "exp9", "knode")


def builtin_instance(name: str, *, eps: float = 0.0, n_nodes: int = 4,
                     horizon: int = 1000, family_index: int = 0,
                     seed: int = 0) -> tuple[ChainInstance, LengthProcess]:
    """Resolve a builtin name to (chain, default length process).

    fig1   two-node pair's primary instance, unit lengths (``eps`` applies)
    exp9   nine-node ring with its clipped-Gaussian absorbing lengths
    knode  K-node Bernoulli family instance ``family_index`` at ``horizon``
    """
    if name == "fig1":
        chain = two_node_instance(eps)
        return chain, FixedLengths(chain.n_nodes)
    if name == "exp9":
        return nine_node_ring(), ring_length_process(seed)
    if name == "knode":
        family = bernoulli_family(n_nodes, horizon)
        return family.chain, family.length_process(family_index, seed)
    raise KeyError(f"unknown builtin instance {name!r}; choose from {BUILTIN_INSTANCES}")
