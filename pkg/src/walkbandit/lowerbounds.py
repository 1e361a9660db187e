"""Hard instance constructions and the exact constants behind them.

Two families are provided:

* a two-node pair of chains differing only by an ``eps`` self-loop boost on
  opposite nodes, whose optimality gap, per-step KL divergence and whole-
  trajectory KL divergence all have closed forms -- these drive the
  sqrt(T)-hardness probe; and

* a K-node family with identical uniform transitions whose instances differ
  only in the Bernoulli mean of a single absorbing-edge length, giving an
  optimality gap of exactly ``eps`` while being per-step indistinguishable
  from every node but one.

Everything here is exact arithmetic or a dense linear solve; simulation
never enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chain import ChainInstance, expected_hitting_times
from .simulate import BernoulliLengths


@dataclass(frozen=True)
class TwoNodePair:
    """Matched two-node chains: node 1 is better in ``primary``, node 0 in ``swapped``."""

    eps: float
    primary: ChainInstance
    swapped: ChainInstance


def two_node_pair(eps: float) -> TwoNodePair:
    """Chains [[1/2, 1/8], [1/8, 1/2 + eps]] and its swap, unit lengths.

    Requires 0 <= eps <= 1/4 so both matrices stay strictly substochastic.
    """
    if not 0.0 <= eps <= 0.25:
        raise ValueError(f"eps must lie in [0, 1/4], got {eps!r}")
    rho = 0.625 + eps
    primary = ChainInstance(np.array([[0.5, 0.125], [0.125, 0.5 + eps]]), rho,
                            name=f"two-node(eps={eps!r})")
    swapped = ChainInstance(np.array([[0.5 + eps, 0.125], [0.125, 0.5]]), rho,
                            name=f"two-node-swapped(eps={eps!r})")
    return TwoNodePair(eps=float(eps), primary=primary, swapped=swapped)


def two_node_gap(eps: float) -> float:
    """Exact optimality gap of the primary instance, via the hitting-time solve."""
    mu = expected_hitting_times(two_node_pair(eps).primary)
    return float(mu[1] - mu[0])


def two_node_gap_closed(eps: float) -> float:
    """Closed form of the gap: 64 eps / (15 - 32 eps); leading order 64 eps / 15."""
    return 64.0 * eps / (15.0 - 32.0 * eps)


def categorical_kl(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) for categorical distributions, with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    total = 0.0
    for pi, qi in zip(p, q):
        if pi > 0.0:
            total += pi * math.log(pi / qi)
    return total


def _step_distribution(chain: ChainInstance, node: int) -> np.ndarray:
    """Law of the first step from ``node``: transitions plus absorbing mass."""
    row = chain.transitions[node]
    return np.append(row, 1.0 - row.sum())


def per_step_kl(eps: float, node: int = 0) -> float:
    """Exact one-step KL between the pair, seen from ``node``.

    The first-step laws differ only in the self-loop/absorbing masses; from
    node 0 the divergence is

        (1/2) ln((1/2)/(1/2 + eps)) + (3/8) ln((3/8)/(3/8 - eps))
        = (7/3) eps^2 + O(eps^3),

    and by the swap symmetry node 1 gives the same value to that order.
    """
    pair = two_node_pair(eps)
    return categorical_kl(_step_distribution(pair.primary, node),
                          _step_distribution(pair.swapped, node))


def trajectory_kl(eps: float) -> np.ndarray:
    """Whole-trajectory KL between the pair, from each starting node.

    The per-trajectory divergence d satisfies the one-step decomposition
    d = c + M d with c the per-step KLs and M the primary chain, so

        (I - M) d = c,

    giving d = (8/3) c (componentwise (56/9) eps^2) in the eps -> 0 limit.
    """
    pair = two_node_pair(eps)
    c = np.array([per_step_kl(eps, 0), per_step_kl(eps, 1)])
    return scipy.linalg.solve(np.eye(2) - pair.primary.transitions, c)


def regret_lower_bound(eps: float, horizon: int) -> float:
    """Pair-averaged regret floor (32/15) eps T exp(-(112/9) T eps^2)."""
    return (32.0 / 15.0) * eps * horizon * math.exp(-(112.0 / 9.0) * horizon * eps * eps)


def minimax_eps(horizon: int) -> float:
    """The gap choice eps = T^(-1/2) / 4 that maximizes the floor's T-scaling."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    return 0.25 / math.sqrt(horizon)


def minimax_value(horizon: int) -> float:
    """The floor evaluated at the minimax gap; grows like sqrt(T)."""
    return regret_lower_bound(minimax_eps(horizon), horizon)


# ---------------------------------------------------------------------------
# K-node Bernoulli-length family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliFamily:
    """K instances sharing uniform transitions p = 1/(2K), distinguished only
    by the Bernoulli mean of one absorbing-edge length.

    Instance k boosts the mean of the (k -> absorb) edge length from 1/2 to
    1/2 + eps/(1 - K p), which lifts node k's expected hitting length by
    exactly ``eps`` and leaves every other node untouched.
    """

    n_nodes: int
    horizon: int
    p: float
    eps: float
    chain: ChainInstance

    @property
    def boost(self) -> float:
        """Mean shift eps / (1 - K p) applied to the distinguished edge."""
        return self.eps / (1.0 - self.n_nodes * self.p)

    def means(self, k: int | None = None) -> np.ndarray:
        """Bernoulli mean matrix of instance k (None for the base instance)."""
        m = np.full((self.n_nodes, self.n_nodes + 1), 0.5)
        if k is not None:
            if not 0 <= k < self.n_nodes:
                raise IndexError(f"instance index {k} out of range")
            m[k, -1] += self.boost
        return m

    def length_process(self, k: int | None, seed: int) -> BernoulliLengths:
        return BernoulliLengths(self.means(k), seed)


def bernoulli_family(n_nodes: int, horizon: int) -> BernoulliFamily:
    """Build the family for K nodes at horizon T.

    p = 1/(2K) and eps = (1/(4 sqrt 2)) ((K-1)/K) sqrt(K/T); the construction
    requires the boosted mean to stay a probability, i.e.
    eps/(1 - K p) <= 1/2.
    """
    if n_nodes < 2:
        raise ValueError(f"need at least 2 nodes, got {n_nodes}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    p = 1.0 / (2.0 * n_nodes)
    eps = (1.0 / (4.0 * math.sqrt(2.0))) * ((n_nodes - 1) / n_nodes) \
        * math.sqrt(n_nodes / horizon)
    if eps / (1.0 - n_nodes * p) > 0.5:
        raise ValueError(
            f"horizon {horizon} too short for K={n_nodes}: the boosted Bernoulli "
            f"mean {0.5 + eps / (1.0 - n_nodes * p)!r} is not a probability")
    chain = ChainInstance(np.full((n_nodes, n_nodes), p), 0.5,
                          name=f"uniform-family(K={n_nodes})")
    return BernoulliFamily(n_nodes=n_nodes, horizon=horizon, p=p, eps=eps, chain=chain)


def family_gap(family: BernoulliFamily, k: int) -> float:
    """Exact optimality gap of instance k: best-vs-second expected hitting length.

    Solved through the chain machinery with the instance's mean lengths;
    equals ``family.eps`` identically.
    """
    mu = expected_hitting_times(family.chain, family.means(k))
    ordered = np.sort(mu)
    return float(ordered[-1] - ordered[-2])


def family_step_kl(family: BernoulliFamily, node: int, k: int) -> float:
    """Exact KL of one (step, length) observation between base and instance k.

    From any node other than k the two instances generate identical
    observations, so the divergence is 0.  From node k only the absorbing
    branch differs, contributing the absorbing mass times a binary KL:

        (1 - K p) * KL(Bernoulli(1/2) || Bernoulli(1/2 + boost)).
    """
    if node != k:
        return 0.0
    absorb = 1.0 - family.n_nodes * family.p
    b = family.boost
    return absorb * (0.5 * math.log(0.5 / (0.5 + b)) + 0.5 * math.log(0.5 / (0.5 - b)))


def family_regret_bound(n_nodes: int, horizon: int) -> float:
    """Minimax regret floor sqrt(K T) / (8 sqrt 2) for the K-node family."""
    return math.sqrt(n_nodes * horizon) / (8.0 * math.sqrt(2.0))


# ---------------------------------------------------------------------------
# summary table
# ---------------------------------------------------------------------------

def report_rows(eps_grid, horizon: int) -> list[dict]:
    """One row per eps: exact vs leading gap, KL rates, and the regret floor."""
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        traj = trajectory_kl(eps) if eps > 0 else np.zeros(2)
        rows.append({
            "eps": eps,
            "gap_exact": two_node_gap(eps),
            "gap_leading": 64.0 * eps / 15.0,
            "step_kl_over_eps2": per_step_kl(eps) / eps ** 2 if eps > 0 else 7.0 / 3.0,
            "traj_kl_over_eps2": float(traj[0]) / eps ** 2 if eps > 0 else 56.0 / 9.0,
            "regret_floor": regret_lower_bound(eps, horizon),
        })
    return rows
