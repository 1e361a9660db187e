"""Trajectory sampling and per-epoch edge-length processes.

A trajectory records the node sequence of one absorbing walk together with
the realized lengths of the traversed edges.  Length processes supply the
(K, K+1) edge-length matrix for each epoch: fixed matrices, i.i.d. draws
(shared clipped Gaussian on the absorbing edges, independent Bernoulli per
edge), or an explicit precomputed schedule.  Randomness is threaded through
``numpy.random.Generator`` streams keyed by (seed, counters) so that any
epoch's lengths can be regenerated independently of evaluation order.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .chain import ChainInstance, LengthRangeError, as_length_matrix

#: Marker used as the final entry of a trajectory's node sequence.
ABSORBED = -1

#: Hard cap on walk steps; hitting it means the instance is corrupted
#: (validation would have rejected it).
MAX_STEPS = 10_000_000


class StepLimitError(RuntimeError):
    """A walk failed to absorb within MAX_STEPS steps."""


def rng_at(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream ``key`` under a master seed.

    Streams are split by seeding a ``SeedSequence`` with the master entropy
    and a counter tuple, so (seed, key) fully determines the stream no
    matter how many other streams were consumed before it.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True)
class Trajectory:
    """One absorbed walk: nodes X_0, ..., X_{H-1}, ABSORBED and edge lengths.

    ``lengths[k]`` is the realized length of the edge from ``nodes[k]`` to
    ``nodes[k+1]``; the played node is ``nodes[0]``.
    """

    nodes: tuple[int, ...]
    lengths: tuple[float, ...]
    epoch: int

    def __post_init__(self) -> None:
        if len(self.nodes) < 2 or self.nodes[-1] != ABSORBED:
            raise ValueError("trajectory must end with the absorbing marker")
        if ABSORBED in self.nodes[:-1]:
            raise ValueError("absorbing marker may only appear last")
        if len(self.lengths) != len(self.nodes) - 1:
            raise ValueError("need exactly one length per traversed edge")

    @property
    def played(self) -> int:
        return self.nodes[0]

    @property
    def hops(self) -> int:
        """Number of edges traversed (the absorbing step included)."""
        return len(self.lengths)


def trajectory_length(traj: Trajectory) -> float:
    """Total realized length of the walk, sum of its edge lengths."""
    return float(sum(traj.lengths))


def sample_trajectory(chain: ChainInstance, lengths: np.ndarray | None, start: int,
                      rng: np.random.Generator, epoch: int = 0) -> Trajectory:
    """Simulate one walk from ``start`` until absorption.

    From node i the next state is transient node j with probability
    ``chain.transitions[i, j]`` and the absorbing node with the leftover
    mass.  ``lengths`` is the epoch's (K, K+1) edge-length matrix (``None``
    for unit lengths); the realized edge lengths are read off it.
    """
    k = chain.n_nodes
    if not 0 <= start < k:
        raise IndexError(f"start node {start} out of range for {k} nodes")
    lens = as_length_matrix(chain, lengths)
    # Cumulative row sums once per call; the absorbing node takes the tail.
    cum_rows = [list(np.cumsum(chain.transitions[i])) for i in range(k)]

    nodes = [start]
    edge_lengths: list[float] = []
    node = start
    for _ in range(MAX_STEPS):
        row = cum_rows[node]
        u = rng.random()
        nxt = bisect_right(row, u)
        if nxt >= k or u >= row[-1]:
            edge_lengths.append(float(lens[node, k]))
            nodes.append(ABSORBED)
            return Trajectory(tuple(nodes), tuple(edge_lengths), epoch)
        edge_lengths.append(float(lens[node, nxt]))
        nodes.append(nxt)
        node = nxt
    raise StepLimitError(
        f"walk exceeded {MAX_STEPS} steps; transition matrix is not substochastic enough")


# ---------------------------------------------------------------------------
# length processes
# ---------------------------------------------------------------------------

class LengthProcess:
    """Per-epoch supplier of edge-length matrices.

    ``epoch_lengths(t)`` must be a pure function of the process parameters
    and t (epochs are 1-based), so schedules are oblivious: fully determined
    before the run starts.  ``mean_lengths()`` returns the exact per-epoch
    expectation for i.i.d. processes and is what stochastic regret
    accounting uses; processes without a stationary mean return None.
    """

    n_nodes: int

    def epoch_lengths(self, t: int) -> np.ndarray:
        raise NotImplementedError

    def mean_lengths(self) -> np.ndarray | None:
        raise NotImplementedError


class FixedLengths(LengthProcess):
    """The same length matrix every epoch (unit lengths by default)."""

    def __init__(self, n_nodes: int, lengths: np.ndarray | None = None):
        self.n_nodes = n_nodes
        if lengths is None:
            lengths = np.ones((n_nodes, n_nodes + 1))
        self._lengths = np.asarray(lengths, dtype=float)
        if self._lengths.shape != (n_nodes, n_nodes + 1):
            raise LengthRangeError(
                f"length matrix must have shape {(n_nodes, n_nodes + 1)}")
        if not ((self._lengths >= 0) & (self._lengths <= 1)).all():
            raise LengthRangeError("edge lengths must lie in [0, 1]")

    def epoch_lengths(self, t: int) -> np.ndarray:
        return self._lengths

    def mean_lengths(self) -> np.ndarray:
        return self._lengths


def clipped_gaussian_mean(mean: float, std: float) -> float:
    """E[min(1, max(0, X))] for X ~ Normal(mean, std), in closed form.

    Splitting on the clip boundaries:
        E = Pr(X > 1) + E[X; 0 <= X <= 1]
          = (1 - Phi(b)) + mean*(Phi(b) - Phi(a)) - std*(phi(b) - phi(a))
    with a = (0 - mean)/std and b = (1 - mean)/std.
    """
    a = (0.0 - mean) / std
    b = (1.0 - mean) / std
    phi_a, phi_b = scipy.stats.norm.pdf(a), scipy.stats.norm.pdf(b)
    cdf_a, cdf_b = scipy.stats.norm.cdf(a), scipy.stats.norm.cdf(b)
    return float((1.0 - cdf_b) + mean * (cdf_b - cdf_a) - std * (phi_b - phi_a))


class SharedGaussianAbsorbLengths(LengthProcess):
    """Clipped-Gaussian absorbing-edge lengths driven by one draw per epoch.

    Each epoch draws W_t ~ Normal(mean, std) (std, not variance) and sets

        length(0 -> absorb) = clip(W_t + shift)   [node 0 runs long]
        length(i -> absorb) = clip(W_t)           for i != 0
        every transient edge length = 1

    with clip into [0, 1].  All epochs share the same W_t across nodes, so
    the absorbing-edge lengths move together.
    """

    def __init__(self, n_nodes: int, seed: int, mean: float = 0.5, std: float = 0.1,
                 shift: float = 0.5):
        self.n_nodes = n_nodes
        self.seed = int(seed)
        self.mean = float(mean)
        self.std = float(std)
        self.shift = float(shift)

    def epoch_lengths(self, t: int) -> np.ndarray:
        w = rng_at(self.seed, 2, t).normal(self.mean, self.std)
        lengths = np.ones((self.n_nodes, self.n_nodes + 1))
        lengths[:, -1] = min(1.0, max(0.0, w))
        lengths[0, -1] = min(1.0, max(0.0, w + self.shift))
        return lengths

    def mean_lengths(self) -> np.ndarray:
        lengths = np.ones((self.n_nodes, self.n_nodes + 1))
        lengths[:, -1] = clipped_gaussian_mean(self.mean, self.std)
        lengths[0, -1] = clipped_gaussian_mean(self.mean + self.shift, self.std)
        return lengths


class BernoulliLengths(LengthProcess):
    """Every edge length drawn independently as Bernoulli(mean) each epoch."""

    def __init__(self, means: np.ndarray, seed: int):
        means = np.asarray(means, dtype=float)
        if means.ndim != 2 or means.shape[1] != means.shape[0] + 1:
            raise LengthRangeError("means must have shape (K, K+1)")
        if not ((means >= 0) & (means <= 1)).all():
            raise LengthRangeError("Bernoulli means must lie in [0, 1]")
        self.n_nodes = means.shape[0]
        self.means = means
        self.seed = int(seed)

    def epoch_lengths(self, t: int) -> np.ndarray:
        rng = rng_at(self.seed, 3, t)
        return (rng.random(self.means.shape) < self.means).astype(float)

    def mean_lengths(self) -> np.ndarray:
        return self.means


class ScheduleLengths(LengthProcess):
    """An explicit, precomputed sequence of length matrices (oblivious)."""

    def __init__(self, schedule: np.ndarray):
        schedule = np.asarray(schedule, dtype=float)
        if schedule.ndim != 3 or schedule.shape[2] != schedule.shape[1] + 1:
            raise LengthRangeError("schedule must have shape (T, K, K+1)")
        if not ((schedule >= 0) & (schedule <= 1)).all():
            raise LengthRangeError("edge lengths must lie in [0, 1]")
        self.n_nodes = schedule.shape[1]
        self.horizon = schedule.shape[0]
        self.schedule = schedule

    def epoch_lengths(self, t: int) -> np.ndarray:
        if not 1 <= t <= self.horizon:
            raise IndexError(f"epoch {t} outside schedule of length {self.horizon}")
        return self.schedule[t - 1]

    def mean_lengths(self) -> None:
        return None
