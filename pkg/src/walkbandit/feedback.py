"""Turning observed trajectories into per-node hitting-time samples.

One trajectory yields at most one sample per node: if node v appears in the
walk, the suffix length from its *first* occurrence to absorption is an
unbiased draw of v's hitting length (the walk restarts afresh at v by the
Markov property; later occurrences are not independent and are discarded).

The ledger keeps the counters the algorithms index by:

    plays[v]   -- epochs whose walk was started at v
    covers[v]  -- epochs whose walk visited v at all
    pair[i, j] -- epochs where both i and j were covered and i occurred first

All denominators are floored at 1.  ``pair`` feeds the cover-probability
estimate q_hat[i, j] ~= Pr(a walk from i visits j), which in turn corrects
the play distribution into the probability that a node gets covered.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .chain import ChainInstance, cover_probs
from .simulate import Trajectory


class LedgerSequenceError(RuntimeError):
    """A trajectory was recorded out of epoch order."""


def first_occurrences(traj: Trajectory) -> dict[int, int]:
    """Map node -> index of its first occurrence among the transient steps."""
    first: dict[int, int] = {}
    for pos, node in enumerate(traj.nodes[:-1]):
        if node not in first:
            first[node] = pos
    return first


def extract_sample(traj: Trajectory, node: int) -> float | None:
    """Suffix length from ``node``'s first occurrence, or None if not covered."""
    first = first_occurrences(traj).get(node)
    if first is None:
        return None
    return float(sum(traj.lengths[first:]))


def extract_all_samples(traj: Trajectory) -> dict[int, float]:
    """One hitting-length sample for every node the trajectory covers."""
    total = float(sum(traj.lengths))
    samples: dict[int, float] = {}
    consumed = 0.0
    for pos, node in enumerate(traj.nodes[:-1]):
        if node not in samples:
            samples[node] = total - consumed
        consumed += traj.lengths[pos]
    return samples


class FeedbackLedger:
    """Running play/cover/pair counters and per-node sample sums.

    The ledger at epoch t has seen the trajectories of epochs 1 .. t-1, so
    its counters are exactly the quantities the algorithms condition on
    before playing epoch t.
    """

    def __init__(self, n_nodes: int):
        if n_nodes < 1:
            raise ValueError("need at least one node")
        self.n_nodes = n_nodes
        self.epoch = 1
        self.plays = np.zeros(n_nodes, dtype=np.int64)
        self.covers = np.zeros(n_nodes, dtype=np.int64)
        self.pair = np.zeros((n_nodes, n_nodes), dtype=np.int64)
        self.sample_sums = np.zeros(n_nodes)

    def n_played(self) -> np.ndarray:
        """Play counts floored at 1."""
        return np.maximum(self.plays, 1)

    def n_covered(self) -> np.ndarray:
        """Cover counts floored at 1 (a play always covers its own node,
        so these dominate the play counts)."""
        return np.maximum(self.covers, 1)

    def sample_means(self) -> np.ndarray:
        """Raw mean of the extracted samples per node (0 where none seen)."""
        return self.sample_sums / np.maximum(self.covers, 1)

    def record(self, traj: Trajectory) -> dict[int, float]:
        """Fold one trajectory into the counters and advance the epoch.

        Returns the extracted samples so callers do not have to re-scan the
        trajectory.  The trajectory must carry the ledger's current epoch.
        """
        if traj.epoch != self.epoch:
            raise LedgerSequenceError(
                f"expected trajectory for epoch {self.epoch}, got {traj.epoch}")
        self.plays[traj.played] += 1
        first = first_occurrences(traj)
        samples = extract_all_samples(traj)
        for node, y in samples.items():
            self.covers[node] += 1
            self.sample_sums[node] += y
        # Ordered cover pairs: first occurrence of i strictly before j's.
        order = sorted(first, key=first.get)
        for a, i in enumerate(order):
            for j in order[a + 1:]:
                self.pair[i, j] += 1
        self.epoch += 1
        return samples

    def cover_prob_estimate(self) -> np.ndarray:
        """q_hat[i, j] = pair[i, j] / max(covers[i], 1); zero diagonal."""
        return self.pair / np.maximum(self.covers, 1)[:, None]

    def export_csv(self, path: str | Path) -> None:
        """Snapshot: node, counters, sample mean, q_hat row."""
        qhat = self.cover_prob_estimate()
        means = self.sample_means()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "n_played", "n_covered", "sample_mean"]
                            + [f"qhat_{j}" for j in range(self.n_nodes)])
            for v in range(self.n_nodes):
                writer.writerow([v, int(self.n_played()[v]), int(self.n_covered()[v]),
                                 repr(float(means[v]))]
                                + [repr(float(qhat[v, j])) for j in range(self.n_nodes)])


def estimated_cover_probs(ledger: FeedbackLedger, play_probs: np.ndarray) -> np.ndarray:
    """Estimated probability each node gets covered this epoch.

    p_hat[j] = p[j] + sum_{i != j} q_hat[i, j] * p[i], with q_hat from the
    ledger (strictly earlier epochs only).
    """
    p = np.asarray(play_probs, dtype=float)
    qhat = ledger.cover_prob_estimate()
    return p + qhat.T @ p


def expected_cover_probs(chain: ChainInstance, play_probs: np.ndarray) -> np.ndarray:
    """Exact probability each node gets covered, via first-passage analysis.

    p_tilde[j] = p[j] + sum_{i != j} Q[i, j] * p[i] where Q[i, j] is the
    exact probability a walk from i visits j.  Since Q has unit diagonal
    this is the true coverage probability of node j under play
    distribution p.
    """
    p = np.asarray(play_probs, dtype=float)
    q = cover_probs(chain)
    np.fill_diagonal(q, 0.0)
    return p + q.T @ p
