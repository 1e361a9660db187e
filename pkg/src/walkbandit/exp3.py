"""Exponential-weights policies for adversarially chosen edge lengths.

All variants maximize walk length by playing from a softmax over cumulative
score estimates.  The trajectory-aware estimators divide by the estimated
probability that a node was *covered* (played or passed through), so a
single trajectory updates the score of every node it visited:

    shifted   Zhat_i = ((Z_i - B)/B * 1[i covered] + beta) / phat_i
    ratio     Zhat_i = Z_i * 1[i covered] / phat_i

where Z_i is the extracted hitting-length sample, B the walk-length cap,
beta an optimism bias, and phat_i = p_i + sum_{j != i} qhat[j, i] p_j the
coverage probability of i under the epoch's play distribution.  The
``StandardExp3`` baseline uses the classic single-arm estimator
Zhat_i = length * 1[i played] / p_i.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chain import ChainInstance, choose_cap, effective_arm_count, hitting_centrality
from .feedback import FeedbackLedger, estimated_cover_probs, extract_all_samples
from .simulate import Trajectory, trajectory_length


class ParameterError(ValueError):
    """Raised for parameter combinations outside the supported ranges."""


def softmax(scores: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max subtraction before exponentiating)."""
    scores = np.asarray(scores, dtype=float)
    shifted = scores - scores.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


@dataclass(frozen=True)
class Exp3Params:
    """Tuned constants for a horizon-T run."""

    cap: int            # walk-length cap B used to shift/normalize samples
    learning_rate: float
    exploration_bias: float
    fail_prob: float    # probability budget for any walk exceeding the cap


def default_params(chain: ChainInstance, horizon: int,
                   fail_prob: float | None = None) -> Exp3Params:
    """Horizon-tuned defaults: eta = beta = 1 / sqrt(kappa * T).

    The cap B is the smallest level whose overflow probability over all
    K * T walks stays below ``fail_prob`` (default 1/T; larger values are
    rejected).  If beta exceeds the chain's minimum hitting centrality the
    coverage corrections may be dominated by the bias; that is allowed but
    warned about.
    """
    if horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    if fail_prob is None:
        fail_prob = 1.0 / horizon
    if fail_prob > 1.0 / horizon:
        raise ParameterError(
            f"fail_prob must be <= 1/horizon = {1.0 / horizon!r}, got {fail_prob!r}")
    kappa = effective_arm_count(chain)
    rate = 1.0 / math.sqrt(kappa * horizon)
    alpha = hitting_centrality(chain).minimum
    if rate > alpha:
        warnings.warn(
            f"exploration bias {rate!r} exceeds the minimum hitting centrality "
            f"{alpha!r}; coverage corrections will be bias-dominated",
            stacklevel=2)
    cap = choose_cap(chain.n_nodes, horizon, chain.rho, fail_prob)
    return Exp3Params(cap=cap, learning_rate=rate, exploration_bias=rate,
                      fail_prob=fail_prob)


class TrajectoryExp3:
    """Exponential weights fed by coverage-corrected trajectory estimates.

    variant="shifted" is the cap-normalized estimator with optimism bias
    (every node's score moves every epoch); variant="ratio" is the plain
    covered-sample ratio used for the adversarial comparison runs.
    """

    def __init__(self, n_nodes: int, params: Exp3Params, rng: np.random.Generator,
                 variant: str = "shifted"):
        if variant not in ("shifted", "ratio"):
            raise ParameterError(f"unknown variant {variant!r}")
        self.n_nodes = n_nodes
        self.params = params
        self.rng = rng
        self.variant = variant
        self.scores = np.zeros(n_nodes)  # cumulative Zhat, one slot per node
        self.ledger = FeedbackLedger(n_nodes)
        self._pending_probs: np.ndarray | None = None

    @property
    def t(self) -> int:
        return self.ledger.epoch

    def probs(self) -> np.ndarray:
        """Play distribution for the current epoch (uniform at t = 1)."""
        return softmax(self.params.learning_rate * self.scores)

    def estimate(self, traj: Trajectory, play_probs: np.ndarray) -> np.ndarray:
        """Per-node score estimate for a trajectory drawn under ``play_probs``.

        Uses the ledger's cover-probability estimate, which only contains
        epochs strictly before the trajectory's.
        """
        phat = estimated_cover_probs(self.ledger, play_probs)
        samples = extract_all_samples(traj)
        cap = float(self.params.cap)
        zhat = np.zeros(self.n_nodes)
        for i in range(self.n_nodes):
            if self.variant == "shifted":
                shifted = (samples[i] - cap) / cap if i in samples else 0.0
                zhat[i] = (shifted + self.params.exploration_bias) / phat[i]
            else:
                zhat[i] = samples.get(i, 0.0) / phat[i]
        return zhat

    def select(self) -> int:
        p = self.probs()
        self._pending_probs = p
        return int(self.rng.choice(self.n_nodes, p=p))

    def observe(self, traj: Trajectory) -> None:
        if self._pending_probs is None:
            raise RuntimeError("observe() called before select()")
        self.last_probs = self._pending_probs
        self.last_estimate = self.estimate(traj, self._pending_probs)
        self.scores = self.scores + self.last_estimate
        self.ledger.record(traj)
        self._pending_probs = None


class StandardExp3:
    """Classic importance-weighted exponential weights (played arm only)."""

    def __init__(self, n_nodes: int, learning_rate: float, rng: np.random.Generator):
        self.n_nodes = n_nodes
        self.learning_rate = float(learning_rate)
        self.rng = rng
        self.scores = np.zeros(n_nodes)
        self.t = 1
        self._pending_probs: np.ndarray | None = None

    def probs(self) -> np.ndarray:
        return softmax(self.learning_rate * self.scores)

    def estimate(self, traj: Trajectory, play_probs: np.ndarray) -> np.ndarray:
        zhat = np.zeros(self.n_nodes)
        zhat[traj.played] = trajectory_length(traj) / play_probs[traj.played]
        return zhat

    def select(self) -> int:
        p = self.probs()
        self._pending_probs = p
        return int(self.rng.choice(self.n_nodes, p=p))

    def observe(self, traj: Trajectory) -> None:
        if self._pending_probs is None:
            raise RuntimeError("observe() called before select()")
        self.last_probs = self._pending_probs
        self.last_estimate = self.estimate(traj, self._pending_probs)
        self.scores = self.scores + self.last_estimate
        self.t += 1
        self._pending_probs = None
