"""Optimistic index policies over trajectory feedback.

``TrajectoryUcb`` maintains, for every node, the mean of all hitting-length
samples extracted from every trajectory that covered it (count = cover
count); ``StandardUcb`` is the classic baseline that only uses the lengths
of walks it started itself (count = play count).  Both play each node once
in id order to warm up and then maximize

    index(v) = clipped_mean(v) + width(n_v, t).

Samples feeding the index are clipped to the truncation level xi_t (the
raw mean is kept alongside for error reporting); the width options are

    "scaled"      sqrt(2 ln(2 K t^2) / n) + rho^xi_t / (1-rho)^2
    "truncation"  xi_t * sqrt(2 ln(2 K t^2) / n) + rho^xi_t / (1-rho)^2

"truncation" is the conservative Hoeffding width for range-[0, xi_t]
samples; "scaled" (the default) drops the range factor -- hitting lengths
have O(1/(1-rho)) spread regardless of the truncation level -- and is what
makes learning visible at simulation horizons.
"""

from __future__ import annotations

import math

import numpy as np

from .feedback import FeedbackLedger
from .simulate import Trajectory, trajectory_length


def truncation_level(t: int, rho: float) -> int:
    """xi_t = ceil(3 ln(t+1) / ln(1/rho)) + 1, the index's sample clip level."""
    if t < 1:
        raise ValueError(f"epoch must be >= 1, got {t}")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    return math.ceil(3.0 * math.log(t + 1) / math.log(1.0 / rho)) + 1


def confidence(n: int, t: int, n_nodes: int, rho: float) -> float:
    """Truncation-form confidence width for a mean of n clipped samples.

    xi_t * sqrt(2 ln(2 K t^2) / n) + rho^xi_t / (1 - rho)^2: a Hoeffding
    width for samples in [0, xi_t] plus the geometric-tail bias of clipping.
    Strictly decreasing in n; as n -> infinity only the bias term is left.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    xi = truncation_level(t, rho)
    width = xi * math.sqrt(2.0 * math.log(2.0 * n_nodes * t * t) / n)
    return width + rho ** xi / (1.0 - rho) ** 2


def scaled_confidence(n: int, t: int, n_nodes: int, rho: float) -> float:
    """Like :func:`confidence` but without the xi_t range factor on the width."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    xi = truncation_level(t, rho)
    return math.sqrt(2.0 * math.log(2.0 * n_nodes * t * t) / n) + rho ** xi / (1.0 - rho) ** 2


_WIDTHS = {"scaled": scaled_confidence, "truncation": confidence}


class _ClippedMeans:
    """Means of samples clipped at a non-decreasing threshold.

    Samples at or below the threshold seen at insertion are folded into a
    running sum (the threshold only grows, so they stay unclipped forever);
    the rare larger ones are kept individually and clipped at query time,
    migrating into the running sum once the threshold passes them.
    """

    def __init__(self, n_nodes: int):
        self.small_sums = np.zeros(n_nodes)
        self.counts = np.zeros(n_nodes, dtype=np.int64)
        self.raw_sums = np.zeros(n_nodes)
        self.big: list[list[float]] = [[] for _ in range(n_nodes)]

    def add(self, node: int, value: float, threshold: float) -> None:
        self.counts[node] += 1
        self.raw_sums[node] += value
        if value <= threshold:
            self.small_sums[node] += value
        else:
            self.big[node].append(value)

    def clipped_means(self, threshold: float) -> np.ndarray:
        sums = self.small_sums.copy()
        for node, pending in enumerate(self.big):
            if not pending:
                continue
            keep = []
            for value in pending:
                if value <= threshold:
                    self.small_sums[node] += value
                    sums[node] += value
                else:
                    keep.append(value)
                    sums[node] += threshold
            self.big[node] = keep
        return sums / np.maximum(self.counts, 1)

    def raw_means(self) -> np.ndarray:
        return self.raw_sums / np.maximum(self.counts, 1)


class TrajectoryUcb:
    """Optimistic index over *all* extracted samples (cover counts)."""

    use_coverage = True

    def __init__(self, n_nodes: int, rho: float, width: str = "scaled"):
        if width not in _WIDTHS:
            raise ValueError(f"width must be one of {sorted(_WIDTHS)}, got {width!r}")
        self.n_nodes = n_nodes
        self.rho = float(rho)
        self.width = width
        self._width_fn = _WIDTHS[width]
        self.ledger = FeedbackLedger(n_nodes)
        self.store = _ClippedMeans(n_nodes)

    @property
    def t(self) -> int:
        return self.ledger.epoch

    def counts(self) -> np.ndarray:
        """Sample counts backing the index (floored at 1)."""
        return self.ledger.n_covered() if self.use_coverage else self.ledger.n_played()

    def raw_means(self) -> np.ndarray:
        """Unclipped sample means, for error curves."""
        return self.store.raw_means()

    def indices(self) -> np.ndarray:
        """Clipped means plus confidence widths at the current epoch."""
        t = self.t
        xi = truncation_level(t, self.rho)
        means = self.store.clipped_means(float(xi))
        counts = self.counts()
        widths = np.array([self._width_fn(int(n), t, self.n_nodes, self.rho)
                           for n in counts])
        return means + widths

    def select(self) -> int:
        """Next node to play: warm-up in id order, then the argmax index.

        np.argmax takes the first maximizer, so exact ties resolve to the
        smallest node id.
        """
        self.last_indices = self.indices()
        unplayed = np.flatnonzero(self.ledger.plays == 0)
        if unplayed.size:
            return int(unplayed[0])
        return int(np.argmax(self.last_indices))

    def observe(self, traj: Trajectory) -> None:
        """Record the epoch's trajectory and fold in its samples."""
        xi = float(truncation_level(self.t, self.rho))
        samples = self.ledger.record(traj)
        if self.use_coverage:
            for node, y in samples.items():
                self.store.add(node, y, xi)
        else:
            self.store.add(traj.played, trajectory_length(traj), xi)


class StandardUcb(TrajectoryUcb):
    """Baseline index that ignores pass-through observations.

    Only the full length of the walks a node itself started contribute to
    its mean, and the width uses the play count.
    """

    use_coverage = False
