"""Brute-force cross-checks used by the tests.

Everything here recomputes, by direct simulation or quadrature, quantities
the package derives analytically, so the tests can compare the two.  The
walk simulator is vectorized (all walks advance one step per iteration)
and is deliberately written against the transition matrix alone -- it
shares no code with walkbandit.simulate.
"""

from typing import NamedTuple

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.stats


class WalkBatch(NamedTuple):
    hops: np.ndarray        # (N,) edges traversed per walk
    first_pos: np.ndarray   # (N, K) position of each node's first occurrence, -1 if absent
    first_next: np.ndarray  # (N,) state after one step, K meaning absorbed
    length: np.ndarray      # (N,) realized total length
    llr: np.ndarray         # (N,) accumulated log-likelihood ratio


def batch_walks(chain, starts, rng, lengths=None, log_ratio=None,
                max_steps=100_000) -> WalkBatch:
    """Advance many absorbing walks in lockstep until all are absorbed.

    ``lengths`` is an optional (K, K+1) edge-length matrix (unit lengths
    otherwise); ``log_ratio`` an optional (K, K+1) table added up along the
    realized transitions (column K = absorbing step), for likelihood-ratio
    estimates between two chains.
    """
    m = np.asarray(chain.transitions, dtype=float)
    k = m.shape[0]
    cum = np.cumsum(m, axis=1)
    row_sums = cum[:, -1]
    if lengths is None:
        lengths = np.ones((k, k + 1))
    if log_ratio is None:
        log_ratio = np.zeros((k, k + 1))

    starts = np.asarray(starts, dtype=np.int64)
    n = starts.size
    state = starts.copy()
    hops = np.zeros(n, dtype=np.int64)
    first_pos = np.full((n, k), -1, dtype=np.int64)
    first_pos[np.arange(n), starts] = 0
    first_next = np.full(n, -1, dtype=np.int64)
    length = np.zeros(n)
    llr = np.zeros(n)
    active = np.arange(n)

    for step in range(1, max_steps + 1):
        u = rng.random(active.size)
        rows = cum[state[active]]
        nxt = (rows <= u[:, None]).sum(axis=1)
        absorbed = (nxt >= k) | (u >= row_sums[state[active]])
        outcome = np.where(absorbed, k, nxt)
        length[active] += lengths[state[active], outcome]
        llr[active] += log_ratio[state[active], outcome]
        hops[active] += 1
        if step == 1:
            first_next[active] = outcome
        moved = active[~absorbed]
        state[moved] = nxt[~absorbed]
        fresh = first_pos[moved, state[moved]] == -1
        first_pos[moved[fresh], state[moved[fresh]]] = hops[moved[fresh]]
        active = moved
        if active.size == 0:
            return WalkBatch(hops, first_pos, first_next, length, llr)
    raise RuntimeError(f"{active.size} walks still alive after {max_steps} steps")


def suffix_hops(batch: WalkBatch, node: int) -> np.ndarray:
    """Hop counts from ``node``'s first occurrence to absorption, covered walks only."""
    covered = batch.first_pos[:, node] >= 0
    return batch.hops[covered] - batch.first_pos[covered, node]


def log_ratio_table(chain_a, chain_b) -> np.ndarray:
    """(K, K+1) table of log(P_a(step) / P_b(step)) for every realizable step."""
    ma = np.asarray(chain_a.transitions, dtype=float)
    mb = np.asarray(chain_b.transitions, dtype=float)
    ext_a = np.column_stack([ma, 1.0 - ma.sum(axis=1)])
    ext_b = np.column_stack([mb, 1.0 - mb.sum(axis=1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.where(ext_a > 0, np.log(ext_a / ext_b), 0.0)
    return table


def clipped_normal_mean_quadrature(mean: float, std: float) -> float:
    """E[clip(X, 0, 1)] for X ~ Normal(mean, std), by numerical integration."""
    middle, _ = scipy.integrate.quad(
        lambda x: x * scipy.stats.norm.pdf(x, mean, std), 0.0, 1.0)
    return middle + scipy.stats.norm.sf(1.0, mean, std)


def hit_avoiding(chain, target: int, blocked: int) -> np.ndarray:
    """Pr(walk from each node reaches ``target`` before ``blocked`` and
    before absorbing), by the linear solve on the remaining nodes."""
    m = np.asarray(chain.transitions, dtype=float)
    k = m.shape[0]
    r = np.zeros(k)
    r[target] = 1.0
    others = [u for u in range(k) if u not in (target, blocked)]
    if others:
        sub = m[np.ix_(others, others)]
        r[others] = scipy.linalg.solve(np.eye(len(others)) - sub, m[others, target])
    return r


def pair_estimate_limit(chain, play: np.ndarray,
                        cover: np.ndarray) -> np.ndarray:
    """Exact limit of the ledger's pairwise cover estimate under i.i.d. play.

    The pair counter only fires when node i's first occurrence precedes
    node j's, so the (i, j) estimate converges not to the plain first-passage
    probability but to it scaled by Pr(i occurs with no earlier j) over
    Pr(i occurs at all):

        limit_ij = [play_i + sum_{u != i,j} play_u * hit_avoiding(u; i, j)]
                   * cover_ij / ptilde_i.

    ``cover`` is the (K, K) first-passage matrix with unit diagonal.
    """
    k = len(play)
    off = cover.copy()
    np.fill_diagonal(off, 0.0)
    ptilde = play + off.T @ play
    limit = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            eligible = play[i]
            reach = hit_avoiding(chain, i, j)
            for u in range(k):
                if u != i and u != j:
                    eligible += play[u] * reach[u]
            limit[i, j] = eligible * cover[i, j] / ptilde[i]
    return limit
