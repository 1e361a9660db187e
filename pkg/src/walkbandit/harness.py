"""Seeded experiment runs, exact regret accounting, and curve aggregation.

Regret is always charged against *expected* hitting lengths computed by the
dense solver -- realized walk lengths are logged but never enter the regret
column.  Stochastic runs charge ``mu_best - mu_played`` per epoch with mu
from the length process's mean matrix; adversarial runs solve for the
per-epoch expected lengths l_t (one LU factorization of I - M, reused every
epoch) and charge the gap to the best fixed node in hindsight.

Every run is a pure function of (instance, process, horizon, seed): the
walk stream, the policy's own stream and the length process's per-epoch
streams are split off the seed by counters, so records -- and the CSVs
written from them -- are bit-identical across repetitions.
"""

from __future__ import annotations

import csv
import functools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .chain import ChainInstance, expected_hitting_times, require_valid
from .exp3 import Exp3Params, StandardExp3, TrajectoryExp3
from .instances import nine_node_ring, ring_length_process
from .simulate import LengthProcess, rng_at, sample_trajectory, trajectory_length
from .ucb import TrajectoryUcb


@dataclass
class RunRecord:
    """Per-epoch log of one seeded run plus its configuration."""

    seed: int
    params: dict
    played: np.ndarray                    # (T,) node played each epoch
    realized: np.ndarray                  # (T,) realized walk length
    regret: np.ndarray                    # (T,) cumulative expected regret
    est_error: np.ndarray | None = None   # (T,) max_v |raw mean - mu_v|
    expected_lengths: np.ndarray | None = None  # (T, K) exact l_t (adversarial)
    probs: np.ndarray | None = None       # (T, K) play distributions (exp3)
    estimates: np.ndarray | None = None   # (T, K) score estimates (exp3)
    indices: np.ndarray | None = None     # (T, K) optimistic indices (ucb)
    means: np.ndarray | None = None       # (T, K) raw sample means (ucb)
    wall_time: float = 0.0

    @property
    def horizon(self) -> int:
        return len(self.played)


class UniformPolicy:
    """Plays uniformly at random; the no-learning reference."""

    def __init__(self, n_nodes: int, rng: np.random.Generator):
        self.n_nodes = n_nodes
        self.rng = rng

    def select(self) -> int:
        return int(self.rng.integers(self.n_nodes))

    def observe(self, traj) -> None:
        pass


class FixedPolicy:
    """Always plays one node."""

    def __init__(self, node: int):
        self.node = node

    def select(self) -> int:
        return self.node

    def observe(self, traj) -> None:
        pass


def run_stochastic(chain: ChainInstance, process: LengthProcess, horizon: int,
                   seed: int, policy, track_error: bool = False,
                   log_vectors: bool = False) -> RunRecord:
    """Drive ``policy`` for ``horizon`` epochs under stationary length laws.

    The per-epoch regret increment is mu_best - mu_played with mu solved
    from the process's mean-length matrix.  ``track_error`` additionally
    logs max_v |raw mean - mu_v| after each epoch for policies that expose
    raw sample means.
    """
    require_valid(chain)
    mean_lengths = process.mean_lengths()
    if mean_lengths is None:
        raise ValueError("stochastic accounting needs a length process with a mean matrix")
    mu = expected_hitting_times(chain, mean_lengths)
    gaps = float(mu.max()) - mu

    walk_rng = rng_at(seed, 0)
    k = chain.n_nodes
    played = np.zeros(horizon, dtype=np.int64)
    realized = np.zeros(horizon)
    regret = np.zeros(horizon)
    err = np.zeros(horizon) if track_error else None
    indices = np.zeros((horizon, k)) if log_vectors else None
    means = np.zeros((horizon, k)) if log_vectors else None

    start = time.perf_counter()
    total = 0.0
    for t in range(1, horizon + 1):
        j = policy.select()
        traj = sample_trajectory(chain, process.epoch_lengths(t), j, walk_rng, epoch=t)
        policy.observe(traj)
        total += gaps[j]
        played[t - 1] = j
        realized[t - 1] = trajectory_length(traj)
        regret[t - 1] = total
        if err is not None:
            err[t - 1] = float(np.max(np.abs(policy.raw_means() - mu)))
        if log_vectors:
            indices[t - 1] = getattr(policy, "last_indices", np.zeros(k))
            means[t - 1] = policy.raw_means()
    return RunRecord(seed=seed, params={"mode": "stochastic", "horizon": horizon},
                     played=played, realized=realized, regret=regret, est_error=err,
                     indices=indices, means=means,
                     wall_time=time.perf_counter() - start)


def recompute_stochastic_regret(record: RunRecord, chain: ChainInstance,
                                process: LengthProcess) -> np.ndarray:
    """Rebuild the cumulative regret from the played sequence; must match
    the logged column bit for bit (same solver, same accumulation order)."""
    mu = expected_hitting_times(chain, process.mean_lengths())
    gaps = float(mu.max()) - mu
    out = np.zeros(record.horizon)
    total = 0.0
    for t, j in enumerate(record.played):
        total += gaps[j]
        out[t] = total
    return out


def epoch_expected_lengths(chain: ChainInstance, lengths: np.ndarray,
                           lu=None) -> np.ndarray:
    """Exact expected walk lengths l_t for one epoch's length matrix.

    Solves (I - M) l = c_t with c_t assembled from the epoch's lengths;
    pass a prefactorized ``lu`` (from ``scipy.linalg.lu_factor(I - M)``) to
    reuse it across epochs.
    """
    m = chain.transitions
    c = (m * lengths[:, :-1]).sum(axis=1) + chain.absorb_probs * lengths[:, -1]
    if lu is None:
        return scipy.linalg.solve(np.eye(chain.n_nodes) - m, c)
    return scipy.linalg.lu_solve(lu, c)


def best_fixed_regret(expected_lengths: np.ndarray, played: np.ndarray) -> np.ndarray:
    """Cumulative regret against the best fixed node in hindsight at each epoch."""
    cum_fixed = np.cumsum(expected_lengths, axis=0)
    idx = np.arange(len(played))
    cum_played = np.cumsum(expected_lengths[idx, played])
    return cum_fixed.max(axis=1) - cum_played


def run_adversarial(chain: ChainInstance, process: LengthProcess, horizon: int,
                    seed: int, policy, log_vectors: bool = False) -> RunRecord:
    """Drive ``policy`` against an oblivious per-epoch length schedule.

    Logs the exact expected lengths of every node at every epoch and the
    cumulative regret against the best fixed node in hindsight.
    """
    require_valid(chain)
    walk_rng = rng_at(seed, 0)
    k = chain.n_nodes
    lu = scipy.linalg.lu_factor(np.eye(k) - chain.transitions)

    played = np.zeros(horizon, dtype=np.int64)
    realized = np.zeros(horizon)
    expected = np.zeros((horizon, k))
    probs = np.zeros((horizon, k)) if log_vectors else None
    estimates = np.zeros((horizon, k)) if log_vectors else None

    start = time.perf_counter()
    for t in range(1, horizon + 1):
        lengths = process.epoch_lengths(t)
        expected[t - 1] = epoch_expected_lengths(chain, lengths, lu)
        j = policy.select()
        traj = sample_trajectory(chain, lengths, j, walk_rng, epoch=t)
        policy.observe(traj)
        played[t - 1] = j
        realized[t - 1] = trajectory_length(traj)
        if log_vectors:
            probs[t - 1] = getattr(policy, "last_probs", np.zeros(k))
            estimates[t - 1] = getattr(policy, "last_estimate", np.zeros(k))
    regret = best_fixed_regret(expected, played)
    return RunRecord(seed=seed, params={"mode": "adversarial", "horizon": horizon},
                     played=played, realized=realized, regret=regret,
                     expected_lengths=expected, probs=probs, estimates=estimates,
                     wall_time=time.perf_counter() - start)


def regret_vs_fixed(record: RunRecord) -> np.ndarray:
    """(T, K) cumulative regret against every fixed node, from the logged lengths."""
    if record.expected_lengths is None:
        raise ValueError("record has no per-epoch expected lengths")
    cum_fixed = np.cumsum(record.expected_lengths, axis=0)
    idx = np.arange(record.horizon)
    cum_played = np.cumsum(record.expected_lengths[idx, record.played])
    return cum_fixed - cum_played[:, None]


# ---------------------------------------------------------------------------
# seed fan-out and aggregation
# ---------------------------------------------------------------------------

def map_seeds(run_one, seeds, n_jobs: int = 1) -> list:
    """Run one seeded job per seed, optionally across processes.

    ``run_one`` must be picklable (a module-level function or a
    ``functools.partial`` of one) when n_jobs > 1.  Results come back in
    seed order either way.
    """
    seeds = list(seeds)
    if n_jobs <= 1:
        return [run_one(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(run_one, seeds))


def mean_std(curves: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and sample standard deviation (ddof=1) across runs.

    A single run has no spread estimate; its band is zero rather than NaN
    so downstream CSVs and plots stay finite.
    """
    stacked = np.vstack(curves)
    if stacked.shape[0] < 2:
        return stacked.mean(axis=0), np.zeros(stacked.shape[1])
    return stacked.mean(axis=0), stacked.std(axis=0, ddof=1)


# ---------------------------------------------------------------------------
# named reproduction runs
# ---------------------------------------------------------------------------

def _stochastic_ring_run(seed: int, horizon: int, width: str) -> RunRecord:
    chain = nine_node_ring()
    process = ring_length_process(seed)
    policy = TrajectoryUcb(chain.n_nodes, chain.rho, width=width)
    return run_stochastic(chain, process, horizon, seed, policy, track_error=True)


def stochastic_learning_curves(seeds=range(10), horizon: int = 20000,
                               width: str = "scaled", n_jobs: int = 1) -> dict:
    """Trajectory-UCB on the nine-node ring: regret and estimation-error curves.

    Returns mean and one-standard-deviation bands (across seeds) for the
    cumulative regret and for max_v |raw mean - mu_v|, per epoch.
    """
    records = map_seeds(functools.partial(_stochastic_ring_run, horizon=horizon,
                                          width=width), seeds, n_jobs)
    reg_mean, reg_std = mean_std([r.regret for r in records])
    err_mean, err_std = mean_std([r.est_error for r in records])
    return {
        "t": np.arange(1, horizon + 1),
        "regret_mean": reg_mean, "regret_std": reg_std,
        "error_mean": err_mean, "error_std": err_std,
        "records": records,
    }


def _adversarial_ring_run(seed: int, horizon: int, learning_rate: float,
                          algorithm: str) -> RunRecord:
    chain = nine_node_ring()
    process = ring_length_process(seed)
    rng = rng_at(seed, 1)
    if algorithm == "traj":
        params = Exp3Params(cap=1, learning_rate=learning_rate,
                            exploration_bias=0.0, fail_prob=1.0 / horizon)
        policy = TrajectoryExp3(chain.n_nodes, params, rng, variant="ratio")
    elif algorithm == "standard":
        policy = StandardExp3(chain.n_nodes, learning_rate, rng)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return run_adversarial(chain, process, horizon, seed, policy)


def adversarial_comparison(seeds=range(10), horizon: int = 30000,
                           learning_rate: float = 0.001, n_jobs: int = 1) -> dict:
    """Coverage-corrected EXP3 vs the single-arm baseline on the ring.

    Both algorithms run with the same fixed learning rate on the same
    seeded length schedules; curves are cumulative regret against the best
    fixed node, averaged across seeds with one-standard-deviation bands.
    The default horizon is long enough for the coverage-corrected variant
    to converge while the baseline is still paying for exploration.
    """
    traj_records = map_seeds(
        functools.partial(_adversarial_ring_run, horizon=horizon,
                          learning_rate=learning_rate, algorithm="traj"),
        seeds, n_jobs)
    std_records = map_seeds(
        functools.partial(_adversarial_ring_run, horizon=horizon,
                          learning_rate=learning_rate, algorithm="standard"),
        seeds, n_jobs)
    traj_mean, traj_std = mean_std([r.regret for r in traj_records])
    base_mean, base_std = mean_std([r.regret for r in std_records])
    return {
        "t": np.arange(1, horizon + 1),
        "traj_exp3_mean": traj_mean, "traj_exp3_std": traj_std,
        "exp3_mean": base_mean, "exp3_std": base_std,
        "traj_records": traj_records, "standard_records": std_records,
    }


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    """Shortest exact decimal for a float (round-trips bit for bit)."""
    return repr(float(x))


def write_curves_csv(path: str | Path, columns: dict[str, np.ndarray],
                     skip: tuple = ("records", "traj_records", "standard_records")) -> None:
    """Write aligned per-epoch columns; the 't' column is emitted as integers."""
    names = [k for k in columns if k not in skip]
    arrays = [columns[k] for k in names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in zip(*arrays):
            writer.writerow([str(int(v)) if name == "t" else _fmt(v)
                             for name, v in zip(names, row)])


def write_run_csv(record: RunRecord, path: str | Path) -> None:
    """Per-epoch log of one run; vector columns appear when they were logged."""
    header = ["t", "played", "realized_length", "regret"]
    if record.est_error is not None:
        header.append("est_error")
    for name, arr in (("index", record.indices), ("mean", record.means),
                      ("p", record.probs), ("zhat", record.estimates)):
        if arr is not None:
            header += [f"{name}_{j}" for j in range(arr.shape[1])]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(record.horizon):
            row = [str(i + 1), str(int(record.played[i])),
                   _fmt(record.realized[i]), _fmt(record.regret[i])]
            if record.est_error is not None:
                row.append(_fmt(record.est_error[i]))
            for arr in (record.indices, record.means, record.probs, record.estimates):
                if arr is not None:
                    row += [_fmt(v) for v in arr[i]]
            writer.writerow(row)


def write_trajectory_log(rows: list, path: str | Path) -> None:
    """Optional walk-level log: epoch, played node, hops, length, node sequence."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "played", "hops", "length", "nodes"])
        for traj in rows:
            writer.writerow([traj.epoch, traj.played, traj.hops,
                             _fmt(trajectory_length(traj)),
                             ";".join(str(n) for n in traj.nodes)])
