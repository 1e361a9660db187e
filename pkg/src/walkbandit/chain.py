"""Absorbing Markov chains over a finite set of transient nodes.

A chain is given by a substochastic transition matrix M (K x K) among the
transient nodes; the leftover mass of row i, ``1 - sum_j M[i, j]``, is the
probability of absorption from node i.  Every quantity the bandit algorithms
need -- expected hitting times, first-passage probabilities, hitting
centralities, the effective arm count, walk-length tail bounds -- is computed
here by exact linear algebra, never by simulation.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg


class ChainValidationError(ValueError):
    """Raised when an instance fails validation but was required to pass."""


class LengthRangeError(ValueError):
    """Raised when an edge-length matrix has entries outside [0, 1]."""


@dataclass(frozen=True)
class ChainInstance:
    """An absorbing chain: substochastic transitions plus a declared norm bound.

    Parameters
    ----------
    transitions : (K, K) array
        ``transitions[i, j]`` is the probability of stepping from transient
        node i to transient node j.  Row i's missing mass is the absorbing
        probability from i.
    rho : float
        Declared bound on the infinity norm of ``transitions``; algorithms
        use it for truncation levels and tail bounds.  Must satisfy
        ``inf_norm <= rho < 1`` for the instance to validate.
    allow_nonprimitive : bool
        Permit instances whose transition pattern is not primitive (e.g. a
        disconnected pair of nodes, or a single node with no self loop).
    """

    transitions: np.ndarray
    rho: float
    allow_nonprimitive: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        m = np.array(self.transitions, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ChainValidationError(f"transition matrix must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "transitions", m)
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def n_nodes(self) -> int:
        return self.transitions.shape[0]

    @property
    def inf_norm(self) -> float:
        """Largest row sum of the transition matrix."""
        return float(np.max(self.transitions.sum(axis=1)))

    @property
    def absorb_probs(self) -> np.ndarray:
        """Per-node absorbing probability, ``1 - row sum``."""
        return 1.0 - self.transitions.sum(axis=1)

    @classmethod
    def validated(cls, transitions, rho: float, allow_nonprimitive: bool = False,
                  name: str = "") -> "ChainInstance":
        """Build an instance and raise ``ChainValidationError`` unless it passes."""
        inst = cls(np.asarray(transitions, dtype=float), rho,
                   allow_nonprimitive=allow_nonprimitive, name=name)
        report = validate(inst)
        if not report.ok:
            raise ChainValidationError("; ".join(report.failures))
        return inst

    # -- serialization ------------------------------------------------------

    def to_text(self, fixed_lengths: np.ndarray | None = None) -> str:
        """Serialize to a JSON document that round-trips floats exactly."""
        doc: dict = {
            "n_nodes": self.n_nodes,
            "rho": self.rho,
            "transitions": [float(x) for x in self.transitions.ravel(order="C")],
        }
        if self.allow_nonprimitive:
            doc["allow_nonprimitive"] = True
        if self.name:
            doc["name"] = self.name
        if fixed_lengths is not None:
            fl = np.asarray(fixed_lengths, dtype=float)
            doc["fixed_lengths"] = [float(x) for x in fl.ravel(order="C")]
        return json.dumps(doc, indent=2)

    @classmethod
    def from_text(cls, text: str) -> tuple["ChainInstance", np.ndarray | None]:
        """Inverse of :meth:`to_text`.  Returns (instance, fixed_lengths or None)."""
        doc = json.loads(text)
        k = int(doc["n_nodes"])
        m = np.array(doc["transitions"], dtype=float).reshape(k, k)
        inst = cls(m, float(doc["rho"]),
                   allow_nonprimitive=bool(doc.get("allow_nonprimitive", False)),
                   name=str(doc.get("name", "")))
        lengths = None
        if "fixed_lengths" in doc:
            lengths = np.array(doc["fixed_lengths"], dtype=float).reshape(k, k + 1)
        return inst, lengths

    def save(self, path: str | Path, fixed_lengths: np.ndarray | None = None) -> None:
        Path(path).write_text(self.to_text(fixed_lengths))

    @classmethod
    def load(cls, path: str | Path) -> tuple["ChainInstance", np.ndarray | None]:
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: per-check flags plus the measured norm."""

    ok: bool
    nonnegative: bool
    norm_ok: bool
    primitive: bool
    primitivity_checked: bool
    inf_norm: float
    failures: tuple[str, ...] = field(default=())

    def summary(self) -> str:
        lines = [
            f"nodes            : ok",
            f"nonnegative      : {'ok' if self.nonnegative else 'FAIL'}",
            f"inf norm         : {self.inf_norm!r} "
            f"({'ok' if self.norm_ok else 'FAIL'})",
        ]
        if self.primitivity_checked:
            lines.append(f"primitive        : {'ok' if self.primitive else 'FAIL'}")
        else:
            lines.append("primitive        : skipped (allow_nonprimitive)")
        lines.append(f"verdict          : {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines)


def _is_primitive(pattern: np.ndarray) -> bool:
    """Exact primitivity test via boolean matrix powers.

    A nonnegative square matrix A is primitive iff some power A^m is
    entrywise positive, and for a primitive K x K matrix the exponent
    m <= (K-1)^2 + 1 <= K^2 suffices, so checking powers up to K^2 is exact.
    """
    k = pattern.shape[0]
    a = pattern > 0
    power = a.copy()
    for _ in range(k * k):
        if power.all():
            return True
        power = (power @ a) > 0
    return bool(power.all())


def validate(chain: ChainInstance) -> ValidationReport:
    """Check nonnegativity, the declared norm bound, and primitivity.

    Never raises: the report carries the failures.  Entry points that
    require a valid instance call this and raise ``ChainValidationError``
    on a failed report.
    """
    m = chain.transitions
    failures: list[str] = []

    nonnegative = bool((m >= 0.0).all())
    if not nonnegative:
        failures.append("transition matrix has negative entries")

    norm = float(np.max(m.sum(axis=1))) if nonnegative else float("nan")
    norm_ok = nonnegative and norm <= chain.rho and chain.rho < 1.0
    if nonnegative and not norm_ok:
        failures.append(
            f"need inf_norm <= rho < 1, got inf_norm={norm!r}, rho={chain.rho!r}")

    primitive = True
    checked = not chain.allow_nonprimitive
    if checked and nonnegative:
        primitive = _is_primitive(m)
        if not primitive:
            failures.append("transition pattern is not primitive")

    ok = nonnegative and norm_ok and (primitive or not checked)
    return ValidationReport(ok=ok, nonnegative=nonnegative, norm_ok=norm_ok,
                            primitive=primitive, primitivity_checked=checked,
                            inf_norm=norm, failures=tuple(failures))


def require_valid(chain: ChainInstance) -> None:
    """Raise ``ChainValidationError`` unless ``chain`` validates."""
    report = validate(chain)
    if not report.ok:
        raise ChainValidationError("; ".join(report.failures))


# ---------------------------------------------------------------------------
# exact chain analytics
# ---------------------------------------------------------------------------

def as_length_matrix(chain: ChainInstance, lengths: np.ndarray | None) -> np.ndarray:
    """Coerce ``lengths`` to a (K, K+1) array in [0, 1]; ``None`` means unit lengths.

    Column K holds the lengths of the edges into the absorbing node.
    """
    k = chain.n_nodes
    if lengths is None:
        return np.ones((k, k + 1))
    arr = np.asarray(lengths, dtype=float)
    if arr.shape != (k, k + 1):
        raise LengthRangeError(f"length matrix must have shape {(k, k + 1)}, got {arr.shape}")
    if not ((arr >= 0.0) & (arr <= 1.0)).all():
        raise LengthRangeError("edge lengths must lie in [0, 1]")
    return arr


def expected_hitting_times(chain: ChainInstance, lengths: np.ndarray | None = None) -> np.ndarray:
    """Expected total walk length from each node, by a dense linear solve.

    With per-step cost c_i = sum_j M[i, j] * l[i, j] + (1 - sum_j M[i, j]) * l[i, *],
    the expected lengths mu solve

        (I - M) mu = c.

    With unit lengths c = 1 and mu is the expected number of steps before
    absorption.  ``lengths`` is a (K, K+1) matrix whose last column holds the
    absorbing-edge lengths; ``None`` means all lengths are 1.
    """
    m = chain.transitions
    l = as_length_matrix(chain, lengths)
    c = (m * l[:, :-1]).sum(axis=1) + chain.absorb_probs * l[:, -1]
    return scipy.linalg.solve(np.eye(chain.n_nodes) - m, c)


def first_passage_probs(chain: ChainInstance, target: int) -> np.ndarray:
    """Probability that a walk from each node ever visits ``target``.

    r[target] = 1, and for u != target the no-revisit decomposition gives

        r_u = M[u, target] + sum_{j != target} M[u, j] * r_j,

    a dense (K-1)-dimensional system solved with LU.  Unreachable nodes get
    exactly 0 through the linear algebra (up to roundoff).
    """
    k = chain.n_nodes
    if not 0 <= target < k:
        raise IndexError(f"target node {target} out of range for {k} nodes")
    r = np.ones(k)
    if k == 1:
        return r
    others = [u for u in range(k) if u != target]
    sub = chain.transitions[np.ix_(others, others)]
    rhs = chain.transitions[others, target]
    r[others] = scipy.linalg.solve(np.eye(k - 1) - sub, rhs)
    return r


def cover_probs(chain: ChainInstance) -> np.ndarray:
    """Matrix Q with Q[u, v] = probability a walk started at u ever visits v.

    Diagonal is 1 (the start node is always covered).
    """
    k = chain.n_nodes
    q = np.empty((k, k))
    for v in range(k):
        q[:, v] = first_passage_probs(chain, v)
    return q


@dataclass(frozen=True)
class Centrality:
    """Per-node hitting centrality and its minimum over the chain.

    ``values[v] = min over u != v of Pr(walk from u visits v)``.  For a
    single-node chain the centrality is 1 by convention (``single_node``).
    """

    values: np.ndarray
    minimum: float
    single_node: bool = False


def hitting_centrality(chain: ChainInstance) -> Centrality:
    """Worst-case first-passage probability into each node."""
    k = chain.n_nodes
    if k == 1:
        return Centrality(values=np.ones(1), minimum=1.0, single_node=True)
    values = np.empty(k)
    for v in range(k):
        r = first_passage_probs(chain, v)
        values[v] = np.min(np.delete(r, v))
    return Centrality(values=values, minimum=float(values.min()))


def exploration_cost(x: float) -> float:
    """Extra exploration charged for a node of hitting centrality x.

    f(x) = (1 - sqrt(x)) / (1 + sqrt(x)), strictly decreasing on [0, 1] with
    f(0) = 1 (the node is never observed for free) and f(1) = 0 (every
    trajectory observes it).
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"centrality must lie in [0, 1], got {x!r}")
    s = math.sqrt(x)
    return (1.0 - s) / (1.0 + s)


def effective_arm_count_from_centralities(values) -> float:
    """kappa = 1 + sum_j f(alpha_j), between 1 and 1 + K."""
    return 1.0 + sum(exploration_cost(float(a)) for a in np.asarray(values, dtype=float))


def effective_arm_count(chain: ChainInstance) -> float:
    """Effective number of arms the chain presents to a trajectory learner.

    Well-connected chains (all centralities near 1) cost about 1 arm;
    disconnected ones cost the full 1 + K.
    """
    return effective_arm_count_from_centralities(hitting_centrality(chain).values)


def walk_tail_bound(rho: float, cap: int) -> float:
    """Upper bound rho^cap / (1 - rho) on Pr(walk takes more than ``cap`` steps)."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    if cap < 0:
        raise ValueError(f"cap must be nonnegative, got {cap}")
    return rho ** cap / (1.0 - rho)


def choose_cap(n_nodes: int, horizon: int, rho: float, fail_prob: float) -> int:
    """Smallest step cap B with K * T * rho^B / (1 - rho) <= fail_prob.

    B = ceil( ln( K*T / ((1-rho) * fail_prob) ) / ln(1/rho) ), floored at 1.
    """
    if n_nodes < 1 or horizon < 1:
        raise ValueError("n_nodes and horizon must be positive")
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    if not 0.0 < fail_prob < 1.0:
        raise ValueError(f"fail_prob must lie in (0, 1), got {fail_prob!r}")
    raw = math.log(n_nodes * horizon / ((1.0 - rho) * fail_prob)) / math.log(1.0 / rho)
    cap = max(1, math.ceil(raw))
    # Guard against ceil landing exactly on the boundary through roundoff.
    while n_nodes * horizon * walk_tail_bound(rho, cap) > fail_prob:
        cap += 1
    return cap
