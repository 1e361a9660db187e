"""Hard-instance families and their exact constants."""

import math

import numpy as np
import pytest

from walkbandit.chain import expected_hitting_times, validate
from walkbandit.lowerbounds import (bernoulli_family, categorical_kl,
                                    family_gap, family_regret_bound,
                                    family_step_kl, minimax_eps, minimax_value,
                                    per_step_kl, regret_lower_bound,
                                    report_rows, trajectory_kl, two_node_gap,
                                    two_node_gap_closed, two_node_pair)

# ---------------------------------------------------------------------------
# the two-node pair
# ---------------------------------------------------------------------------


def test_pair_structure():
    pair = two_node_pair(0.05)
    assert pair.eps == 0.05
    np.testing.assert_allclose(pair.primary.transitions,
                               [[0.5, 0.125], [0.125, 0.55]], atol=0)
    np.testing.assert_allclose(pair.swapped.transitions,
                               [[0.55, 0.125], [0.125, 0.5]], atol=0)
    assert pair.primary.rho == pair.swapped.rho == 0.675
    assert validate(pair.primary).ok and validate(pair.swapped).ok


def test_pair_rejects_bad_eps():
    with pytest.raises(ValueError):
        two_node_pair(-0.01)
    with pytest.raises(ValueError):
        two_node_pair(0.26)
    two_node_pair(0.25)  # boundary is allowed: norm 0.875 < 1


def test_gap_matches_closed_form():
    for eps in (0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.25):
        assert two_node_gap(eps) == pytest.approx(two_node_gap_closed(eps),
                                                  abs=1e-9)
    assert two_node_gap(0.0) == pytest.approx(0.0, abs=1e-12)


def test_gap_is_where_the_boost_says():
    # node 1 carries the self-loop boost, so it is the longer (better) one
    mu = expected_hitting_times(two_node_pair(0.1).primary)
    assert mu[1] > mu[0]
    mu_swapped = expected_hitting_times(two_node_pair(0.1).swapped)
    assert mu_swapped[0] > mu_swapped[1]
    np.testing.assert_allclose(mu, mu_swapped[::-1], atol=1e-14)


def test_categorical_kl_basics():
    p = np.array([0.5, 0.5])
    assert categorical_kl(p, p) == 0.0
    q = np.array([0.25, 0.75])
    direct = 0.5 * math.log(0.5 / 0.25) + 0.5 * math.log(0.5 / 0.75)
    assert categorical_kl(p, q) == pytest.approx(direct, abs=1e-15)
    # 0 log 0 convention
    assert categorical_kl(np.array([1.0, 0.0]), q) == pytest.approx(
        math.log(1.0 / 0.25), abs=1e-15)


def test_per_step_kl_direct_arithmetic():
    eps = 0.01
    direct = (0.5 * math.log(0.5 / (0.5 + eps))
              + 0.375 * math.log(0.375 / (0.375 - eps)))
    assert per_step_kl(eps) == pytest.approx(direct, abs=1e-15)
    assert per_step_kl(0.0) == 0.0
    # the swap symmetry makes node 1 agree to leading order
    assert per_step_kl(eps, node=1) == pytest.approx(per_step_kl(eps, node=0),
                                                     rel=0.05)


def test_trajectory_kl_dominates_one_step():
    eps = 0.02
    d = trajectory_kl(eps)
    assert d.shape == (2,)
    assert (d >= per_step_kl(eps, 0) - 1e-15).all()
    # chains average 8/3 steps, so the whole-trajectory divergence sits
    # well above the per-step one
    assert d[0] > 2.0 * per_step_kl(eps, 0)


def test_regret_floor_shape():
    # eps* maximizes the floor's scaling: nearby gaps do worse at both ends
    horizon = 10**4
    star = minimax_eps(horizon)
    assert star == 0.0025
    assert minimax_value(horizon) == pytest.approx(24.502710615249416,
                                                   abs=1e-9)
    assert regret_lower_bound(star / 4, horizon) < minimax_value(horizon)
    assert regret_lower_bound(star * 8, horizon) < minimax_value(horizon)
    with pytest.raises(ValueError):
        minimax_eps(0)


def test_minimax_floor_grows_like_sqrt_t():
    values = [minimax_value(t) for t in (10**3, 10**4, 10**5)]
    ratios = [b / a for a, b in zip(values, values[1:])]
    for r in ratios:
        assert r == pytest.approx(math.sqrt(10.0), rel=1e-12)


# ---------------------------------------------------------------------------
# the K-node Bernoulli family
# ---------------------------------------------------------------------------


def test_family_construction():
    fam = bernoulli_family(4, 10**4)
    assert fam.p == 0.125
    np.testing.assert_allclose(fam.chain.transitions, np.full((4, 4), 0.125),
                               atol=0)
    assert validate(fam.chain).ok
    base = fam.means()
    assert np.array_equal(base, np.full((4, 5), 0.5))
    boosted = fam.means(2)
    assert boosted[2, -1] == pytest.approx(0.5 + fam.boost)
    boosted[2, -1] = 0.5
    assert np.array_equal(boosted, base)
    with pytest.raises(IndexError):
        fam.means(4)


def test_family_rejects_degenerate_setups():
    with pytest.raises(ValueError):
        bernoulli_family(1, 100)
    with pytest.raises(ValueError):
        bernoulli_family(4, 0)
    with pytest.raises(ValueError):
        bernoulli_family(4, 1)  # boosted mean would exceed 1


def test_family_gap_is_exactly_eps():
    fam = bernoulli_family(3, 5000)
    for k in range(3):
        assert family_gap(fam, k) == pytest.approx(fam.eps, abs=1e-12)


def test_family_step_kl_support_and_value():
    fam = bernoulli_family(4, 10**5)
    for node in (1, 2, 3):
        assert family_step_kl(fam, node, 0) == 0.0
    kl = family_step_kl(fam, 0, 0)
    b = fam.boost
    direct = 0.5 * (0.5 * math.log(0.5 / (0.5 + b))
                    + 0.5 * math.log(0.5 / (0.5 - b)))
    assert kl == pytest.approx(direct, abs=1e-18)
    # leading order: absorb_mass * 2 b^2 = 2 eps^2 / (1 - K p) = 4 eps^2
    assert kl / fam.eps ** 2 == pytest.approx(4.0, abs=2e-3)


def test_family_bound_value():
    assert family_regret_bound(4, 10**5) == pytest.approx(55.90169943749474,
                                                          abs=1e-12)
    assert family_regret_bound(16, 10**4) == pytest.approx(
        math.sqrt(16 * 10**4) / (8 * math.sqrt(2)), abs=1e-12)


def test_family_length_process_obeys_the_means():
    fam = bernoulli_family(3, 5000)
    proc = fam.length_process(1, seed=2)
    draws = np.stack([proc.epoch_lengths(t) for t in range(1, 2001)])
    emp = draws.mean(axis=0)
    target = fam.means(1)
    se = np.sqrt(target * (1 - target) / 2000)
    assert (np.abs(emp - target) < 4.0 * np.maximum(se, 1e-12)).all()


# ---------------------------------------------------------------------------
# report table
# ---------------------------------------------------------------------------


def test_report_rows():
    rows = report_rows([0.0, 1e-3, 1e-2], horizon=1000)
    assert len(rows) == 3
    assert list(rows[0].keys()) == ["eps", "gap_exact", "gap_leading",
                                    "step_kl_over_eps2", "traj_kl_over_eps2",
                                    "regret_floor"]
    assert rows[0]["step_kl_over_eps2"] == pytest.approx(7.0 / 3.0)
    assert rows[0]["traj_kl_over_eps2"] == pytest.approx(56.0 / 9.0)
    assert rows[0]["regret_floor"] == 0.0
    assert rows[2]["gap_exact"] == pytest.approx(two_node_gap(1e-2), abs=0)
    assert rows[1]["step_kl_over_eps2"] == pytest.approx(7.0 / 3.0, rel=0.05)
