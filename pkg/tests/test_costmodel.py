import math

import pytest

from bosim.core import InvalidConfigError
from bosim.costmodel import (
    CostEstimate,
    crossover_n,
    derangement_count,
    fig1_data,
    fig2_data,
    fig3_data,
    log_point_truncation_cost,
    matched_point_level,
    min_point_k,
    point_truncation_cost,
    rencontres_number,
    state_truncation_cost,
)
from bosim.bounds import point_truncation_error


def test_state_cost_reference_value():
    expected = 2 * 30 * 2**30 + 8100 * 30 * 29 / 2 + 8100 * 60
    assert state_truncation_cost(90, 8100, 30) == pytest.approx(expected)


def test_state_cost_no_truncation_term():
    assert state_truncation_cost(12, 144, 0) == pytest.approx(144 * 12)


def test_state_cost_monotone():
    # Monotone in k from k = 1 on; the 0 -> 1 step exchanges one O(m)
    # distinguishable draw for a constant-cost 1-photon permanent, so the
    # exact formula dips there whenever m > 4.
    for n, m in ((40, 1600), (90, 8100)):
        costs = [state_truncation_cost(n, m, k) for k in range(n + 1)]
        assert all(costs[i] <= costs[i + 1] for i in range(1, n))
        assert costs[1] == pytest.approx(costs[0] + 4 - m, rel=1e-12)
    costs_n = [state_truncation_cost(n, n * n, 10) for n in range(10, 60, 5)]
    assert all(costs_n[i] <= costs_n[i + 1] for i in range(len(costs_n) - 1))


def test_derangements():
    assert [derangement_count(i) for i in range(7)] == [1, 0, 1, 2, 9, 44, 265]


def test_rencontres_identity():
    # Permutations partitioned by fixed-point count must total n!.
    for n in range(1, 13):
        assert sum(rencontres_number(n, j) for j in range(n + 1)) == math.factorial(n)


def test_point_cost_k0_guarded():
    n = 90
    assert point_truncation_cost(n, 0) == pytest.approx(100 * n**4 * math.log(n))


def test_point_cost_unguarded_degenerate_levels_vanish():
    assert point_truncation_cost(90, 0, guard_degenerate=False) == 0.0
    assert point_truncation_cost(90, 1, guard_degenerate=False) == 0.0
    assert point_truncation_cost(90, 2, guard_degenerate=False) > 0.0


def test_point_cost_single_level_matches_direct():
    # i = 2 term: C(n,2)^2 · D_2 · 2·2^2 · (n-2)^4 ln(n-2), times the MIS factor.
    n = 30
    direct = 100 * math.comb(n, 2) ** 2 * 1 * 2 * 4 * (n - 2) ** 4 * math.log(n - 2)
    assert point_truncation_cost(n, 2, guard_degenerate=False) == pytest.approx(direct)


def test_point_cost_mis_factor_knob():
    base = point_truncation_cost(40, 3)
    assert point_truncation_cost(40, 3, mis_factor=200) == pytest.approx(2 * base)


def test_point_cost_monotone_in_n():
    values = [point_truncation_cost(n, 4) for n in range(10, 80, 10)]
    assert all(values[i] <= values[i + 1] for i in range(len(values) - 1))


def test_min_point_k_consistency():
    for n, x, eta, eps in ((60, 0.5, 0.5, 0.1), (90, 0.9, 1.0, 0.05)):
        k = min_point_k(n, x, eta, eps)
        assert point_truncation_error(n, k, x, eta) <= eps
        if k > 0:
            assert point_truncation_error(n, k - 1, x, eta) > eps


def test_crossover_noiseless_sentinel():
    assert crossover_n(1.0, 1.0, 0.1, range(2, 60)) is None


def test_crossover_in_limited_range_sentinel():
    assert crossover_n(0.5, 0.5, 0.1, range(2, 50)) is None


def test_fig1_closed_form_column():
    rows = fig1_data(range(5, 30, 5), 0.1)
    for row in rows:
        assert 0.0 <= row["state_max_x"] <= 1.0
        assert 0.0 <= row["point_max_x"] <= 1.0
        assert 0.0 <= row["point_max_eta"] <= 1.0
        if row["k_rule"] == "n-1":
            assert row["state_max_x"] == pytest.approx(0.1 ** (1 / row["n"]), abs=1e-8)


def test_fig1_half_truncation_approaches_half():
    # With k = n/2 the state bound needs k >= n·eta·x, so the invertible
    # noise tends to a value just below 1/2 for large n.
    rows = fig1_data(range(100, 101), 0.1)
    half = next(r for r in rows if r["k_rule"] == "n/2")
    assert 0.40 <= half["state_max_x"] < 0.5


def test_fig2_shapes_and_monotone_cost():
    rows = fig2_data(range(10, 40, 5), 0.1)
    assert len(rows) == 2 * 6
    for x, eta in ((0.5, 0.5), (0.976, 0.755)):
        subset = [r for r in rows if r["x"] == x and r["eta"] == eta]
        logs = [r["log10_state_ops"] for r in subset]
        assert all(logs[i] <= logs[i + 1] + 1e-12 for i in range(len(logs) - 1))


def test_fig3_matched_level_starts_at_two():
    # With the literal cost the i <= 1 levels are free, so any positive
    # state budget is first exceeded at level 2.
    rows = fig3_data(90, range(1, 10), 0.1)
    assert all(r["k_matched"] >= 2 for r in rows)


def test_matched_point_level_exceeds_budget():
    budget = math.log(1e12)
    k = matched_point_level(90, budget)
    assert log_point_truncation_cost(90, k, guard_degenerate=False) > budget
    assert log_point_truncation_cost(90, k - 1, guard_degenerate=False) <= budget


def test_cost_estimate_validation():
    CostEstimate(1.5, "state", {"n": 3})
    with pytest.raises(InvalidConfigError):
        CostEstimate(-1.0, "state")


def test_point_cost_k_guard():
    with pytest.raises(InvalidConfigError):
        point_truncation_cost(5, 6)
