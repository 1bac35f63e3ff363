"""Capacity allocation: exactness against the LP oracle, feasibility laws."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcrew import (
    AllocationProblem,
    ValidationError,
    select_iteration_nodes,
    solve_allocation,
)
from oracles import allocation_lp_vertex_max

from conftest import TABLE_ROWS


def problem(node_rows, crew_rows, alpha1=1.0, beta1=1.0):
    """node_rows: (id, P, T, q); crew_rows: (id, Q)."""
    return AllocationProblem(
        node_ids=[r[0] for r in node_rows],
        power_kw=np.array([r[1] for r in node_rows]),
        repair_hours=np.array([r[2] for r in node_rows]),
        demand=np.array([r[3] for r in node_rows]),
        crew_ids=[r[0] for r in crew_rows],
        capacity=np.array([r[1] for r in crew_rows]),
        alpha1=alpha1,
        beta1=beta1,
    ).validate()


def oracle_value(p):
    return allocation_lp_vertex_max(p.per_unit_scores(), p.demand, p.capacity)


class TestSolveAllocation:
    def test_single_node_slack_capacity(self):
        p = problem([("a", 100.0, 1.0, 5.0)], [("c0", 10.0)])
        sol = solve_allocation(p)
        assert sol.y[("a", "c0")] == 5.0
        assert sol.selected == ["a"]
        assert sol.constraint_violations(p) == []

    def test_reference_table_capacity_15(self):
        p = problem(TABLE_ROWS, [("c0", 15.0)])
        sol = solve_allocation(p)
        assert sol.selected == ["8433", "36856", "51201"]
        assert sol.y[("36856", "c0")] == 4.0
        assert sol.y[("8433", "c0")] == 4.0
        assert sol.y[("51201", "c0")] == 7.0  # shorted: lowest score of the three
        assert sol.y[("37215", "c0")] == 0.0
        assert sol.y[("23214", "c0")] == 0.0
        assert sol.objective_value == pytest.approx(oracle_value(p), rel=1e-7)

    def test_two_crews_ladder_against_oracle(self):
        p = problem(
            [("a", 50.0, 1.0, 4.0), ("b", 30.0, 2.0, 4.0)],
            [("t0", 2.0), ("c0", 6.0)],  # first crew holds half of one demand
        )
        sol = solve_allocation(p)
        assert sol.constraint_violations(p) == []
        assert sol.objective_value == pytest.approx(oracle_value(p), rel=1e-7)
        # ladder between the crews
        for node in ("a", "b"):
            assert sol.y[(node, "t0")] <= sol.y[(node, "c0")] + 1e-9

    def test_negative_score_nodes_get_nothing(self):
        p = problem(
            [("good", 100.0, 1.0, 2.0), ("bad", 1.0, 50.0, 2.0)],
            [("c0", 10.0)],
        )
        sol = solve_allocation(p)
        assert sol.y[("bad", "c0")] == 0.0
        assert sol.selected == ["good"]

    def test_force_progress_allocates_negative_scores(self):
        p = problem([("bad", 1.0, 50.0, 2.0)], [("c0", 10.0)])
        assert solve_allocation(p).selected == []
        forced = solve_allocation(p, force_progress=True)
        assert forced.selected == ["bad"]
        assert forced.y[("bad", "c0")] == 2.0
        assert forced.constraint_violations(p) == []

    def test_empty_problem(self):
        p = problem([], [("c0", 5.0)])
        sol = solve_allocation(p)
        assert sol.selected == []
        assert sol.objective_value == 0.0

    def test_scale_invariance_of_support(self):
        rows = [("a", 9.0, 2.0, 3.0), ("b", 70.0, 8.0, 5.0), ("c", 22.0, 1.0, 2.0)]
        scaled = [(n, p * 37.5, t * 37.5, q) for n, p, t, q in rows]
        base = solve_allocation(problem(rows, [("c0", 6.0)]))
        big = solve_allocation(problem(scaled, [("c0", 6.0)]))
        assert base.selected == big.selected

    def test_validation_rejects_zero_demand(self):
        with pytest.raises(ValidationError, match="positive"):
            problem([("a", 1.0, 1.0, 0.0)], [("c0", 5.0)])

    def test_validation_rejects_negative_weight(self):
        with pytest.raises(ValidationError, match="nonnegative"):
            problem([("a", 1.0, 1.0, 1.0)], [("c0", 5.0)], alpha1=-1.0)


class TestSelectIterationNodes:
    def test_all_zero_allocation_gives_empty_list(self):
        p = problem([("bad", 0.0, 10.0, 2.0)], [("c0", 5.0)])
        assert select_iteration_nodes(solve_allocation(p)) == []

    def test_reference_table_selection(self):
        p = problem(TABLE_ROWS, [("c0", 15.0)])
        picks = select_iteration_nodes(solve_allocation(p))
        assert [node for node, _ in picks] == ["8433", "36856", "51201"]
        assert dict(picks)["51201"] == {"c0": 7.0}

    def test_per_crew_quantities_are_positive(self):
        p = problem(
            [("a", 50.0, 1.0, 4.0), ("b", 30.0, 2.0, 4.0)],
            [("t0", 2.0), ("c0", 6.0)],
        )
        for _, amounts in select_iteration_nodes(solve_allocation(p)):
            assert amounts
            assert all(q > 0.0 for q in amounts.values())


node_strategy = st.tuples(
    st.floats(min_value=0.0, max_value=1000.0),
    st.floats(min_value=0.0, max_value=100.0),
    st.floats(min_value=0.5, max_value=10.0),
)


@settings(max_examples=60, deadline=None)
@given(
    nodes=st.lists(node_strategy, min_size=1, max_size=4),
    caps=st.lists(st.floats(min_value=0.5, max_value=20.0), min_size=1, max_size=2),
)
def test_matches_vertex_oracle_property(nodes, caps):
    """Greedy solve equals LP vertex enumeration on small instances."""
    p = problem(
        [(f"n{i}", pw, t, q) for i, (pw, t, q) in enumerate(nodes)],
        [(f"c{i}", cap) for i, cap in enumerate(caps)],
    )
    sol = solve_allocation(p)
    assert sol.constraint_violations(p) == []
    expect = oracle_value(p)
    assert sol.objective_value == pytest.approx(expect, rel=1e-7, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(
    nodes=st.lists(node_strategy, min_size=2, max_size=6),
    cap=st.floats(min_value=0.5, max_value=30.0),
)
def test_greedy_support_is_score_monotone(nodes, cap):
    """Single crew: a strictly better-scored node is saturated before any
    worse-scored node receives anything."""
    p = problem(
        [(f"n{i}", pw, t, q) for i, (pw, t, q) in enumerate(nodes)],
        [("c0", cap)],
    )
    sol = solve_allocation(p)
    scores = p.per_unit_scores()
    for i, a in enumerate(p.node_ids):
        for j, b in enumerate(p.node_ids):
            if scores[i] > scores[j] and sol.node_total(b) > 0.0:
                assert sol.node_total(a) == float(p.demand[i])
