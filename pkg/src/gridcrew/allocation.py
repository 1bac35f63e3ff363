"""Stage-1 solver: spread crew capacity over damaged nodes.

The problem is a linear program: maximize the sum over crews and nodes of
``score_i * y_ik`` where ``score_i = alpha1*P_i/q_i - beta1*T_i/q_i``,
subject to per-crew capacity ``sum_i y_ik <= Q_k``, per-node bounds
``0 <= y_ik <= q_i``, and the crew-sequence ladder ``y_{i,k-1} <= y_{i,k}``
that lets clearing crews precede repair crews at every node.

The solver is exact without an external LP package. Substituting
``z_ik = y_ik - y_{i,k-1}`` (with ``y_{i,-1} = 0``) turns the ladder into
plain nonnegativity, the node bound into a shared budget
``sum_k z_ik <= q_i``, and the crew capacities into nested prefix caps
whose joint headroom at stage k is ``min_{k' >= k} Q_{k'}`` minus the mass
poured so far. The objective weight of ``z_ik`` is ``score_i * (K - k)``,
so pouring stage by stage into the highest-score nodes first is optimal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .errors import ValidationError


@dataclass
class AllocationProblem:
    """One stage-1 instance: residual demands, crew capacities, weights.

    Crews must already be in sequence order (clearing before repair).
    """

    node_ids: List[str]
    power_kw: np.ndarray      # restorable power per node, kW
    repair_hours: np.ndarray  # estimated repair time per node, hours
    demand: np.ndarray        # residual resource demand per node, > 0
    crew_ids: List[str]
    capacity: np.ndarray      # residual capacity per crew, > 0
    alpha1: float = 1.0
    beta1: float = 1.0

    def __post_init__(self):
        self.power_kw = np.asarray(self.power_kw, dtype=float)
        self.repair_hours = np.asarray(self.repair_hours, dtype=float)
        self.demand = np.asarray(self.demand, dtype=float)
        self.capacity = np.asarray(self.capacity, dtype=float)

    def validate(self) -> "AllocationProblem":
        n = len(self.node_ids)
        if len(set(self.node_ids)) != n:
            raise ValidationError("allocation problem has duplicate node ids")
        for arr, name in ((self.power_kw, "power"), (self.repair_hours, "repair time"),
                          (self.demand, "demand")):
            if arr.shape != (n,):
                raise ValidationError(f"{name} array length does not match node count")
        if len(set(self.crew_ids)) != len(self.crew_ids):
            raise ValidationError("allocation problem has duplicate crew ids")
        if self.capacity.shape != (len(self.crew_ids),):
            raise ValidationError("capacity array length does not match crew count")
        if n and not (self.demand > 0.0).all():
            raise ValidationError("all residual demands must be positive")
        if len(self.crew_ids) and not (self.capacity > 0.0).all():
            raise ValidationError("all crew capacities must be positive")
        if self.alpha1 < 0.0 or self.beta1 < 0.0:
            raise ValidationError("allocation weights must be nonnegative")
        return self

    def per_unit_scores(self) -> np.ndarray:
        """Benefit per allocated unit for each node."""
        return (self.alpha1 * self.power_kw - self.beta1 * self.repair_hours) / self.demand


@dataclass
class AllocationSolution:
    """Feasible (normally optimal) allocation with its objective value.

    ``y`` holds every (node-id, crew-id) pair, zeros included. ``selected``
    lists nodes with positive total allocation, in problem order.
    """

    node_ids: List[str]
    crew_ids: List[str]
    y: Dict[Tuple[str, str], float]
    objective_value: float
    selected: List[str]

    def node_total(self, node_id: str) -> float:
        return sum(self.y[(node_id, c)] for c in self.crew_ids)

    def crew_total(self, crew_id: str) -> float:
        return sum(self.y[(n, crew_id)] for n in self.node_ids)

    def constraint_violations(self, p: AllocationProblem, tol: float = 1e-9) -> List[str]:
        """Check the capacity, bound, and ladder constraints; [] = feasible."""
        out = []
        for k, crew in enumerate(p.crew_ids):
            used = self.crew_total(crew)
            if used > float(p.capacity[k]) + tol:
                out.append(f"capacity: crew {crew} allocated {used} > {p.capacity[k]}")
        for i, node in enumerate(p.node_ids):
            prev = 0.0
            for k, crew in enumerate(p.crew_ids):
                v = self.y[(node, crew)]
                if v < -tol:
                    out.append(f"bound: y[{node},{crew}] = {v} < 0")
                if v > float(p.demand[i]) + tol:
                    out.append(f"bound: y[{node},{crew}] = {v} > demand {p.demand[i]}")
                if k > 0 and prev > v + tol:
                    out.append(f"ladder: y[{node},{p.crew_ids[k-1]}] = {prev} > y[{node},{crew}] = {v}")
                prev = v
        return out


def _pour(p: AllocationProblem, eligible: List[int]) -> np.ndarray:
    """Greedy stage-by-stage fill of the z-variables; returns y = cumsum(z)."""
    n, big_k = len(p.node_ids), len(p.crew_ids)
    z = np.zeros((n, big_k))
    if not eligible or big_k == 0:
        return z
    # Joint headroom of stage k is the smallest capacity among crews k..K-1.
    suffix_min = np.minimum.accumulate(p.capacity[::-1])[::-1].astype(float)
    node_rem = p.demand.astype(float).copy()
    poured = 0.0
    for k in range(big_k):
        avail = float(suffix_min[k]) - poured
        if avail <= 0.0:
            continue
        for i in eligible:
            if avail <= 0.0:
                break
            amt = min(node_rem[i], avail)
            if amt <= 0.0:
                continue
            z[i, k] += amt
            node_rem[i] -= amt
            avail -= amt
            poured += amt
    return np.cumsum(z, axis=1)


def solve_allocation(p: AllocationProblem, force_progress: bool = False) -> AllocationSolution:
    """Solve one stage-1 instance exactly.

    Nodes with nonpositive per-unit score receive nothing: giving them
    capacity can only lower (or never raise) the objective, so y = 0 there
    is optimal. With ``force_progress`` the positivity filter is dropped
    and capacity is poured over every node in descending score order; the
    result is then feasible but deliberately not the program optimum. The
    orchestrator uses this to guarantee every node is eventually served.
    """
    p.validate()
    scores = p.per_unit_scores() if len(p.node_ids) else np.zeros(0)
    order = sorted(range(len(p.node_ids)), key=lambda i: (-scores[i], i))
    if force_progress:
        eligible = order
    else:
        eligible = [i for i in order if scores[i] > 0.0]
    y = _pour(p, eligible)

    y_map: Dict[Tuple[str, str], float] = {}
    for i, node in enumerate(p.node_ids):
        for k, crew in enumerate(p.crew_ids):
            y_map[(node, crew)] = float(y[i, k])
    totals = y.sum(axis=1) if y.size else np.zeros(len(p.node_ids))
    objective = float((scores * totals).sum()) if len(p.node_ids) else 0.0
    selected = [node for i, node in enumerate(p.node_ids) if totals[i] > 0.0]
    return AllocationSolution(
        node_ids=list(p.node_ids),
        crew_ids=list(p.crew_ids),
        y=y_map,
        objective_value=objective,
        selected=selected,
    )


def select_iteration_nodes(sol: AllocationSolution) -> List[Tuple[str, Dict[str, float]]]:
    """Positive-allocation nodes with their per-crew quantities.

    Returns (node-id, {crew-id: amount}) pairs in problem order; only
    positive amounts appear in the inner maps. These per-crew amounts are
    the loads the routing stage delivers.
    """
    out = []
    for node in sol.selected:
        per_crew = {
            crew: sol.y[(node, crew)]
            for crew in sol.crew_ids
            if sol.y[(node, crew)] > 0.0
        }
        out.append((node, per_crew))
    return out
