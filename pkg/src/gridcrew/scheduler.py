"""Iteration loop: allocate capacity, reduce the network, route each crew.

One iteration allocates every crew's (renewed) capacity over the nodes
that still have demand, contracts the road network to a complete graph
over the chosen nodes and the depots, and solves one route per crew that
received work. Served amounts shrink the residual demands and the loop
repeats until nothing is left. Crews return to their depots between
iterations, so capacities renew each round.

Crews are processed in sequence order, which places clearing (tree) work
ahead of repair (line) work; the precedence is in route finalization
order, not inside the route model itself. Each crew's home depot is taken
round-robin from the scenario's depot list in crew-sequence order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .allocation import AllocationProblem, select_iteration_nodes, solve_allocation
from .errors import OverServiceError, SolverError, StallError, ValidationError
from .netmodel import DamagedNode, DamageScenario, ProjectionMap, RoadNetwork
from .reduction import build_reduced_graph
from .routing import CrewRoute, RouteProblem, solve_route, validate_route

_ZERO_TOL = 1e-9  # residual at or below this counts as fully served

_MAX_ITERATIONS = 10_000  # defensive bound; progress is guaranteed per iteration


@dataclass
class SolveSettings:
    """Weights and caps shared by both solver stages.

    ``normalize_power`` divides restorable power by the scenario maximum
    inside the routing order cost so order terms stay comparable with
    travel seconds; allocation always uses raw power.
    """

    alpha1: float = 1.0
    beta1: float = 1.0
    alpha2: float = 1.0
    beta2: float = 1.0
    normalize_power: bool = True
    exact_cap: int = 14

    def validate(self) -> "SolveSettings":
        for name in ("alpha1", "beta1", "alpha2", "beta2"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"weight {name} must be nonnegative")
        if self.exact_cap < 1:
            raise ValidationError("exact-solve node cap must be at least 1")
        return self


@dataclass
class IterationRecord:
    """Everything one loop pass decided."""

    index: int  # 1-based
    allocation_objective: float
    routes: List[CrewRoute]
    served: Dict[str, float]          # node -> amount served this pass
    residual_after: Dict[str, float]  # every original node -> demand left
    power_restored_kw: float          # power of nodes completed this pass


@dataclass
class Schedule:
    """Full multi-iteration restoration plan with roll-up totals."""

    iterations: List[IterationRecord]
    total_travel_seconds: float
    total_order_cost: float
    power_restored_kw: float

    @property
    def iteration_count(self) -> int:
        return len(self.iterations)


def power_norm_for(scenario: DamageScenario, settings: SolveSettings) -> float:
    """Divisor applied to restorable power inside routing order costs."""
    if settings.normalize_power and scenario.damaged:
        top = max(d.power_kw for d in scenario.damaged)
        if top > 0.0:
            return top
    return 1.0


def apply_service(scenario: DamageScenario, served: Dict[str, float]) -> DamageScenario:
    """Subtract served amounts from residual demands.

    Nodes whose demand reaches zero leave the active damaged list. Raises
    OverServiceError when an amount exceeds the node's residual demand,
    and ValidationError for unknown or inactive nodes.
    """
    active = {d.node_id for d in scenario.damaged}
    for node, amount in served.items():
        if node not in active:
            raise ValidationError(f"served node {node} is not an active damaged node")
        if amount < 0.0:
            raise ValidationError(f"served amount for {node} is negative")
    remaining: List[DamagedNode] = []
    for d in scenario.damaged:
        amount = served.get(d.node_id, 0.0)
        if amount > d.demand + _ZERO_TOL:
            raise OverServiceError(
                f"node {d.node_id} served {amount} but only {d.demand} remained"
            )
        residual = d.demand - amount
        if residual > _ZERO_TOL:
            remaining.append(DamagedNode(d.node_id, d.power_kw, d.repair_hours, residual))
    return DamageScenario(damaged=remaining, depots=scenario.depots, crews=scenario.crews)


def _allocation_problem(scenario: DamageScenario, settings: SolveSettings) -> AllocationProblem:
    crews = scenario.crews_in_sequence()
    return AllocationProblem(
        node_ids=[d.node_id for d in scenario.damaged],
        power_kw=np.array([d.power_kw for d in scenario.damaged]),
        repair_hours=np.array([d.repair_hours for d in scenario.damaged]),
        demand=np.array([d.demand for d in scenario.damaged]),
        crew_ids=[c.crew_id for c in crews],
        capacity=np.array([c.capacity for c in crews]),
        alpha1=settings.alpha1,
        beta1=settings.beta1,
    )


def run_two_stage(
    scenario: DamageScenario,
    roads: RoadNetwork,
    projection: ProjectionMap,
    settings: Optional[SolveSettings] = None,
) -> Schedule:
    """Run the full restoration loop until every demand is met.

    Raises StallError when residual demand remains but no crew can be
    given any of it (for example, an empty crew roster), and propagates
    reachability errors from the reduction step.
    """
    settings = (settings or SolveSettings()).validate()
    scenario.validate(roads=roads)
    original = {d.node_id: d for d in scenario.damaged}
    power_norm = power_norm_for(scenario, settings)
    depot_road_nodes = [dp.road_node for dp in scenario.depots]
    crews = scenario.crews_in_sequence()

    iterations: List[IterationRecord] = []
    current = scenario
    while current.damaged:
        if len(iterations) >= _MAX_ITERATIONS:
            raise StallError(f"no convergence after {_MAX_ITERATIONS} iterations")
        residual_now = {d.node_id: d.demand for d in current.damaged}

        sol = solve_allocation(_allocation_problem(current, settings))
        if not sol.selected:
            sol = solve_allocation(_allocation_problem(current, settings), force_progress=True)
        if not sol.selected:
            blocked = ", ".join(sorted(residual_now))
            raise StallError(f"no crew can serve the remaining demand at: {blocked}")
        picks = select_iteration_nodes(sol)
        selected_ids = [node for node, _ in picks]

        reduced = build_reduced_graph(roads, projection, selected_ids, depot_road_nodes)
        attrs = {nid: (original[nid].power_kw, original[nid].repair_hours) for nid in selected_ids}
        per_crew_nodes: Dict[str, Dict[str, float]] = {c.crew_id: {} for c in crews}
        for node, amounts in picks:
            for crew_id, qty in amounts.items():
                per_crew_nodes[crew_id][node] = qty

        routes: List[CrewRoute] = []
        for k, crew in enumerate(crews):
            assigned = per_crew_nodes[crew.crew_id]
            if not assigned:
                continue
            home = depot_road_nodes[k % len(depot_road_nodes)]
            rooted = reduced.rooted_at(home, [nid for nid in selected_ids if nid in assigned])
            problem = RouteProblem(
                reduced=rooted,
                crew_id=crew.crew_id,
                capacity=crew.capacity,
                cost_scale=crew.cost_scale,
                assignments=assigned,
                node_attrs={nid: attrs[nid] for nid in assigned},
                alpha2=settings.alpha2,
                beta2=settings.beta2,
                power_norm=power_norm,
            )
            route = solve_route(problem, exact_cap=settings.exact_cap)
            violations = validate_route(route, problem)
            if violations:
                raise SolverError(
                    f"route for crew {crew.crew_id} failed its own certificate: "
                    + "; ".join(violations)
                )
            routes.append(route)

        served = {
            node: min(residual_now[node], math.fsum(amounts.values()))
            for node, amounts in picks
        }
        if math.fsum(served.values()) <= 0.0:
            blocked = ", ".join(sorted(residual_now))
            raise StallError(f"iteration made no progress on: {blocked}")
        current = apply_service(current, served)
        residual_after = {nid: 0.0 for nid in original}
        for d in current.damaged:
            residual_after[d.node_id] = d.demand
        freshly_done = [
            nid for nid, amt in served.items()
            if residual_after[nid] == 0.0 and residual_now[nid] > 0.0
        ]
        iterations.append(IterationRecord(
            index=len(iterations) + 1,
            allocation_objective=sol.objective_value,
            routes=routes,
            served=served,
            residual_after=residual_after,
            power_restored_kw=math.fsum(original[nid].power_kw for nid in freshly_done),
        ))

    return Schedule(
        iterations=iterations,
        total_travel_seconds=math.fsum(r.travel_cost for it in iterations for r in it.routes),
        total_order_cost=math.fsum(r.order_cost for it in iterations for r in it.routes),
        power_restored_kw=math.fsum(it.power_restored_kw for it in iterations),
    )
