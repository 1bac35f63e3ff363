"""One scheduling pass by hand: pour capacity, then route the crew.

Stage 1 decides WHO gets repaired this pass. Each node is scored per unit
of demand (restorable power up, repair time down) and crew capacity is
poured into the best scores first, in crew-sequence order, respecting a
ladder between consecutive crews. Stage 2 decides the DRIVE: an exact
capacitated route over the chosen nodes, minimizing travel seconds plus
a per-node order term weighted by visit position.

Run:  python3 demos/03_allocate_and_route.py
"""

import numpy as np

from gridcrew import (
    AllocationProblem,
    RouteProblem,
    build_reduced_graph,
    generate_bundle,
    project_power_onto_roads,
    select_iteration_nodes,
    solve_allocation,
    solve_route,
    validate_route,
)

bundle = generate_bundle(seed=77, road_nodes=64, damaged=5, depots=1, capacity=9.0)
scenario, roads = bundle.scenario, bundle.roads
projection = project_power_onto_roads(bundle.power, roads)
crew = scenario.crews_in_sequence()[0]

# ---- stage 1: allocation -------------------------------------------------
problem = AllocationProblem(
    node_ids=[d.node_id for d in scenario.damaged],
    power_kw=np.array([d.power_kw for d in scenario.damaged]),
    repair_hours=np.array([d.repair_hours for d in scenario.damaged]),
    demand=np.array([d.demand for d in scenario.damaged]),
    crew_ids=[crew.crew_id],
    capacity=np.array([crew.capacity]),
)
sol = solve_allocation(problem)

print(f"crew {crew.crew_id} capacity this pass: {crew.capacity}")
print()
print("node      score/unit    demand   allocated")
for nid, score, q in zip(problem.node_ids, problem.per_unit_scores(), problem.demand):
    got = sol.node_total(nid)
    mark = "  <- selected" if nid in sol.selected else ""
    print(f"{nid:>4}   {score:11.3f}   {q:7.1f}   {got:9.1f}{mark}")
print(f"\nallocation objective: {sol.objective_value:.3f}")
assert sol.constraint_violations(problem) == []

picks = select_iteration_nodes(sol)
assignments = {nid: amounts[crew.crew_id] for nid, amounts in picks}

# ---- stage 2: routing ----------------------------------------------------
reduced = build_reduced_graph(
    roads, projection, list(assignments), [dp.road_node for dp in scenario.depots]
)
home = scenario.depots[0].road_node
route_problem = RouteProblem(
    reduced=reduced.rooted_at(home, list(assignments)),
    crew_id=crew.crew_id,
    capacity=crew.capacity,
    cost_scale=crew.cost_scale,
    assignments=assignments,
    node_attrs={
        d.node_id: (d.power_kw, d.repair_hours)
        for d in scenario.damaged if d.node_id in assignments
    },
    power_norm=max(d.power_kw for d in scenario.damaged),
)
route = solve_route(route_problem)
assert validate_route(route, route_problem) == []  # self-certifying

print()
print("route:", " -> ".join(route.sequence))
print("stop  position  load-after")
for node in route.sequence[1:-1]:
    print(f"{node:>4}  {route.t[node]:8d}  {route.u[node]:10.1f}")
print()
print(f"travel cost: {route.travel_cost:10.1f} (scaled seconds)")
print(f"order cost:  {route.order_cost:10.3f} (position-weighted)")
print(f"objective:   {route.objective:10.3f}")
