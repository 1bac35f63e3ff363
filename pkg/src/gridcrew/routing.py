"""Stage-2 solver: one crew's route through its assigned damaged nodes.

Each instance is a start/end-pinned path problem on the rooted reduced
graph: visit every assigned node exactly once between the depot-start and
depot-end terminals, minimizing travel cost plus an order-weighted node
cost. Travel cost is the sum of reduced-graph weights along the route,
scaled by the crew's cost multiplier. Each damaged node also contributes
``(alpha2 * T_i - beta2 * P_i / power_norm) * t_i`` where ``t_i`` is its
visit position (depot-start is position 0, the first damaged node 1, the
depot-end m+1). A positive node weight (repair time dominating) costs
more at later positions, pulling that node early; a negative weight
(restorable power dominating) lowers the objective at later positions.

The solver is an exact subset dynamic program over (visited set, last
node); the visit position of the last node is the size of the visited
set, which lets the order term be paid on arrival. States grow as
``2^m * m``, so instances above the configured node cap are rejected
rather than solved approximately.

Costs are reported via correctly rounded float sums, so a route and its
reversal cost identically under symmetric weights with zero order
weights, and the solver's objective always equals re-costing its own
sequence bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import RouteInfeasibleError, RouteSizeError, ValidationError
from .reduction import DAMAGED, DEPOT_END, DEPOT_START, ReducedGraph

EXACT_SOLVE_CAP_DEFAULT = 14

_FEAS_TOL = 1e-9  # absolute slack on capacity and load-balance checks


@dataclass
class RouteProblem:
    """One crew's routing instance on a rooted reduced graph.

    ``reduced`` must be rooted for this crew: terminals depot-start, the
    crew's assigned damaged nodes, depot-end. ``assignments`` gives the
    load delivered at each node; ``node_attrs`` maps node id to
    (power kW, repair hours). ``power_norm`` divides power before the
    order weighting (pass the scenario's maximum power to keep order
    terms comparable with travel seconds, or 1.0 for raw power).
    """

    reduced: ReducedGraph
    crew_id: str
    capacity: float
    cost_scale: float
    assignments: Dict[str, float]
    node_attrs: Dict[str, Tuple[float, float]]
    alpha2: float = 1.0
    beta2: float = 1.0
    power_norm: float = 1.0

    def validate(self) -> "RouteProblem":
        terms = self.reduced.terminals
        if not terms or terms[0].kind != DEPOT_START or terms[-1].kind != DEPOT_END:
            raise ValidationError("route problem graph must be rooted (depot-start ... depot-end)")
        damaged = set(self.reduced.damaged_ids())
        for node, q in self.assignments.items():
            if node not in damaged:
                raise ValidationError(f"assigned node {node} is not a terminal of the reduced graph")
            if not q > 0.0:
                raise ValidationError(f"assigned node {node} has nonpositive load")
            if node not in self.node_attrs:
                raise ValidationError(f"assigned node {node} has no power/repair attributes")
        if not self.capacity > 0.0:
            raise ValidationError(f"crew {self.crew_id} has nonpositive capacity")
        if not self.cost_scale > 0.0:
            raise ValidationError(f"crew {self.crew_id} has nonpositive cost scale")
        if self.alpha2 < 0.0 or self.beta2 < 0.0:
            raise ValidationError("order-cost weights must be nonnegative")
        if not self.power_norm > 0.0:
            raise ValidationError("power normalization divisor must be positive")
        total = math.fsum(self.assignments.values())
        if total > self.capacity + _FEAS_TOL:
            raise RouteInfeasibleError(
                f"crew {self.crew_id} load {total} exceeds capacity {self.capacity}"
            )
        return self

    def order_weight(self, node: str) -> float:
        power_kw, repair_hours = self.node_attrs[node]
        return self.alpha2 * repair_hours - self.beta2 * (power_kw / self.power_norm)

    def travel_weight(self, i: int, j: int) -> float:
        return self.cost_scale * self.reduced.weight(i, j)


@dataclass
class RouteCost:
    travel_cost: float
    order_cost: float

    @property
    def total(self) -> float:
        return self.travel_cost + self.order_cost


@dataclass
class CrewRoute:
    """A feasible route with its certificate data.

    ``sequence`` runs depot-start, assigned nodes, depot-end (depot
    entries named by their road node). ``t`` maps each damaged node to
    its visit position (1..m; depots hold positions 0 and m+1). ``u``
    maps each damaged node to the cumulative load delivered after
    serving it, and ``loads`` to the amount delivered there.
    """

    crew_id: str
    sequence: List[str]
    t: Dict[str, int]
    u: Dict[str, float]
    loads: Dict[str, float]
    travel_cost: float
    order_cost: float
    objective: float


def _sequence_indices(sequence: Sequence[str], p: RouteProblem) -> List[int]:
    """Map a route sequence to terminal indices, rejecting malformed input."""
    terms = p.reduced.terminals
    if len(sequence) != len(p.assignments) + 2:
        raise ValidationError(
            f"sequence length {len(sequence)} does not cover {len(p.assignments)} assigned nodes"
        )
    if sequence[0] != terms[0].source_id:
        raise ValidationError(f"sequence must start at depot {terms[0].source_id}")
    if sequence[-1] != terms[-1].source_id:
        raise ValidationError(f"sequence must end at depot {terms[-1].source_id}")
    middle = list(sequence[1:-1])
    if sorted(middle) != sorted(p.assignments):
        raise ValidationError("sequence middle does not visit the assigned nodes exactly once")
    idx = [p.reduced.start_index]
    idx += [p.reduced.index_of(DAMAGED, node) for node in middle]
    idx.append(p.reduced.end_index)
    return idx


def route_cost(sequence: Sequence[str], p: RouteProblem) -> RouteCost:
    """Deterministic re-costing of a route sequence.

    Travel legs and order terms are totaled with correctly rounded sums,
    so the result is independent of leg order.
    """
    idx = _sequence_indices(sequence, p)
    legs = [p.travel_weight(idx[a], idx[a + 1]) for a in range(len(idx) - 1)]
    order_terms = [p.order_weight(node) * (pos + 1) for pos, node in enumerate(sequence[1:-1])]
    return RouteCost(travel_cost=math.fsum(legs), order_cost=math.fsum(order_terms))


def solve_route(p: RouteProblem, exact_cap: int = EXACT_SOLVE_CAP_DEFAULT) -> CrewRoute:
    """Find the minimum-objective route, exactly.

    Raises RouteSizeError when more than ``exact_cap`` nodes are
    assigned, and RouteInfeasibleError when the assigned load exceeds
    the crew capacity.
    """
    p.validate()
    nodes = [nid for nid in p.reduced.damaged_ids() if nid in p.assignments]
    m = len(nodes)
    if m == 0:
        raise ValidationError(f"crew {p.crew_id} has no assigned nodes to route")
    if m > exact_cap:
        raise RouteSizeError(
            f"crew {p.crew_id} has {m} assigned nodes; exact solve capped at {exact_cap}"
        )

    node_idx = [p.reduced.index_of(DAMAGED, nid) for nid in nodes]
    start, end = p.reduced.start_index, p.reduced.end_index
    cost = np.empty((m, m))
    for a, ia in enumerate(node_idx):
        for b, ib in enumerate(node_idx):
            cost[a, b] = p.travel_weight(ia, ib)
    cost_start = np.array([p.travel_weight(start, i) for i in node_idx])
    cost_end = np.array([p.travel_weight(i, end) for i in node_idx])
    order = np.array([p.order_weight(nid) for nid in nodes])

    full = (1 << m) - 1
    dp = np.full((full + 1, m), np.inf)
    parent = np.full((full + 1, m), -1, dtype=np.int64)
    for i in range(m):
        dp[1 << i, i] = cost_start[i] + order[i]
    popcount = np.array([bin(mask).count("1") for mask in range(full + 1)])
    for mask in range(1, full + 1):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        pos = popcount[mask]
        if pos == m:
            continue
        # Best predecessor for each next node, over all lasts in the mask.
        via = row[:, None] + cost
        best = via.min(axis=0)
        arg = via.argmin(axis=0)
        step_order = order * (pos + 1)
        for j in range(m):
            if mask & (1 << j):
                continue
            cand = best[j] + step_order[j]
            nm = mask | (1 << j)
            if cand < dp[nm, j]:
                dp[nm, j] = cand
                parent[nm, j] = arg[j]

    finish = dp[full] + cost_end
    last = int(np.argmin(finish))
    if not math.isfinite(finish[last]):
        raise ValidationError("route problem has non-finite weights")

    order_indices = []
    mask, cur = full, last
    while cur >= 0:
        order_indices.append(cur)
        nxt = int(parent[mask, cur])
        mask ^= 1 << cur
        cur = nxt
    order_indices.reverse()

    sequence = [p.reduced.terminals[start].source_id]
    sequence += [nodes[i] for i in order_indices]
    sequence.append(p.reduced.terminals[end].source_id)
    cost_parts = route_cost(sequence, p)

    t = {node: pos + 1 for pos, node in enumerate(sequence[1:-1])}
    u: Dict[str, float] = {}
    running = 0.0
    for node in sequence[1:-1]:
        running += p.assignments[node]
        u[node] = running
    return CrewRoute(
        crew_id=p.crew_id,
        sequence=sequence,
        t=t,
        u=u,
        loads=dict(p.assignments),
        travel_cost=cost_parts.travel_cost,
        order_cost=cost_parts.order_cost,
        objective=cost_parts.total,
    )


def validate_route(r: CrewRoute, p: RouteProblem) -> List[str]:
    """Check every constraint family on a route; empty list = feasible.

    Violations are reported as strings prefixed with the family name
    (endpoint, visit-count, visit-order, resource-balance, capacity,
    bound, objective).
    """
    out: List[str] = []
    terms = p.reduced.terminals
    seq = r.sequence
    if not seq or seq[0] != terms[0].source_id:
        out.append(f"endpoint: route does not start at depot {terms[0].source_id}")
    if not seq or seq[-1] != terms[-1].source_id:
        out.append(f"endpoint: route does not end at depot {terms[-1].source_id}")
    middle = list(seq[1:-1])
    counts: Dict[str, int] = {}
    for node in middle:
        counts[node] = counts.get(node, 0) + 1
    for node in p.assignments:
        c = counts.get(node, 0)
        if c != 1:
            out.append(f"visit-count: node {node} visited {c} times, expected exactly once")
    for node, c in counts.items():
        if node not in p.assignments:
            out.append(f"visit-count: node {node} visited but not assigned")

    expected_t = {node: pos + 1 for pos, node in enumerate(middle)}
    if set(r.t) != set(p.assignments):
        out.append("visit-order: t map keys do not match the assigned nodes")
    else:
        for node, pos in expected_t.items():
            if r.t.get(node) != pos:
                out.append(
                    f"visit-order: node {node} has t = {r.t.get(node)}, sequence implies {pos}"
                )

    if set(r.u) != set(p.assignments):
        out.append("resource-balance: u map keys do not match the assigned nodes")
    else:
        running = 0.0
        for node in middle:
            if node not in p.assignments:
                break  # already reported under visit-count
            running += p.assignments[node]
            got = r.u[node]
            if abs(got - running) > _FEAS_TOL:
                out.append(
                    f"resource-balance: u[{node}] = {got}, running load implies {running}"
                )
            if got < p.assignments[node] - _FEAS_TOL:
                out.append(f"bound: u[{node}] = {got} below delivered load {p.assignments[node]}")
            if got > p.capacity + _FEAS_TOL:
                out.append(f"capacity: u[{node}] = {got} exceeds capacity {p.capacity}")

    try:
        parts = route_cost(seq, p)
    except ValidationError:
        parts = None
    if parts is not None:
        if parts.travel_cost != r.travel_cost:
            out.append(
                f"objective: travel cost {r.travel_cost} does not re-cost to {parts.travel_cost}"
            )
        if parts.order_cost != r.order_cost:
            out.append(
                f"objective: order cost {r.order_cost} does not re-cost to {parts.order_cost}"
            )
        if parts.total != r.objective:
            out.append(f"objective: total {r.objective} does not re-cost to {parts.total}")
    return out
