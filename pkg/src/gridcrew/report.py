"""Schedule serialization: structured report, summary table, route geometry.

The schedule report is JSON with a schema version header
(``crew-schedule/1``), written with sorted keys and fixed indentation so
identical runs produce byte-identical files. It carries enough data to
re-check every route certificate and schedule invariant against the input
bundle without re-solving; :func:`validate_report` does exactly that.

Route geometry goes to a GeoJSON feature collection whose line strings
follow the stored road-level shortest paths, not straight terminal-to-
terminal chords.
"""

from __future__ import annotations

import json
import math
from typing import Dict, List, Optional

from .errors import ParseError, ValidationError
from .netmodel import DamageScenario, ProjectionMap, RoadNetwork
from .reduction import DAMAGED, DEPOT_START, build_reduced_graph
from .routing import CrewRoute, RouteProblem, validate_route
from .scheduler import Schedule, SolveSettings, power_norm_for

SCHEDULE_SCHEMA = "crew-schedule/1"

_TOL = 1e-9


def _json_ready(value):
    return json.loads(json.dumps(value))


def schedule_report(
    schedule: Schedule,
    scenario: DamageScenario,
    settings: SolveSettings,
) -> dict:
    """Assemble the schedule report structure for a completed run.

    ``scenario`` must be the original (pre-run) damage scenario.
    """
    crews = scenario.crews_in_sequence()
    report = {
        "schema": SCHEDULE_SCHEMA,
        "settings": {
            "alpha1": settings.alpha1,
            "beta1": settings.beta1,
            "alpha2": settings.alpha2,
            "beta2": settings.beta2,
            "normalize_power": settings.normalize_power,
            "power_norm": power_norm_for(scenario, settings),
            "exact_cap": settings.exact_cap,
        },
        "scenario": {
            "damaged": {
                d.node_id: {
                    "power_kw": d.power_kw,
                    "repair_hours": d.repair_hours,
                    "demand": d.demand,
                }
                for d in scenario.damaged
            },
            "depots": {dp.depot_id: dp.road_node for dp in scenario.depots},
            "crews": [
                {
                    "crew_id": c.crew_id,
                    "kind": c.kind,
                    "capacity": c.capacity,
                    "cost_scale": c.cost_scale,
                }
                for c in crews
            ],
        },
        "iterations": [
            {
                "index": it.index,
                "allocation_objective": it.allocation_objective,
                "served": dict(it.served),
                "residual_after": dict(it.residual_after),
                "power_restored_kw": it.power_restored_kw,
                "routes": [
                    {
                        "crew_id": r.crew_id,
                        "depot": r.sequence[0],
                        "sequence": list(r.sequence),
                        "t": dict(r.t),
                        "u": dict(r.u),
                        "loads": dict(r.loads),
                        "travel_cost": r.travel_cost,
                        "order_cost": r.order_cost,
                        "objective": r.objective,
                    }
                    for r in it.routes
                ],
            }
            for it in schedule.iterations
        ],
        "totals": {
            "iterations": schedule.iteration_count,
            "travel_seconds": schedule.total_travel_seconds,
            "order_cost": schedule.total_order_cost,
            "power_restored_kw": schedule.power_restored_kw,
        },
    }
    return _json_ready(report)


def write_schedule_report(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_schedule_report(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(report, dict) or report.get("schema") != SCHEDULE_SCHEMA:
        raise ParseError(f"{path}: missing or unsupported schema (expected {SCHEDULE_SCHEMA})")
    return report


def summary_text(schedule: Schedule) -> str:
    """Fixed-layout run summary."""
    lines = ["restoration summary", ""]
    lines.append("iter  routes  served_units  travel_cost  order_cost  power_restored_kw")
    for it in schedule.iterations:
        served_units = math.fsum(it.served.values())
        travel = math.fsum(r.travel_cost for r in it.routes)
        order = math.fsum(r.order_cost for r in it.routes)
        lines.append(
            f"{it.index:<4d}  {len(it.routes):<6d}  {served_units!r:<12}  "
            f"{travel!r:<11}  {order!r:<10}  {it.power_restored_kw!r}"
        )
    lines.append("")
    lines.append(f"iterations:          {schedule.iteration_count}")
    lines.append(f"travel seconds:      {schedule.total_travel_seconds!r}")
    lines.append(f"order cost:          {schedule.total_order_cost!r}")
    lines.append(f"power restored (kW): {schedule.power_restored_kw!r}")
    return "\n".join(lines) + "\n"


def write_summary(schedule: Schedule, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(summary_text(schedule))


# ---------------------------------------------------------------------------
# Route geometry
# ---------------------------------------------------------------------------

def routes_geojson(
    schedule: Schedule,
    roads: RoadNetwork,
    projection: ProjectionMap,
    scenario: DamageScenario,
) -> dict:
    """Feature collection: depot and damaged-site points, route lines.

    Lines follow the road-level shortest paths between consecutive route
    stops. Coordinates are [lon, lat] per the format's axis order.
    """
    features: List[dict] = []
    for dp in scenario.depots:
        lat, lon = roads.nodes[dp.road_node]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [lon, lat]},
            "properties": {"role": "depot", "depot_id": dp.depot_id, "road_node": dp.road_node},
        })
    for d in scenario.damaged:
        road_node = projection.road_node(d.node_id)
        lat, lon = roads.nodes[road_node]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [lon, lat]},
            "properties": {"role": "damaged", "node_id": d.node_id, "road_node": road_node},
        })

    depot_road_nodes = [dp.road_node for dp in scenario.depots]
    for it in schedule.iterations:
        if not it.routes:
            continue
        selected = sorted({node for r in it.routes for node in r.sequence[1:-1]})
        reduced = build_reduced_graph(roads, projection, selected, depot_road_nodes)
        for r in it.routes:
            idx = [reduced.index_of(DEPOT_START, r.sequence[0])]
            idx += [reduced.index_of(DAMAGED, node) for node in r.sequence[1:-1]]
            idx.append(reduced.index_of(DEPOT_START, r.sequence[-1]))
            chain: List[str] = []
            for a, b in zip(idx, idx[1:]):
                leg = reduced.path(a, b)
                chain.extend(leg if not chain else leg[1:])
            coords = [[roads.nodes[n][1], roads.nodes[n][0]] for n in chain]
            features.append({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "role": "route",
                    "iteration": it.index,
                    "crew_id": r.crew_id,
                    "objective": r.objective,
                    "visit_sequence": list(r.sequence),
                },
            })
    return _json_ready({"type": "FeatureCollection", "features": features})


def write_routes_geojson(
    schedule: Schedule,
    roads: RoadNetwork,
    projection: ProjectionMap,
    scenario: DamageScenario,
    path: str,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(routes_geojson(schedule, roads, projection, scenario), fh,
                  indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Report validation
# ---------------------------------------------------------------------------

def _route_from_record(rec: dict) -> CrewRoute:
    return CrewRoute(
        crew_id=rec["crew_id"],
        sequence=list(rec["sequence"]),
        t={k: int(v) for k, v in rec["t"].items()},
        u={k: float(v) for k, v in rec["u"].items()},
        loads={k: float(v) for k, v in rec.get("loads", {}).items()},
        travel_cost=float(rec["travel_cost"]),
        order_cost=float(rec["order_cost"]),
        objective=float(rec["objective"]),
    )


def validate_report(
    report: dict,
    roads: RoadNetwork,
    projection: ProjectionMap,
    scenario: DamageScenario,
) -> List[str]:
    """Re-check a run report against its input bundle; [] = pass.

    Rebuilds every route's problem from the bundle and the report's
    recorded settings, re-validates each route certificate, and checks
    the schedule-level invariants (residual monotonicity, conservation
    of demand, allocation/route consistency, totals).
    """
    out: List[str] = []
    if report.get("schema") != SCHEDULE_SCHEMA:
        return [f"schema: expected {SCHEDULE_SCHEMA}, found {report.get('schema')!r}"]

    s = report.get("settings", {})
    try:
        settings = SolveSettings(
            alpha1=float(s["alpha1"]),
            beta1=float(s["beta1"]),
            alpha2=float(s["alpha2"]),
            beta2=float(s["beta2"]),
            normalize_power=bool(s["normalize_power"]),
            exact_cap=int(s["exact_cap"]),
        ).validate()
        power_norm = float(s["power_norm"])
    except (KeyError, TypeError, ValueError) as exc:
        return [f"settings: malformed settings block ({exc})"]
    expected_norm = power_norm_for(scenario, settings)
    if power_norm != expected_norm:
        out.append(
            f"settings: power_norm {power_norm} does not match the bundle's {expected_norm}"
        )

    original = {d.node_id: d for d in scenario.damaged}
    rep_damaged = report.get("scenario", {}).get("damaged", {})
    if set(rep_damaged) != set(original):
        out.append("scenario: damaged-node sets differ between report and bundle")
    else:
        for nid, row in rep_damaged.items():
            d = original[nid]
            if (row.get("power_kw"), row.get("repair_hours"), row.get("demand")) != (
                d.power_kw, d.repair_hours, d.demand
            ):
                out.append(f"scenario: node {nid} attributes differ from the bundle")

    crews = scenario.crews_in_sequence()
    crew_by_id = {c.crew_id: (k, c) for k, c in enumerate(crews)}
    depot_road_nodes = [dp.road_node for dp in scenario.depots]

    prev_residual = {nid: d.demand for nid, d in original.items()}
    served_total = {nid: 0.0 for nid in original}
    sum_travel: List[float] = []
    sum_order: List[float] = []
    sum_power: List[float] = []

    for it in report.get("iterations", []):
        tag = f"iteration {it.get('index')}"
        served = {k: float(v) for k, v in it.get("served", {}).items()}
        residual_after = {k: float(v) for k, v in it.get("residual_after", {}).items()}
        routes = it.get("routes", [])

        if set(residual_after) != set(original):
            out.append(f"{tag}: residual_after does not cover the damaged-node set")
            residual_after = {nid: residual_after.get(nid, 0.0) for nid in original}
        total_now = math.fsum(residual_after.values())
        total_prev = math.fsum(prev_residual.values())
        for nid in original:
            if residual_after[nid] > prev_residual.get(nid, 0.0) + _TOL:
                out.append(f"{tag}: residual at {nid} increased")
        if not total_now < total_prev:
            out.append(f"{tag}: total residual did not strictly decrease")
        for nid, amt in served.items():
            if nid not in original:
                out.append(f"{tag}: served unknown node {nid}")
                continue
            served_total[nid] += amt
            expect = prev_residual[nid] - amt
            if abs(residual_after[nid] - max(expect, 0.0)) > _TOL:
                out.append(f"{tag}: residual at {nid} inconsistent with served amount")

        routed_nodes = set()
        selected = sorted({n for rec in routes for n in rec.get("sequence", [])[1:-1]})
        reduced = None
        if selected:
            try:
                reduced = build_reduced_graph(roads, projection, selected, depot_road_nodes)
            except ValidationError as exc:
                out.append(f"{tag}: cannot rebuild reduced graph: {exc}")
        for rec in routes:
            crew_id = rec.get("crew_id")
            rtag = f"{tag} crew {crew_id}"
            if crew_id not in crew_by_id:
                out.append(f"{rtag}: unknown crew")
                continue
            k, crew = crew_by_id[crew_id]
            home = depot_road_nodes[k % len(depot_road_nodes)]
            seq = rec.get("sequence", [])
            if not seq or seq[0] != home:
                out.append(f"{rtag}: route does not start at its home depot {home}")
                continue
            loads = {n: float(v) for n, v in rec.get("loads", {}).items()}
            routed_nodes.update(loads)
            if reduced is None:
                continue
            try:
                rooted = reduced.rooted_at(home, [n for n in selected if n in loads])
                problem = RouteProblem(
                    reduced=rooted,
                    crew_id=crew_id,
                    capacity=crew.capacity,
                    cost_scale=crew.cost_scale,
                    assignments=loads,
                    node_attrs={
                        n: (original[n].power_kw, original[n].repair_hours) for n in loads
                    },
                    alpha2=settings.alpha2,
                    beta2=settings.beta2,
                    power_norm=power_norm,
                ).validate()
            except ValidationError as exc:
                out.append(f"{rtag}: cannot rebuild route problem: {exc}")
                continue
            for violation in validate_route(_route_from_record(rec), problem):
                out.append(f"{rtag}: {violation}")

        positive_served = {nid for nid, amt in served.items() if amt > 0.0}
        if routed_nodes != positive_served:
            out.append(f"{tag}: routed nodes do not match served nodes")

        sum_travel.extend(float(rec.get("travel_cost", 0.0)) for rec in routes)
        sum_order.extend(float(rec.get("order_cost", 0.0)) for rec in routes)
        sum_power.append(float(it.get("power_restored_kw", 0.0)))
        prev_residual = residual_after

    if any(v > _TOL for v in prev_residual.values()):
        out.append("final: residual demand remains after the last iteration")
    for nid, total in served_total.items():
        if abs(total - original[nid].demand) > _TOL:
            out.append(f"conservation: node {nid} served {total}, demanded {original[nid].demand}")

    totals = report.get("totals", {})
    checks = (
        ("iterations", len(report.get("iterations", []))),
        ("travel_seconds", math.fsum(sum_travel)),
        ("order_cost", math.fsum(sum_order)),
        ("power_restored_kw", math.fsum(sum_power)),
    )
    for key, expect in checks:
        if totals.get(key) != expect:
            out.append(f"totals: {key} is {totals.get(key)!r}, recomputed {expect!r}")
    return out
