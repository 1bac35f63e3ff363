"""Crew repair scheduling over coupled power and road networks.

The toolkit couples a power-distribution graph to a road graph, contracts
the roads to a complete travel-time graph over depots and damaged sites,
and schedules repair crews by alternating an exact capacity-allocation
stage with exact per-crew routing until every site's demand is met.
"""

from .allocation import (
    AllocationProblem,
    AllocationSolution,
    select_iteration_nodes,
    solve_allocation,
)
from .errors import (
    GridCrewError,
    OverServiceError,
    ParseError,
    RouteInfeasibleError,
    RouteSizeError,
    SolverError,
    StallError,
    UnreachableTerminalError,
    ValidationError,
)
from .generator import Bundle, generate_bundle, write_bundle
from .geo import haversine_m, local_to_geodesic
from .netmodel import (
    Crew,
    DamagedNode,
    DamageScenario,
    Depot,
    PowerNetwork,
    ProjectionMap,
    RoadEdge,
    RoadNetwork,
    load_damage_scenario,
    load_power_network,
    load_road_network,
    project_power_onto_roads,
    save_damage_scenario,
    save_power_network,
    save_road_network,
)
from .reduction import (
    ReducedGraph,
    Terminal,
    build_reduced_graph,
    dump_reduced,
    load_reduced_dump,
    reconstruct_path,
    shortest_paths_from,
)
from .report import (
    load_schedule_report,
    routes_geojson,
    schedule_report,
    summary_text,
    validate_report,
    write_routes_geojson,
    write_schedule_report,
    write_summary,
)
from .routing import (
    CrewRoute,
    RouteCost,
    RouteProblem,
    route_cost,
    solve_route,
    validate_route,
)
from .scheduler import (
    IterationRecord,
    Schedule,
    SolveSettings,
    apply_service,
    power_norm_for,
    run_two_stage,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationProblem",
    "AllocationSolution",
    "Bundle",
    "Crew",
    "CrewRoute",
    "DamageScenario",
    "DamagedNode",
    "Depot",
    "GridCrewError",
    "IterationRecord",
    "OverServiceError",
    "ParseError",
    "PowerNetwork",
    "ProjectionMap",
    "ReducedGraph",
    "RoadEdge",
    "RoadNetwork",
    "RouteCost",
    "RouteInfeasibleError",
    "RouteProblem",
    "RouteSizeError",
    "Schedule",
    "SolveSettings",
    "SolverError",
    "StallError",
    "Terminal",
    "UnreachableTerminalError",
    "ValidationError",
    "apply_service",
    "build_reduced_graph",
    "dump_reduced",
    "generate_bundle",
    "haversine_m",
    "load_damage_scenario",
    "load_power_network",
    "load_reduced_dump",
    "load_road_network",
    "load_schedule_report",
    "local_to_geodesic",
    "power_norm_for",
    "project_power_onto_roads",
    "reconstruct_path",
    "route_cost",
    "routes_geojson",
    "run_two_stage",
    "save_damage_scenario",
    "save_power_network",
    "save_road_network",
    "schedule_report",
    "select_iteration_nodes",
    "shortest_paths_from",
    "solve_allocation",
    "solve_route",
    "summary_text",
    "validate_report",
    "validate_route",
    "write_bundle",
    "write_routes_geojson",
    "write_schedule_report",
    "write_summary",
]
