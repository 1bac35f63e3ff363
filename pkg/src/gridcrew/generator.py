"""Synthetic scenario bundles for demos, tests, and benchmarks.

A bundle is a connected road grid with randomized edge lengths and
speeds, a tree-shaped power overlay placed inside the road extent, and a
damage table whose restorable power (tens of kW to ~11 MW), repair times
(fractions of an hour to a few hours), and integer demands (1 to 8) match
the value ranges of the reference restoration-input table. All draws come
from one seeded generator, so a fixed seed reproduces the bundle exactly,
byte for byte once written.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ValidationError
from .geo import haversine_m
from .netmodel import (
    Crew,
    DamagedNode,
    DamageScenario,
    Depot,
    PowerNetwork,
    RoadEdge,
    RoadNetwork,
    save_damage_scenario,
    save_power_network,
    save_road_network,
)

BASE_LAT = 32.90  # grid origin; city-scale coordinates
BASE_LON = -96.95
GRID_STEP_DEG = 0.005

POWER_KW_RANGE = (50.0, 11_000.0)
REPAIR_HOURS_RANGE = (0.5, 4.0)
DEMAND_RANGE = (1, 8)
SPEED_MPS_RANGE = (8.0, 14.0)


@dataclass
class Bundle:
    power: PowerNetwork
    roads: RoadNetwork
    scenario: DamageScenario


def _round2(x: float) -> float:
    return float(np.round(x, 2))


def generate_road_grid(rng: np.random.Generator, node_count: int) -> RoadNetwork:
    """Connected grid-with-jitter road network of exactly ``node_count`` nodes.

    Nodes are laid out row-major; each connects to its left and upper
    neighbor, so any row-major prefix of the full grid stays connected.
    Edge lengths are the great-circle node distance stretched by a random
    detour factor; speeds are drawn per edge.
    """
    if node_count < 1:
        raise ValidationError("road network needs at least one node")
    rows = max(1, int(math.floor(math.sqrt(node_count))))
    cols = int(math.ceil(node_count / rows))
    width = len(str(node_count - 1))
    nodes: Dict[str, Tuple[float, float]] = {}
    coords = {}
    for idx in range(node_count):
        r, c = divmod(idx, cols)
        lat = BASE_LAT + r * GRID_STEP_DEG + float(rng.uniform(-0.001, 0.001))
        lon = BASE_LON + c * GRID_STEP_DEG + float(rng.uniform(-0.001, 0.001))
        node_id = f"r{idx:0{width}d}"
        nodes[node_id] = (lat, lon)
        coords[idx] = (lat, lon)
    edges = []
    ids = list(nodes)
    for idx in range(node_count):
        r, c = divmod(idx, cols)
        for nbr in (idx - 1 if c > 0 else None, idx - cols if r > 0 else None):
            if nbr is None:
                continue
            straight = haversine_m(*coords[idx], *coords[nbr])
            length = _round2(straight * float(rng.uniform(1.05, 1.35)))
            speed = _round2(float(rng.uniform(*SPEED_MPS_RANGE)))
            edges.append(RoadEdge(a=ids[nbr], b=ids[idx], length_m=length, speed_mps=speed))
    return RoadNetwork(nodes=nodes, edges=edges).validate()


def generate_power_tree(
    rng: np.random.Generator, roads: RoadNetwork, node_count: int
) -> PowerNetwork:
    """Tree-shaped power overlay scattered inside the road bounding box."""
    if node_count < 1:
        raise ValidationError("power network needs at least one node")
    lats = [lat for lat, _ in roads.nodes.values()]
    lons = [lon for _, lon in roads.nodes.values()]
    lat_lo, lat_hi = min(lats), max(lats)
    lon_lo, lon_hi = min(lons), max(lons)
    width = len(str(node_count - 1))
    nodes: Dict[str, Tuple[float, float]] = {}
    for idx in range(node_count):
        lat = float(rng.uniform(lat_lo, lat_hi))
        lon = float(rng.uniform(lon_lo, lon_hi))
        nodes[f"p{idx:0{width}d}"] = (lat, lon)
    ids = list(nodes)
    edges = []
    for idx in range(1, node_count):
        parent = int(rng.integers(0, idx))
        edges.append((ids[parent], ids[idx]))
    return PowerNetwork(nodes=nodes, edges=edges).validate()


def generate_bundle(
    seed: int,
    road_nodes: int = 64,
    damaged: int = 5,
    depots: int = 1,
    power_nodes: Optional[int] = None,
    tree_crews: int = 0,
    line_crews: int = 1,
    capacity: Optional[float] = None,
) -> Bundle:
    """Build one synthetic scenario bundle.

    ``power_nodes`` defaults to enough overlay nodes to sample the damage
    from; ``capacity`` defaults to half the total generated demand per
    crew (at least the largest single demand), which makes small runs
    finish in about two iterations.
    """
    if damaged < 0:
        raise ValidationError("damaged count must be nonnegative")
    if depots < 1:
        raise ValidationError("at least one depot is required")
    if tree_crews < 0 or line_crews < 0 or tree_crews + line_crews < 1:
        raise ValidationError("at least one crew is required")
    rng = np.random.default_rng(seed)
    roads = generate_road_grid(rng, road_nodes)
    if power_nodes is None:
        power_nodes = max(3 * damaged, 12)
    if power_nodes < damaged:
        raise ValidationError("power overlay is smaller than the damaged count")
    power = generate_power_tree(rng, roads, power_nodes)

    power_ids = list(power.nodes)
    picks = sorted(rng.choice(len(power_ids), size=damaged, replace=False).tolist())
    damaged_rows = []
    for pick in picks:
        damaged_rows.append(DamagedNode(
            node_id=power_ids[pick],
            power_kw=_round2(float(rng.uniform(*POWER_KW_RANGE))),
            repair_hours=_round2(float(rng.uniform(*REPAIR_HOURS_RANGE))),
            demand=float(rng.integers(DEMAND_RANGE[0], DEMAND_RANGE[1] + 1)),
        ))

    road_ids = list(roads.nodes)
    depot_picks = sorted(rng.choice(len(road_ids), size=depots, replace=False).tolist())
    depot_rows = [Depot(depot_id=f"d{i}", road_node=road_ids[p]) for i, p in enumerate(depot_picks)]

    if capacity is None:
        total = sum(d.demand for d in damaged_rows)
        biggest = max((d.demand for d in damaged_rows), default=1.0)
        crew_count = tree_crews + line_crews
        capacity = max(math.ceil(total / (2 * crew_count)), biggest, 1.0)
    crews = []
    for i in range(tree_crews):
        crews.append(Crew(crew_id=f"t{i}", kind="tree", capacity=float(capacity),
                          sequence_index=len(crews)))
    for i in range(line_crews):
        crews.append(Crew(crew_id=f"c{i}", kind="line", capacity=float(capacity),
                          sequence_index=len(crews)))

    scenario = DamageScenario(damaged=damaged_rows, depots=depot_rows, crews=crews)
    scenario.validate(roads=roads)
    return Bundle(power=power, roads=roads, scenario=scenario)


def write_bundle(bundle: Bundle, out_dir: str) -> Dict[str, str]:
    """Write the three bundle files; returns their paths by role."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "power": os.path.join(out_dir, "power.txt"),
        "roads": os.path.join(out_dir, "roads.txt"),
        "scenario": os.path.join(out_dir, "scenario.txt"),
    }
    save_power_network(bundle.power, paths["power"])
    save_road_network(bundle.roads, paths["roads"])
    save_damage_scenario(bundle.scenario, paths["scenario"])
    return paths
