"""Domain types and file ingestion for the coupled power/road model.

File formats
------------
Power networks, road networks, and damage scenarios share one line-oriented
tabular layout: UTF-8 text, ``#`` comment lines and blank lines ignored,
``[section]`` headers, and a CSV header row naming the columns of each
section.

Power network (sections ``[nodes]``, ``[edges]``)::

    [nodes]
    id,lat,lon
    p0,32.901,-96.948
    [edges]
    id_a,id_b
    p0,p1

Road network (``[edges]`` carries lengths in meters and speeds in m/s;
an empty speed field falls back to the loader's default)::

    [nodes]
    id,lat,lon
    r0,32.900,-96.950
    [edges]
    id_a,id_b,length_m,speed_mps
    r0,r1,482.1,13.9

Damage scenario (sections ``[damaged]``, ``[depots]``, ``[crews]``; the
damaged columns mirror the restoration input table: restorable power in kW,
repair time in hours, repair demand in resource units)::

    [damaged]
    node_id,power_kw,repair_hours,demand
    51201,10773.17,1.14,8
    [depots]
    depot_id,road_node
    d0,r12
    [crews]
    crew_id,kind,capacity
    c0,line,15

A power network can also be read from a graph-markup (GraphML) file whose
nodes carry ``lat``/``lon`` data keys; see :func:`load_power_network`.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ParseError, ValidationError
from .geo import haversine_m, haversine_m_vec

DEFAULT_SPEED_MPS = 13.9  # free-flow fallback when a road edge has no speed

CREW_KINDS = ("tree", "line")

# Characters reserved by the report serialization.
_FORBIDDEN_ID_CHARS = (",", ":")


def _check_id(kind: str, node_id: str) -> str:
    if not node_id:
        raise ValidationError(f"{kind} id may not be empty")
    for ch in _FORBIDDEN_ID_CHARS:
        if ch in node_id:
            raise ValidationError(f"{kind} id {node_id!r} contains reserved character {ch!r}")
    return node_id


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class PowerNetwork:
    """Distribution network: node coordinates plus undirected line segments.

    Instances are treated as immutable after construction.
    """

    nodes: Dict[str, Tuple[float, float]]  # id -> (lat, lon), insertion-ordered
    edges: List[Tuple[str, str]]

    def validate(self) -> "PowerNetwork":
        for node_id, (lat, lon) in self.nodes.items():
            _check_id("power node", node_id)
            if not (math.isfinite(lat) and math.isfinite(lon)):
                raise ValidationError(f"power node {node_id} has non-finite coordinates")
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise ValidationError(f"power edge ({a}, {b}) references a missing node")
        if len(self.nodes) > 1 and not self._is_connected():
            raise ValidationError("power network is not connected")
        return self

    def _is_connected(self) -> bool:
        adj: Dict[str, List[str]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            for nbr in adj[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == len(self.nodes)


@dataclass
class RoadEdge:
    a: str
    b: str
    length_m: float
    speed_mps: float

    @property
    def travel_seconds(self) -> float:
        return self.length_m / self.speed_mps


@dataclass
class RoadNetwork:
    """Road graph with travel-weighted undirected edges.

    Parallel edges are permitted; self-loops are not. Instances are treated
    as immutable after construction.
    """

    nodes: Dict[str, Tuple[float, float]]  # id -> (lat, lon), insertion-ordered
    edges: List[RoadEdge]

    def validate(self) -> "RoadNetwork":
        for node_id, (lat, lon) in self.nodes.items():
            _check_id("road node", node_id)
            if not (math.isfinite(lat) and math.isfinite(lon)):
                raise ValidationError(f"road node {node_id} has non-finite coordinates")
        for e in self.edges:
            if e.a not in self.nodes or e.b not in self.nodes:
                raise ValidationError(f"road edge ({e.a}, {e.b}) references a missing node")
            if e.a == e.b:
                raise ValidationError(f"road edge at {e.a} is a self-loop")
            if not (e.length_m > 0.0 and math.isfinite(e.length_m)):
                raise ValidationError(f"road edge ({e.a}, {e.b}) has nonpositive length")
            if not (e.speed_mps > 0.0 and math.isfinite(e.speed_mps)):
                raise ValidationError(f"road edge ({e.a}, {e.b}) has nonpositive speed")
        return self

    def adjacency(self) -> Dict[str, List[Tuple[str, float]]]:
        """Neighbor lists with edge travel times in seconds."""
        adj: Dict[str, List[Tuple[str, float]]] = {n: [] for n in self.nodes}
        for e in self.edges:
            t = e.travel_seconds
            adj[e.a].append((e.b, t))
            adj[e.b].append((e.a, t))
        return adj


@dataclass
class ProjectionMap:
    """Nearest-road-node assignment for every power node.

    ``entries`` maps power-node id to (road-node id, great-circle distance
    in meters).
    """

    entries: Dict[str, Tuple[str, float]]

    def road_node(self, power_node: str) -> str:
        try:
            return self.entries[power_node][0]
        except KeyError:
            raise ValidationError(f"power node {power_node} has no road projection") from None


@dataclass
class DamagedNode:
    node_id: str
    power_kw: float
    repair_hours: float
    demand: float


@dataclass
class Depot:
    depot_id: str
    road_node: str


@dataclass
class Crew:
    """A repair unit. Tree crews clear sites before line crews repair them.

    ``sequence_index`` fixes the scheduling order within the roster; the
    roster invariant puts every tree crew ahead of every line crew.
    ``cost_scale`` multiplies base travel weights for this crew.
    """

    crew_id: str
    kind: str
    capacity: float
    sequence_index: int
    cost_scale: float = 1.0


@dataclass
class DamageScenario:
    """Damaged nodes with restoration attributes, plus depots and crews."""

    damaged: List[DamagedNode]
    depots: List[Depot]
    crews: List[Crew]

    def validate(self, roads: Optional[RoadNetwork] = None) -> "DamageScenario":
        seen = set()
        for d in self.damaged:
            _check_id("damaged node", d.node_id)
            if d.node_id in seen:
                raise ValidationError(f"damaged node {d.node_id} listed twice")
            seen.add(d.node_id)
            if not d.demand > 0.0:
                raise ValidationError(f"damaged node {d.node_id} has nonpositive demand")
            if d.power_kw < 0.0:
                raise ValidationError(f"damaged node {d.node_id} has negative restorable power")
            if d.repair_hours < 0.0:
                raise ValidationError(f"damaged node {d.node_id} has negative repair time")
        if not self.depots:
            raise ValidationError("scenario must list at least one depot")
        for dp in self.depots:
            _check_id("depot", dp.depot_id)
            if roads is not None and dp.road_node not in roads.nodes:
                raise ValidationError(f"depot {dp.depot_id} references unknown road node {dp.road_node}")
        self._validate_crews()
        return self

    def _validate_crews(self) -> None:
        indices = sorted(c.sequence_index for c in self.crews)
        if indices != list(range(len(self.crews))):
            raise ValidationError("crew sequence indices must be a permutation of 0..K-1")
        for c in self.crews:
            _check_id("crew", c.crew_id)
            if c.kind not in CREW_KINDS:
                raise ValidationError(f"crew {c.crew_id} has unknown kind {c.kind!r}")
            if not c.capacity > 0.0:
                raise ValidationError(f"crew {c.crew_id} has nonpositive capacity")
            if not c.cost_scale > 0.0:
                raise ValidationError(f"crew {c.crew_id} has nonpositive cost scale")
        ordered = self.crews_in_sequence()
        last_tree = max((i for i, c in enumerate(ordered) if c.kind == "tree"), default=-1)
        first_line = min((i for i, c in enumerate(ordered) if c.kind == "line"), default=len(ordered))
        if last_tree > first_line:
            raise ValidationError("every tree crew must be sequenced before every line crew")

    def crews_in_sequence(self) -> List[Crew]:
        return sorted(self.crews, key=lambda c: c.sequence_index)

    def demands(self) -> Dict[str, float]:
        return {d.node_id: d.demand for d in self.damaged}


# ---------------------------------------------------------------------------
# Tabular parsing
# ---------------------------------------------------------------------------

def _read_sections(path: str) -> Dict[str, List[List[str]]]:
    """Split a sectioned tabular file into raw rows per section."""
    sections: Dict[str, List[List[str]]] = {}
    current: Optional[str] = None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if line.startswith("[") and line.endswith("]"):
                    current = line[1:-1].strip().lower()
                    if current in sections:
                        raise ParseError(f"{path}:{lineno}: duplicate section [{current}]")
                    sections[current] = []
                    continue
                if current is None:
                    raise ParseError(f"{path}:{lineno}: data before any [section] header")
                sections[current].append([cell.strip() for cell in line.split(",")])
    except OSError:
        raise
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8: {exc}") from exc
    return sections


def _section_rows(path, sections, name, columns, optional_trailing=0, required=True):
    """Return dict rows of a section after checking its header.

    The last ``optional_trailing`` columns may be absent from the header or
    left empty in data rows (reported as None).
    """
    if name not in sections:
        if required:
            raise ParseError(f"{path}: missing [{name}] section")
        return []
    rows = sections[name]
    if not rows:
        raise ParseError(f"{path}: section [{name}] has no header row")
    header = [c.lower() for c in rows[0]]
    mandatory = columns[: len(columns) - optional_trailing]
    allowed = list(columns)
    if header[: len(mandatory)] != list(mandatory) or any(h not in allowed for h in header):
        raise ParseError(
            f"{path}: section [{name}] header {header} does not match expected columns {list(columns)}"
        )
    out = []
    for cells in rows[1:]:
        if len(cells) < len(mandatory) or len(cells) > len(header):
            raise ParseError(f"{path}: section [{name}] row {cells} has wrong column count")
        row = {col: None for col in columns}
        for col, cell in zip(header, cells):
            row[col] = cell if cell != "" else None
        out.append(row)
    return out


def _parse_float(path: str, what: str, value: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{path}: {what} is not a number: {value!r}") from None


def _format_float(x: float) -> str:
    """Shortest round-tripping decimal form (ints stay bare)."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# Loaders and writers
# ---------------------------------------------------------------------------

def load_power_network(path: str, format: str = "tabular") -> PowerNetwork:
    """Read a power network from ``path``.

    ``format`` selects ``"tabular"`` (sectioned CSV, see module docstring)
    or ``"graphml"`` (graph-markup with lat/lon node data keys).
    """
    if format == "tabular":
        sections = _read_sections(path)
        nodes: Dict[str, Tuple[float, float]] = {}
        for row in _section_rows(path, sections, "nodes", ("id", "lat", "lon")):
            node_id = row["id"]
            if node_id in nodes:
                raise ValidationError(f"{path}: duplicate power node id {node_id}")
            nodes[node_id] = (
                _parse_float(path, f"lat of {node_id}", row["lat"]),
                _parse_float(path, f"lon of {node_id}", row["lon"]),
            )
        edges = [
            (row["id_a"], row["id_b"])
            for row in _section_rows(path, sections, "edges", ("id_a", "id_b"))
        ]
        return PowerNetwork(nodes=nodes, edges=edges).validate()
    if format == "graphml":
        return _load_power_graphml(path)
    raise ValueError(f"unknown power-network format {format!r}")


def _load_power_graphml(path: str) -> PowerNetwork:
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParseError(f"{path}: malformed graph markup: {exc}") from exc
    root = tree.getroot()
    key_names = {}
    for key in root.iter("{http://graphml.graphdrawing.org/xmlns}key"):
        key_names[key.get("id")] = key.get("attr.name")
    graph = root.find("g:graph", ns)
    if graph is None:
        raise ParseError(f"{path}: no <graph> element")
    nodes: Dict[str, Tuple[float, float]] = {}
    for node in graph.findall("g:node", ns):
        node_id = node.get("id")
        if node_id in nodes:
            raise ValidationError(f"{path}: duplicate power node id {node_id}")
        attrs = {}
        for data in node.findall("g:data", ns):
            attrs[key_names.get(data.get("key"), data.get("key"))] = data.text
        try:
            nodes[node_id] = (float(attrs["lat"]), float(attrs["lon"]))
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"{path}: node {node_id} lacks numeric lat/lon data") from None
    edges = []
    for edge in graph.findall("g:edge", ns):
        edges.append((edge.get("source"), edge.get("target")))
    return PowerNetwork(nodes=nodes, edges=edges).validate()


def save_power_network(net: PowerNetwork, path: str, format: str = "tabular") -> None:
    if format == "tabular":
        lines = ["# power network", "[nodes]", "id,lat,lon"]
        for node_id, (lat, lon) in net.nodes.items():
            lines.append(f"{node_id},{_format_float(lat)},{_format_float(lon)}")
        lines += ["[edges]", "id_a,id_b"]
        for a, b in net.edges:
            lines.append(f"{a},{b}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        return
    if format == "graphml":
        _save_power_graphml(net, path)
        return
    raise ValueError(f"unknown power-network format {format!r}")


def _save_power_graphml(net: PowerNetwork, path: str) -> None:
    xmlns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", xmlns=xmlns)
    for key_id, name in (("d0", "lat"), ("d1", "lon")):
        ET.SubElement(root, "key", id=key_id, **{"for": "node", "attr.name": name, "attr.type": "double"})
    graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
    for node_id, (lat, lon) in net.nodes.items():
        node = ET.SubElement(graph, "node", id=node_id)
        ET.SubElement(node, "data", key="d0").text = _format_float(lat)
        ET.SubElement(node, "data", key="d1").text = _format_float(lon)
    for a, b in net.edges:
        ET.SubElement(graph, "edge", source=a, target=b)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)


def load_road_network(path: str, default_speed_mps: float = DEFAULT_SPEED_MPS) -> RoadNetwork:
    """Read a road network; empty speed fields fall back to ``default_speed_mps``."""
    sections = _read_sections(path)
    nodes: Dict[str, Tuple[float, float]] = {}
    for row in _section_rows(path, sections, "nodes", ("id", "lat", "lon")):
        node_id = row["id"]
        if node_id in nodes:
            raise ValidationError(f"{path}: duplicate road node id {node_id}")
        nodes[node_id] = (
            _parse_float(path, f"lat of {node_id}", row["lat"]),
            _parse_float(path, f"lon of {node_id}", row["lon"]),
        )
    edges = []
    rows = _section_rows(path, sections, "edges", ("id_a", "id_b", "length_m", "speed_mps"),
                         optional_trailing=1)
    for row in rows:
        speed = default_speed_mps if row["speed_mps"] is None else _parse_float(
            path, f"speed of ({row['id_a']}, {row['id_b']})", row["speed_mps"])
        edges.append(RoadEdge(
            a=row["id_a"],
            b=row["id_b"],
            length_m=_parse_float(path, f"length of ({row['id_a']}, {row['id_b']})", row["length_m"]),
            speed_mps=speed,
        ))
    return RoadNetwork(nodes=nodes, edges=edges).validate()


def save_road_network(net: RoadNetwork, path: str) -> None:
    lines = ["# road network", "[nodes]", "id,lat,lon"]
    for node_id, (lat, lon) in net.nodes.items():
        lines.append(f"{node_id},{_format_float(lat)},{_format_float(lon)}")
    lines += ["[edges]", "id_a,id_b,length_m,speed_mps"]
    for e in net.edges:
        lines.append(f"{e.a},{e.b},{_format_float(e.length_m)},{_format_float(e.speed_mps)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_damage_scenario(
    path: str,
    roads: Optional[RoadNetwork] = None,
    power: Optional[PowerNetwork] = None,
) -> DamageScenario:
    """Read a damage scenario; cross-checks node references when networks given."""
    sections = _read_sections(path)
    damaged = []
    for row in _section_rows(path, sections, "damaged", ("node_id", "power_kw", "repair_hours", "demand")):
        damaged.append(DamagedNode(
            node_id=row["node_id"],
            power_kw=_parse_float(path, f"power of {row['node_id']}", row["power_kw"]),
            repair_hours=_parse_float(path, f"repair time of {row['node_id']}", row["repair_hours"]),
            demand=_parse_float(path, f"demand of {row['node_id']}", row["demand"]),
        ))
    depots = [
        Depot(depot_id=row["depot_id"], road_node=row["road_node"])
        for row in _section_rows(path, sections, "depots", ("depot_id", "road_node"))
    ]
    crews = []
    rows = _section_rows(path, sections, "crews", ("crew_id", "kind", "capacity", "cost_scale"),
                         optional_trailing=1)
    for seq, row in enumerate(rows):
        scale = 1.0 if row["cost_scale"] is None else _parse_float(
            path, f"cost scale of {row['crew_id']}", row["cost_scale"])
        crews.append(Crew(
            crew_id=row["crew_id"],
            kind=row["kind"],
            capacity=_parse_float(path, f"capacity of {row['crew_id']}", row["capacity"]),
            sequence_index=seq,
            cost_scale=scale,
        ))
    scenario = DamageScenario(damaged=damaged, depots=depots, crews=crews).validate(roads=roads)
    if power is not None:
        for d in scenario.damaged:
            if d.node_id not in power.nodes:
                raise ValidationError(f"{path}: damaged node {d.node_id} is not in the power network")
    return scenario


def save_damage_scenario(scenario: DamageScenario, path: str) -> None:
    lines = ["# damage scenario", "[damaged]", "node_id,power_kw,repair_hours,demand"]
    for d in scenario.damaged:
        lines.append(
            f"{d.node_id},{_format_float(d.power_kw)},{_format_float(d.repair_hours)},{_format_float(d.demand)}"
        )
    lines += ["[depots]", "depot_id,road_node"]
    for dp in scenario.depots:
        lines.append(f"{dp.depot_id},{dp.road_node}")
    lines += ["[crews]", "crew_id,kind,capacity,cost_scale"]
    for c in scenario.crews_in_sequence():
        lines.append(f"{c.crew_id},{c.kind},{_format_float(c.capacity)},{_format_float(c.cost_scale)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Projection of power nodes onto the road network
# ---------------------------------------------------------------------------

def project_power_onto_roads(power: PowerNetwork, roads: RoadNetwork) -> ProjectionMap:
    """Map every power node to its nearest road node by great-circle distance.

    Ties break toward the lexicographically smallest road-node id. A power
    node coincident with a road node maps to it at distance exactly 0.
    """
    if not power.nodes:
        raise ValidationError("cannot project an empty power network")
    if not roads.nodes:
        raise ValidationError("cannot project onto an empty road network")
    road_ids = sorted(roads.nodes)
    road_lat = np.array([roads.nodes[r][0] for r in road_ids])
    road_lon = np.array([roads.nodes[r][1] for r in road_ids])
    entries: Dict[str, Tuple[str, float]] = {}
    for node_id, (lat, lon) in power.nodes.items():
        dist = haversine_m_vec(lat, lon, road_lat, road_lon)
        best = int(np.argmin(dist))  # first minimum == smallest id (ids sorted)
        entries[node_id] = (road_ids[best], float(dist[best]))
    return ProjectionMap(entries=entries)


def nearest_road_node_brute(lat: float, lon: float, roads: RoadNetwork) -> Tuple[str, float]:
    """Scalar nearest-road lookup (same metric and tie-break as projection)."""
    best_id, best_d = None, math.inf
    for road_id in sorted(roads.nodes):
        rlat, rlon = roads.nodes[road_id]
        d = haversine_m(lat, lon, rlat, rlon)
        if d < best_d:
            best_id, best_d = road_id, d
    return best_id, best_d
