"""Collapse the road network to a complete travel-time graph over terminals.

Terminals are the depot road nodes plus the road projections of the
selected damaged power nodes, with one extra terminal duplicating the
first depot so that routes can distinguish their start from their end
(the duplicate sits at the same road node, so start-to-end weight is 0).
Travel times come from shortest road paths at per-edge speeds.

The assembled matrix is forced into an exact metric: symmetric, zero
diagonal, and triangle-closed, so downstream solvers can rely on those
properties without tolerances. Stored road paths are the shortest paths
found by the label-setting search; the closure step may tighten a matrix
entry below the float sum of its stored path by rounding-level amounts,
so consumers that re-add path legs should compare with a tolerance.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParseError, UnreachableTerminalError, ValidationError
from .netmodel import (
    ProjectionMap,
    RoadNetwork,
    _format_float,
    _parse_float,
    _read_sections,
    _section_rows,
)

DEPOT_START = "depot-start"
DAMAGED = "damaged"
DEPOT_END = "depot-end"


def _dijkstra(
    adj: Dict[str, List[Tuple[str, float]]], source: str
) -> Tuple[Dict[str, float], Dict[str, Optional[str]]]:
    dist: Dict[str, float] = {source: 0.0}
    pred: Dict[str, Optional[str]] = {source: None}
    done = set()
    heap: List[Tuple[float, str]] = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def shortest_paths_from(roads: RoadNetwork, source: str) -> Dict[str, Tuple[float, Optional[str]]]:
    """Single-source shortest travel times from a road node.

    Returns a map node-id -> (seconds, predecessor-id); the source maps to
    (0.0, None) and unreachable nodes are absent. Chasing predecessors back
    to the source reconstructs the path (see :func:`reconstruct_path`).
    """
    if source not in roads.nodes:
        raise ValidationError(f"unknown road node {source!r}")
    dist, pred = _dijkstra(roads.adjacency(), source)
    return {node: (dist[node], pred[node]) for node in dist}


def reconstruct_path(
    result: Dict[str, Tuple[float, Optional[str]]], target: str
) -> List[str]:
    """Road-node path from the search source to ``target``."""
    if target not in result:
        raise ValidationError(f"node {target!r} unreachable from search source")
    path = [target]
    while result[path[-1]][1] is not None:
        path.append(result[path[-1]][1])
    path.reverse()
    return path


@dataclass
class Terminal:
    """One endpoint of the reduced graph.

    ``source_id`` is the damaged power-node id for damaged terminals and
    the depot's road-node id for depot terminals.
    """

    kind: str  # DEPOT_START, DAMAGED, or DEPOT_END
    source_id: str
    road_node: str


@dataclass
class ReducedGraph:
    """Complete symmetric travel-time graph over terminals.

    Terminal order is depot starts (input order), damaged nodes (input
    order), then the single end terminal duplicating the first depot.
    ``weights[i, j]`` is seconds between terminals i and j. ``paths`` maps
    an index pair to its road-node path; None when loaded from a dump.
    """

    terminals: List[Terminal]
    weights: np.ndarray
    paths: Optional[Dict[Tuple[int, int], List[str]]] = None

    @property
    def start_index(self) -> int:
        return 0

    @property
    def end_index(self) -> int:
        return len(self.terminals) - 1

    def depot_indices(self) -> List[int]:
        return [i for i, t in enumerate(self.terminals) if t.kind == DEPOT_START]

    def damaged_indices(self) -> List[int]:
        return [i for i, t in enumerate(self.terminals) if t.kind == DAMAGED]

    def damaged_ids(self) -> List[str]:
        return [self.terminals[i].source_id for i in self.damaged_indices()]

    def index_of(self, kind: str, source_id: str) -> int:
        for i, t in enumerate(self.terminals):
            if t.kind == kind and t.source_id == source_id:
                return i
        raise ValidationError(f"no {kind} terminal with id {source_id!r}")

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[i, j])

    def path(self, i: int, j: int) -> List[str]:
        if self.paths is None:
            raise ValidationError("road paths were not retained in this reduced graph")
        return list(self.paths[(i, j)])

    def rooted_at(self, home_road_node: str, damaged_ids: Sequence[str]) -> "ReducedGraph":
        """Extract the route-problem view for one crew.

        The result has terminals [depot-start at ``home_road_node``, the
        given damaged nodes in the given order, depot-end duplicating the
        home depot], with weights and paths sliced from this graph. The
        home depot must be one of this graph's depot terminals.
        """
        home = None
        for i in self.depot_indices():
            if self.terminals[i].road_node == home_road_node:
                home = i
                break
        if home is None:
            raise ValidationError(f"{home_road_node!r} is not a depot terminal road node")
        damaged_idx = [self.index_of(DAMAGED, nid) for nid in damaged_ids]
        sel = [home] + damaged_idx + [home]
        weights = self.weights[np.ix_(sel, sel)].copy()
        terminals = [Terminal(DEPOT_START, self.terminals[home].source_id, home_road_node)]
        terminals += [
            Terminal(DAMAGED, self.terminals[i].source_id, self.terminals[i].road_node)
            for i in damaged_idx
        ]
        terminals.append(Terminal(DEPOT_END, self.terminals[home].source_id, home_road_node))
        paths = None
        if self.paths is not None:
            paths = {}
            for a, ia in enumerate(sel):
                for b, ib in enumerate(sel):
                    paths[(a, b)] = list(self.paths[(ia, ib)])
        return ReducedGraph(terminals=terminals, weights=weights, paths=paths)

    def validate_metric(self) -> "ReducedGraph":
        """Assert the exact metric invariants the closure step establishes."""
        n = len(self.terminals)
        t = self.weights
        if t.shape != (n, n):
            raise ValidationError("weight matrix shape does not match terminal count")
        if not np.isfinite(t).all():
            raise ValidationError("weight matrix contains non-finite entries")
        if (t < 0.0).any():
            raise ValidationError("weight matrix contains negative entries")
        if (np.diag(t) != 0.0).any():
            raise ValidationError("weight matrix has a nonzero diagonal entry")
        if (t != t.T).any():
            raise ValidationError("weight matrix is not symmetric")
        for k in range(n):
            if (t > t[:, k : k + 1] + t[k : k + 1, :]).any():
                raise ValidationError("weight matrix violates the triangle inequality")
        return self


def _triangle_closure(times: np.ndarray) -> np.ndarray:
    """Elementwise-min symmetrization followed by all-pairs relaxation to a
    fixpoint, yielding an exactly metric matrix."""
    t = np.minimum(times, times.T)
    np.fill_diagonal(t, 0.0)
    changed = True
    while changed:
        changed = False
        for k in range(t.shape[0]):
            cand = t[:, k : k + 1] + t[k : k + 1, :]
            mask = cand < t
            if mask.any():
                t[mask] = cand[mask]
                changed = True
    return t


def build_reduced_graph(
    roads: RoadNetwork,
    projection: ProjectionMap,
    selected: Sequence[str],
    depots: Sequence[str],
    keep_paths: bool = True,
) -> ReducedGraph:
    """Build the complete terminal graph for the given damaged nodes.

    ``selected`` lists damaged power-node ids (each must have a road
    projection); ``depots`` lists depot road-node ids, first one becoming
    the start/end terminal pair. Raises UnreachableTerminalError if any
    terminal pair is disconnected in the road network.
    """
    if not depots:
        raise ValidationError("at least one depot road node is required")
    if len(set(selected)) != len(selected):
        raise ValidationError("selected damaged nodes contain a duplicate")
    if len(set(depots)) != len(depots):
        raise ValidationError("depot road nodes contain a duplicate")

    terminals = []
    for rn in depots:
        if rn not in roads.nodes:
            raise ValidationError(f"depot road node {rn!r} is not in the road network")
        terminals.append(Terminal(DEPOT_START, rn, rn))
    for nid in selected:
        rn = projection.road_node(nid)
        if rn not in roads.nodes:
            raise ValidationError(f"projection of {nid} references unknown road node {rn}")
        terminals.append(Terminal(DAMAGED, nid, rn))
    terminals.append(Terminal(DEPOT_END, depots[0], depots[0]))

    adj = roads.adjacency()
    anchors = sorted({t.road_node for t in terminals})
    dist_from: Dict[str, Dict[str, float]] = {}
    pred_from: Dict[str, Dict[str, Optional[str]]] = {}
    for anchor in anchors:
        dist_from[anchor], pred_from[anchor] = _dijkstra(adj, anchor)

    n = len(terminals)
    weights = np.zeros((n, n))
    for i, ta in enumerate(terminals):
        da = dist_from[ta.road_node]
        for j, tb in enumerate(terminals):
            if i == j:
                continue
            if tb.road_node not in da:
                raise UnreachableTerminalError(
                    f"no road path between terminals {ta.source_id} ({ta.road_node}) "
                    f"and {tb.source_id} ({tb.road_node})"
                )
            weights[i, j] = da[tb.road_node]
    weights = _triangle_closure(weights)

    paths: Optional[Dict[Tuple[int, int], List[str]]] = None
    if keep_paths:
        paths = {}
        for i, ta in enumerate(terminals):
            pa = pred_from[ta.road_node]
            for j, tb in enumerate(terminals):
                if ta.road_node == tb.road_node:
                    paths[(i, j)] = [ta.road_node]
                else:
                    node, chain = tb.road_node, [tb.road_node]
                    while pa[node] is not None:
                        node = pa[node]
                        chain.append(node)
                    chain.reverse()
                    paths[(i, j)] = chain

    return ReducedGraph(terminals=terminals, weights=weights, paths=paths).validate_metric()


# ---------------------------------------------------------------------------
# Matrix dump format
# ---------------------------------------------------------------------------

def dump_reduced(rg: ReducedGraph, path: str) -> None:
    """Write the terminal list and weight matrix as sectioned text.

    Road paths are not serialized; a loaded dump answers weight queries
    only.
    """
    lines = ["# reduced travel-time matrix, seconds", "[terminals]", "kind,source_id,road_node"]
    for t in rg.terminals:
        lines.append(f"{t.kind},{t.source_id},{t.road_node}")
    lines.append("[matrix]")
    lines.append("# one row per terminal, in terminal order")
    for row in rg.weights:
        lines.append(",".join(_format_float(x) for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_reduced_dump(path: str) -> ReducedGraph:
    """Read a matrix dump back into a ReducedGraph (without road paths)."""
    sections = _read_sections(path)
    terminals = []
    for row in _section_rows(path, sections, "terminals", ("kind", "source_id", "road_node")):
        if row["kind"] not in (DEPOT_START, DAMAGED, DEPOT_END):
            raise ParseError(f"{path}: unknown terminal kind {row['kind']!r}")
        terminals.append(Terminal(row["kind"], row["source_id"], row["road_node"]))
    if "matrix" not in sections:
        raise ParseError(f"{path}: missing [matrix] section")
    rows = sections["matrix"]
    n = len(terminals)
    if len(rows) != n:
        raise ParseError(f"{path}: expected {n} matrix rows, found {len(rows)}")
    weights = np.zeros((n, n))
    for i, cells in enumerate(rows):
        if len(cells) != n:
            raise ParseError(f"{path}: matrix row {i} has {len(cells)} entries, expected {n}")
        for j, cell in enumerate(cells):
            weights[i, j] = _parse_float(path, f"matrix entry ({i}, {j})", cell)
    return ReducedGraph(terminals=terminals, weights=weights, paths=None).validate_metric()
