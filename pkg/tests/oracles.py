"""Independent reference implementations the solvers are tested against.

Everything here deliberately avoids the package's own algorithms: dense
all-pairs relaxation instead of label-setting search, LP vertex
enumeration instead of the greedy pour, and raw permutation enumeration
instead of the subset dynamic program.
"""

import itertools
import math

import numpy as np


def floyd_warshall_times(roads):
    """Dense all-pairs shortest travel times; returns (node-id list, matrix)."""
    ids = list(roads.nodes)
    pos = {node: i for i, node in enumerate(ids)}
    n = len(ids)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for e in roads.edges:
        t = e.length_m / e.speed_mps
        a, b = pos[e.a], pos[e.b]
        if t < dist[a, b]:
            dist[a, b] = t
            dist[b, a] = t
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return ids, dist


def allocation_lp_vertex_max(scores, demands, capacities):
    """Optimal objective of the allocation LP by vertex enumeration.

    Variables y_ik are flattened node-major. Enumerates every basic
    solution (d constraints active out of m) and keeps the best feasible
    one. Only practical for a handful of variables.
    """
    n, big_k = len(demands), len(capacities)
    d = n * big_k
    rows = []
    rhs = []
    for k in range(big_k):  # crew capacity
        row = np.zeros(d)
        for i in range(n):
            row[i * big_k + k] = 1.0
        rows.append(row)
        rhs.append(capacities[k])
    for i in range(n):  # ladder between consecutive crews
        for k in range(1, big_k):
            row = np.zeros(d)
            row[i * big_k + (k - 1)] = 1.0
            row[i * big_k + k] = -1.0
            rows.append(row)
            rhs.append(0.0)
    for i in range(n):  # bounds
        for k in range(big_k):
            row = np.zeros(d)
            row[i * big_k + k] = 1.0
            rows.append(row)
            rhs.append(demands[i])
            rows.append(-row)
            rhs.append(0.0)
    A = np.array(rows)
    b = np.array(rhs)
    c = np.array([scores[i] for i in range(n) for _ in range(big_k)])

    combos = np.array(list(itertools.combinations(range(len(b)), d)))
    AA = A[combos]
    bb = b[combos]
    dets = np.abs(np.linalg.det(AA))
    ok = dets > 1e-9
    pts = np.full((len(combos), d), np.nan)
    if ok.any():
        pts[ok] = np.linalg.solve(AA[ok], bb[ok][..., None])[..., 0]
    feasible = np.isfinite(pts).all(axis=1) & (A @ pts.T <= b[:, None] + 1e-9).all(axis=0)
    assert feasible.any(), "allocation LP lost its y=0 vertex"
    return float((pts[feasible] @ c).max())


def brute_route_min(cost, cost_start, cost_end, order):
    """Minimum route objective by enumerating every visit permutation.

    ``cost`` is the node-to-node matrix, ``cost_start``/``cost_end`` the
    depot legs, ``order`` the per-node order weights (paid once per node,
    multiplied by its 1-based visit position). Plain-float arithmetic, so
    feed integer-valued weights when exact equality is asserted.
    """
    m = len(order)
    cost_list = [list(map(float, row)) for row in cost]
    start_list = list(map(float, cost_start))
    end_list = list(map(float, cost_end))
    order_list = list(map(float, order))
    best = math.inf
    for perm in itertools.permutations(range(m)):
        total = start_list[perm[0]] + order_list[perm[0]]
        prev = perm[0]
        for pos in range(1, m):
            cur = perm[pos]
            total += cost_list[prev][cur] + order_list[cur] * (pos + 1)
            prev = cur
        total += end_list[prev]
        if total < best:
            best = total
    return best


def random_connected_roads(rng, node_count, extra_edges=0, integer_times=True):
    """Random connected road network (tree plus chords) for oracle tests.

    With ``integer_times`` every edge's travel time is a whole number of
    seconds (speed 1.0, integer lengths), which keeps all shortest-path
    arithmetic exact in floats.
    """
    from gridcrew import RoadEdge, RoadNetwork

    width = len(str(node_count - 1))
    nodes = {}
    for i in range(node_count):
        nodes[f"r{i:0{width}d}"] = (
            32.9 + float(rng.uniform(0.0, 0.2)),
            -96.95 + float(rng.uniform(0.0, 0.2)),
        )
    ids = list(nodes)
    edges = []

    def draw_edge(a, b):
        if integer_times:
            length = float(rng.integers(1, 1000))
            speed = 1.0
        else:
            length = float(rng.uniform(10.0, 1000.0))
            speed = float(rng.uniform(5.0, 15.0))
        edges.append(RoadEdge(a=a, b=b, length_m=length, speed_mps=speed))

    for i in range(1, node_count):
        draw_edge(ids[int(rng.integers(0, i))], ids[i])
    for _ in range(extra_edges):
        a, b = rng.integers(0, node_count, size=2)
        if a != b:
            draw_edge(ids[int(a)], ids[int(b)])
    return RoadNetwork(nodes=nodes, edges=edges).validate()
