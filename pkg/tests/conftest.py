"""Shared fixtures: the published five-node scenario and small helpers."""

import pytest

from gridcrew import (
    Crew,
    DamagedNode,
    DamageScenario,
    Depot,
    PowerNetwork,
    RoadEdge,
    RoadNetwork,
    project_power_onto_roads,
)

# The five damaged nodes of the reference restoration-input table:
# (node id, restorable power kW, repair hours, repair demand units).
TABLE_ROWS = [
    ("37215", 78.43, 3.59, 6.0),
    ("23214", 302.17, 2.55, 1.0),
    ("8433", 10476.66, 1.13, 4.0),
    ("36856", 10764.3, 2.75, 4.0),
    ("51201", 10773.17, 1.14, 8.0),
]


def grid_roads(side=3, length_m=1000.0, speed_mps=10.0):
    """side x side road grid with uniform edge travel time length/speed."""
    nodes = {}
    for r in range(side):
        for c in range(side):
            nodes[f"r{r * side + c}"] = (32.90 + 0.01 * r, -96.95 + 0.01 * c)
    edges = []
    for r in range(side):
        for c in range(side):
            i = r * side + c
            if c + 1 < side:
                edges.append(RoadEdge(f"r{i}", f"r{i + 1}", length_m, speed_mps))
            if r + 1 < side:
                edges.append(RoadEdge(f"r{i}", f"r{i + side}", length_m, speed_mps))
    return RoadNetwork(nodes=nodes, edges=edges).validate()


@pytest.fixture
def table_roads():
    return grid_roads()


@pytest.fixture
def table_power(table_roads):
    # Each damaged node sits just off a distinct road node so the
    # projection is unambiguous: 37215->r1, 23214->r2, 8433->r4,
    # 36856->r5, 51201->r8.
    offsets = {"37215": "r1", "23214": "r2", "8433": "r4", "36856": "r5", "51201": "r8"}
    nodes = {}
    for node_id, road in offsets.items():
        lat, lon = table_roads.nodes[road]
        nodes[node_id] = (lat + 0.0001, lon + 0.0001)
    ids = list(nodes)
    edges = [(ids[i], ids[i + 1]) for i in range(len(ids) - 1)]
    return PowerNetwork(nodes=nodes, edges=edges).validate()


@pytest.fixture
def table_scenario(table_roads):
    return DamageScenario(
        damaged=[DamagedNode(*row) for row in TABLE_ROWS],
        depots=[Depot("d0", "r0")],
        crews=[Crew("c0", "line", 15.0, 0)],
    ).validate(roads=table_roads)


@pytest.fixture
def table_projection(table_power, table_roads):
    return project_power_onto_roads(table_power, table_roads)
