"""Build the two infrastructure layers and couple them.

The toolkit models a repair problem that lives on two graphs at once: a
power-distribution network whose components need fixing, and a road
network the repair crews actually drive on. The coupling is a projection
map: every power node is pinned to its nearest road node by great-circle
distance, so "repair component X" becomes "drive to road node Y".

Run:  python3 demos/01_coupled_network.py
"""

import os
import tempfile

from gridcrew import (
    PowerNetwork,
    RoadEdge,
    RoadNetwork,
    haversine_m,
    load_power_network,
    project_power_onto_roads,
    save_power_network,
)

# A 2x3 block of streets. Coordinates are (lat, lon); lengths in meters,
# speeds in m/s, so edge travel time is length/speed seconds.
roads = RoadNetwork(
    nodes={
        "r0": (32.900, -96.950),
        "r1": (32.900, -96.945),
        "r2": (32.900, -96.940),
        "r3": (32.905, -96.950),
        "r4": (32.905, -96.945),
        "r5": (32.905, -96.940),
    },
    edges=[
        RoadEdge("r0", "r1", 470.0, 11.0),
        RoadEdge("r1", "r2", 470.0, 11.0),
        RoadEdge("r3", "r4", 470.0, 11.0),
        RoadEdge("r4", "r5", 470.0, 11.0),
        RoadEdge("r0", "r3", 560.0, 8.0),
        RoadEdge("r1", "r4", 560.0, 8.0),
        RoadEdge("r2", "r5", 560.0, 8.0),
    ],
).validate()

# A feeder with five components. Power edges carry no weights here; the
# electrical topology only matters upstream of this toolkit. What we use
# are the node positions.
power = PowerNetwork(
    nodes={
        "sub":  (32.9001, -96.9499),
        "xf1":  (32.9002, -96.9448),
        "xf2":  (32.9049, -96.9452),
        "lat1": (32.9051, -96.9401),
        "lat2": (32.8998, -96.9402),
    },
    edges=[("sub", "xf1"), ("xf1", "xf2"), ("xf1", "lat2"), ("xf2", "lat1")],
).validate()

print("road nodes:", len(roads.nodes), " road edges:", len(roads.edges))
print("power nodes:", len(power.nodes), " power edges:", len(power.edges))
print()

# The projection picks, for each power node, the road node a crew should
# drive to. Ties break toward the smallest road-node id so results never
# depend on iteration order.
projection = project_power_onto_roads(power, roads)
print("projection (power node -> road node, offset in meters):")
for pid, (road_node, dist) in projection.entries.items():
    print(f"  {pid:>5} -> {road_node}   {dist:8.1f} m")
print()

# Sanity: the projection really is the nearest road node.
for pid, (plat, plon) in power.nodes.items():
    best = min(roads.nodes, key=lambda r: haversine_m(plat, plon, *roads.nodes[r]))
    assert projection.road_node(pid) == best

# Both layers round-trip through plain text files.
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "power.txt")
    save_power_network(power, path)
    again = load_power_network(path)
    assert again.nodes == power.nodes and again.edges == power.edges
    print(f"power network round-tripped through {path}")

print("coupling done: every damaged component now has a street address")
