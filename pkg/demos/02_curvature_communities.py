"""Ollivier-Ricci curvature singles out the bridge between two dense groups."""

import networkx as nx

from uavnoc import curvatures, discover_communities

g = nx.complete_graph(5)
g.add_edges_from(nx.complete_graph(range(5, 10)).edges)
g.add_edge(4, 5)
nx.set_edge_attributes(g, 1.0, "weight")
nx.set_node_attributes(g, 1e-12, "energy")

curv = curvatures(g)
for edge, k in sorted(curv.items(), key=lambda kv: kv[1])[:3]:
    print(edge, round(k, 4))   # the bridge is the only negative edge

part = discover_communities(g, core_count=4)
print("communities:", part.communities())
print("cut weight:", part.inter_cluster_weight)
for c in part.candidates:
    print(c)
