"""Place a four-cluster task graph with CDM and CWM and compare the NoC energy."""

import networkx as nx

from uavnoc import ArchGraph, NocParams, cdm_map, cwm_map, depth_assign, mapping_energy

tg = nx.DiGraph()
for u, v, bits in [(0, 1, 10), (0, 2, 6), (0, 3, 10), (1, 3, 4), (2, 3, 1)]:
    tg.add_edge(u, v, volume=bits)
nx.set_node_attributes(tg, 10, "exec_time")
nx.set_node_attributes(tg, 0.0, "energy")
print("levels:", depth_assign(tg))

params = NocParams()   # 2x2 mesh, 1 pJ per bit per switch and per link
ag = ArchGraph(params)
for m in (cdm_map(tg, ag), cwm_map(tg, ag)):
    report, tl = mapping_energy(tg, m.placement, params)
    print(m.algorithm, m.placement)
    print(f"  E_Dy {report.e_dynamic:.3e} J  E_St {report.e_static:.3e} J  makespan {tl.makespan} ns")
    for ev in tl.congestion:
        print("  waited", ev)
