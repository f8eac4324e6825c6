"""Weighted data dependency graph built from a parsed trace.

Nodes are instruction line numbers. Each node carries its opcode, energy
group, latency, data size and energy estimate; each edge carries
``weight = latency * data_size`` of the producing instruction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import networkx as nx

from .trace import DependencyTables, EnergyTable, TraceProgram


def edge_weight(latency: float, data_size: float) -> float:
    if latency < 0 or data_size < 0:
        raise ValueError("latency and data size must be non-negative")
    return latency * data_size


def _add_edge(g: nx.DiGraph, u: int, v: int, weight: float, data_size: int, kind: str) -> None:
    # parallel dependencies between one pair collapse into a single edge
    if g.has_edge(u, v):
        g[u][v]["weight"] += weight
        g[u][v]["data_size"] += data_size
    else:
        g.add_edge(u, v, weight=weight, data_size=data_size, kind=kind)


def build_ddg(
    prog: TraceProgram,
    tables: DependencyTables,
    energy: EnergyTable,
    branch_edges: bool = True,
) -> nx.DiGraph:
    """One node per instruction, one edge per dependency-table entry.

    With ``branch_edges`` a ``br`` gets a control edge to the next executed
    instruction, weighted by the branch latency times one byte.
    """
    g = nx.DiGraph()
    for ins in prog:
        g.add_node(
            ins.line_no,
            opcode=ins.opcode,
            group=ins.group.value,
            latency=ins.latency,
            data_size=ins.data_size,
            energy=energy[ins.group],
        )
    for consumer in sorted(tables.dep_table):
        for dep in tables.dep_table[consumer]:
            _add_edge(g, dep.producer, consumer, edge_weight(dep.latency, dep.data_size), dep.data_size, "data")
    if branch_edges:
        for ins in prog:
            if ins.opcode == "br" and ins.line_no < len(prog):
                _add_edge(g, ins.line_no, ins.line_no + 1, edge_weight(ins.latency, 1), 1, "control")
    return g


def total_weight(g: nx.Graph) -> float:
    return sum(w for _, _, w in g.edges(data="weight", default=1.0))


@dataclass
class ClusterStats:
    internal: dict[int, float]   # W_c
    boundary: dict[int, float]   # S_c
    total: float                 # W
    cut: float

    @property
    def mean_internal(self) -> float:
        return sum(self.internal.values()) / len(self.internal) if self.internal else 0.0


def cluster_stats(g: nx.Graph, assignment: Mapping[int, int]) -> ClusterStats:
    missing = [n for n in g.nodes if n not in assignment]
    if missing:
        raise ValueError(f"partition does not cover nodes {missing[:5]}")
    communities = sorted(set(assignment[n] for n in g.nodes))
    internal = {c: 0.0 for c in communities}
    boundary = {c: 0.0 for c in communities}
    total = cut = 0.0
    for u, v, w in g.edges(data="weight", default=1.0):
        cu, cv = assignment[u], assignment[v]
        total += w
        if cu == cv:
            internal[cu] += w
        else:
            cut += w
            boundary[cu] += w
            boundary[cv] += w
    return ClusterStats(internal, boundary, total, cut)


def _fmt(x) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


def export_dot(g: nx.DiGraph, name: str = "G", node_label=None) -> str:
    """Render a graph as DOT with nodes and edges in sorted order."""
    lines = [f"digraph {name} {{"]
    for n in sorted(g.nodes):
        if node_label is not None:
            label = node_label(n, g.nodes[n])
        elif "opcode" in g.nodes[n]:
            label = f"{n}: {g.nodes[n]['opcode']}"
        else:
            label = str(n)
        lines.append(f'  "{n}" [label="{label}"];')
    for u, v in sorted(g.edges):
        d = g[u][v]
        w = d.get("weight", d.get("volume", ""))
        lines.append(f'  "{u}" -> "{v}" [label="{_fmt(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def ddg_to_dict(g: nx.DiGraph) -> dict:
    return {
        "nodes": [{"id": n, **g.nodes[n]} for n in sorted(g.nodes)],
        "edges": [{"source": u, "target": v, **g[u][v]} for u, v in sorted(g.edges)],
    }


def ddg_from_dict(doc: dict) -> nx.DiGraph:
    g = nx.DiGraph()
    for node in doc["nodes"]:
        attrs = dict(node)
        g.add_node(attrs.pop("id"), **attrs)
    for edge in doc["edges"]:
        attrs = dict(edge)
        g.add_edge(attrs.pop("source"), attrs.pop("target"), **attrs)
    return g


def dumps(g: nx.DiGraph) -> str:
    return json.dumps(ddg_to_dict(g), indent=2, sort_keys=True) + "\n"
