"""Cluster-level task graphs and their placement on mesh tiles.

Two placement strategies are provided. ``cdm_map`` walks the task graph
level by level (by longest-path depth from the roots) and places each level
to minimise volume-weighted path energy against everything already placed.
``cwm_map`` is the volume-only greedy baseline that ignores execution order.
Tiles left idle are power gated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import permutations
from typing import Mapping

import networkx as nx

from .noc import NocParams, Tile, xy_route


class CapacityError(ValueError):
    pass


class ArchGraph:
    """Mesh tiles with XY routing paths and per-bit path energies."""

    def __init__(self, params: NocParams):
        self.params = params
        self.tiles: list[Tile] = params.tiles
        self._energy = {
            (a, b): params.path_energy_per_bit(xy_route(params, a, b).routers)
            for a in self.tiles
            for b in self.tiles
        }

    def path_energy(self, a: Tile, b: Tile) -> float:
        """e(p): joules per bit from tile ``a`` to tile ``b``."""
        return self._energy[a, b]

    def links(self, a: Tile, b: Tile):
        return xy_route(self.params, a, b).links


@dataclass
class TileMapping:
    placement: dict[int, Tile]
    gated: list[Tile]
    mesh: tuple[int, int]
    algorithm: str = ""

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "mesh": list(self.mesh),
            "placement": {str(c): list(t) for c, t in sorted(self.placement.items())},
            "gated": [list(t) for t in self.gated],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TileMapping":
        return cls(
            placement={int(c): tuple(t) for c, t in doc["placement"].items()},
            gated=[tuple(t) for t in doc["gated"]],
            mesh=tuple(doc["mesh"]),
            algorithm=doc.get("algorithm", ""),
        )


def build_task_graph(
    g: nx.DiGraph,
    assignment: Mapping[int, int],
    ns_per_cycle: float = 1.0,
) -> nx.DiGraph:
    """Aggregate a partitioned dependency graph into a cluster DAG.

    Edge volume is the summed producer data size, in bits, of every cut
    dependency between two clusters. Clusters that depend on each other in
    a cycle are merged (with a warning); ``tg.graph["merged"]`` maps every
    original community to its task node.
    """
    comm = nx.DiGraph()
    comm.add_nodes_from(sorted(set(assignment[n] for n in g.nodes)))
    for u, v, d in g.edges(data=True):
        cu, cv = assignment[u], assignment[v]
        if cu != cv:
            comm.add_edge(cu, cv)
    rename = {c: c for c in comm.nodes}
    for scc in nx.strongly_connected_components(comm):
        if len(scc) > 1:
            keep = min(scc)
            warnings.warn(f"communities {sorted(scc)} depend on each other; merged into {keep}")
            for c in scc:
                rename[c] = keep

    tg = nx.DiGraph()
    for n in sorted(g.nodes):
        c = rename[assignment[n]]
        if c not in tg:
            tg.add_node(c, members=[], energy=0.0, cycles=0)
        attrs = tg.nodes[c]
        attrs["members"].append(n)
        attrs["energy"] += g.nodes[n].get("energy", 0.0)
        attrs["cycles"] += g.nodes[n].get("latency", 0)
    for c in tg.nodes:
        tg.nodes[c]["exec_time"] = math.ceil(tg.nodes[c]["cycles"] * ns_per_cycle)
    for u, v, d in sorted(g.edges(data=True), key=lambda e: (e[0], e[1])):
        cu, cv = rename[assignment[u]], rename[assignment[v]]
        if cu == cv:
            continue
        bits = 8 * d.get("data_size", 0)
        if tg.has_edge(cu, cv):
            tg[cu][cv]["volume"] += bits
        else:
            tg.add_edge(cu, cv, volume=bits)
    for u, v in tg.edges:
        t = max(tg.nodes[u]["exec_time"], 1)
        tg[u][v]["bandwidth"] = tg[u][v]["volume"] / (t * 1e-9)
    tg.graph["merged"] = {c: rename[c] for c in sorted(rename)}
    return tg


def depth_assign(tg: nx.DiGraph) -> dict[int, int]:
    """Longest path, in edges, from any root to each cluster."""
    if not nx.is_directed_acyclic_graph(tg):
        raise ValueError("task graph has a cycle")
    depth = {}
    for c in nx.lexicographical_topological_sort(tg):
        depth[c] = max((depth[p] + 1 for p in tg.predecessors(c)), default=0)
    return depth


def _volumes(tg: nx.DiGraph, c) -> float:
    return sum(d["volume"] for *_, d in tg.in_edges(c, data=True)) + sum(
        d["volume"] for *_, d in tg.out_edges(c, data=True)
    )


def _incremental(tg, ag, cluster, tile, placement) -> float:
    e = 0.0
    for _, v, d in tg.out_edges(cluster, data=True):
        if v in placement:
            e += d["volume"] * ag.path_energy(tile, placement[v])
    for u, _, d in tg.in_edges(cluster, data=True):
        if u in placement:
            e += d["volume"] * ag.path_energy(placement[u], tile)
    return e


def level_energy(tg: nx.DiGraph, ag: ArchGraph, placement: Mapping[int, Tile]) -> float:
    """Sum of volume * e(p) over edges whose endpoints are both placed."""
    return sum(
        d["volume"] * ag.path_energy(placement[u], placement[v])
        for u, v, d in sorted(tg.edges(data=True), key=lambda e: (e[0], e[1]))
        if u in placement and v in placement
    )


def _better(cost: float, best: float) -> bool:
    return cost < best - 1e-9 * max(abs(best), 1e-30)


def _place_level(tg, ag, level: list, placement: dict, available: list, limit: int) -> None:
    k, m = len(level), len(available)
    if math.perm(m, k) <= limit:
        # incremental cost of a level assignment = edges touching the level
        base = dict(placement)
        best, best_tiles = math.inf, None
        for tiles in permutations(available, k):
            trial = dict(base)
            trial.update(zip(level, tiles))
            cost = 0.0
            for c, t in zip(level, tiles):
                for _, v, d in tg.out_edges(c, data=True):
                    if v in trial:
                        cost += d["volume"] * ag.path_energy(t, trial[v])
                for u, _, d in tg.in_edges(c, data=True):
                    if u in base:
                        cost += d["volume"] * ag.path_energy(base[u], t)
            if best_tiles is None or _better(cost, best):
                best, best_tiles = cost, tiles
        placement.update(zip(level, best_tiles))
    else:
        for c in sorted(level, key=lambda c: (-_volumes(tg, c), c)):
            free = [t for t in available if t not in placement.values()]
            tile = _best_tile(tg, ag, c, free, placement)
            placement[c] = tile


def _best_tile(tg, ag, cluster, free, placement) -> Tile:
    best, best_tile = math.inf, None
    for t in free:
        cost = _incremental(tg, ag, cluster, t, placement)
        if best_tile is None or _better(cost, best):
            best, best_tile = cost, t
    return best_tile


def _finish(placement: dict, ag: ArchGraph, algorithm: str) -> TileMapping:
    used = set(placement.values())
    gated = [t for t in ag.tiles if t not in used]
    return TileMapping(dict(sorted(placement.items())), gated, (ag.params.mesh_x, ag.params.mesh_y), algorithm)


def _check_capacity(tg: nx.DiGraph, ag: ArchGraph) -> None:
    if tg.number_of_nodes() > len(ag.tiles):
        raise CapacityError(f"{tg.number_of_nodes()} clusters do not fit on {len(ag.tiles)} tiles")


def cdm_map(tg: nx.DiGraph, ag: ArchGraph, exhaustive_limit: int = 10**6) -> TileMapping:
    """Depth-ordered placement.

    The root with the largest outgoing volume goes to (0,0); any other roots
    join the depth-1 round. Each round is placed exhaustively when the number
    of tile assignments is at most ``exhaustive_limit``, greedily otherwise.
    """
    _check_capacity(tg, ag)
    if tg.number_of_nodes() == 0:
        return _finish({}, ag, "cdm")
    depth = depth_assign(tg)
    levels: dict[int, list] = {}
    for c in sorted(depth):
        levels.setdefault(depth[c], []).append(c)
    roots = levels.pop(0)
    out_vol = {c: sum(d["volume"] for *_, d in tg.out_edges(c, data=True)) for c in roots}
    first = min(roots, key=lambda c: (-out_vol[c], c))
    placement = {first: (0, 0)}
    extra = [c for c in roots if c != first]
    if extra:
        levels[1] = sorted(extra + levels.get(1, []))
    for d in sorted(levels):
        available = [t for t in ag.tiles if t not in placement.values()]
        _place_level(tg, ag, levels[d], placement, available, exhaustive_limit)
    return _finish(placement, ag, "cdm")


def cwm_map(tg: nx.DiGraph, ag: ArchGraph) -> TileMapping:
    """Greedy placement by descending communication volume, order-agnostic."""
    _check_capacity(tg, ag)
    placement: dict[int, Tile] = {}
    for c in sorted(tg.nodes, key=lambda c: (-_volumes(tg, c), c)):
        free = [t for t in ag.tiles if t not in placement.values()]
        placement[c] = _best_tile(tg, ag, c, free, placement)
    return _finish(placement, ag, "cwm")


def task_graph_to_dict(tg: nx.DiGraph) -> dict:
    depth = depth_assign(tg) if tg.number_of_nodes() else {}
    return {
        "nodes": [
            {"id": c, "depth": depth[c], **{k: tg.nodes[c][k] for k in sorted(tg.nodes[c])}}
            for c in sorted(tg.nodes)
        ],
        "edges": [{"source": u, "target": v, **tg[u][v]} for u, v in sorted(tg.edges)],
        "merged": {str(k): v for k, v in tg.graph.get("merged", {}).items()},
    }


def task_graph_from_dict(doc: dict) -> nx.DiGraph:
    tg = nx.DiGraph()
    for node in doc["nodes"]:
        attrs = {k: v for k, v in node.items() if k not in ("id", "depth")}
        tg.add_node(node["id"], **attrs)
    for e in doc["edges"]:
        tg.add_edge(e["source"], e["target"], **{k: v for k, v in e.items() if k not in ("source", "target")})
    tg.graph["merged"] = {int(k): v for k, v in doc.get("merged", {}).items()}
    return tg


def task_graph_dot(tg: nx.DiGraph) -> str:
    from .ddg import export_dot

    depth = depth_assign(tg) if tg.number_of_nodes() else {}
    return export_dot(tg, name="TG", node_label=lambda c, a: f"c{c} depth={depth[c]}")
