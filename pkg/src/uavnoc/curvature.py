"""Ollivier-Ricci curvature and curvature-driven community discovery.

Curvature is computed on the undirected simplification of a dependency
graph. Each node's neighbourhood measure spreads ``1 - idleness`` uniformly
over its neighbours (and ``idleness`` on the node itself); the transport
distance between two measures is solved exactly as a min-cost flow.

Community discovery repeatedly cuts the most negatively curved edge,
recomputing curvature only on edges touching the removed edge's endpoints
(an approximation: distances further away may also change), then merges
small or surplus components by preferential attachment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

from .ddg import cluster_stats
from .noc import NocParams, mean_routers

Node = Hashable
EdgeKey = tuple


class IsolatedNodeError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborMeasure:
    base: Node
    support: tuple
    mass: tuple[float, ...]

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.mass))


@dataclass
class PartitionConfig:
    idleness: float = 0.0
    distance: str = "hop"            # "hop" | "weighted"
    min_size: int | None = None      # None -> max(1, ceil(|V| / (4 * target)))
    selection: str = "min-cut"       # "min-cut" | "max-q"
    bytes_per_weight_unit: float = 1.0
    noc: NocParams = field(default_factory=NocParams)

    def __post_init__(self):
        if not 0.0 <= self.idleness < 1.0:
            raise ValueError("idleness must be in [0, 1)")
        if self.distance not in ("hop", "weighted"):
            raise ValueError(f"unknown distance mode {self.distance!r}")
        if self.selection not in ("min-cut", "max-q"):
            raise ValueError(f"unknown selection rule {self.selection!r}")


@dataclass
class EnergyEstimate:
    per_cluster: dict[int, float]   # E_N_c
    communication: float            # E_L
    total: float                    # E

    @property
    def node_total(self) -> float:
        return sum(self.per_cluster.values())


@dataclass
class Partition:
    assignment: dict[Node, int]
    quality: float | None = None
    inter_cluster_weight: float = 0.0
    candidates: list[dict] = field(default_factory=list)

    @property
    def n_c(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> dict[int, list]:
        out: dict[int, list] = {}
        for n in sorted(self.assignment):
            out.setdefault(self.assignment[n], []).append(n)
        return out

    def to_dict(self) -> dict:
        return {
            "assignment": {str(n): c for n, c in sorted(self.assignment.items())},
            "n_c": self.n_c,
            "quality": self.quality,
            "inter_cluster_weight": self.inter_cluster_weight,
            "candidates": self.candidates,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Partition":
        return cls(
            assignment={int(k): int(v) for k, v in doc["assignment"].items()},
            quality=doc.get("quality"),
            inter_cluster_weight=doc.get("inter_cluster_weight", 0.0),
            candidates=list(doc.get("candidates", [])),
        )


def undirected_view(g: nx.Graph) -> nx.Graph:
    """Undirected simple graph; weights of antiparallel edges are summed."""
    h = nx.Graph()
    h.add_nodes_from(g.nodes(data=True))
    for u, v, w in g.edges(data="weight", default=1.0):
        if u == v:
            continue
        if h.has_edge(u, v):
            h[u][v]["weight"] += w
        else:
            h.add_edge(u, v, weight=w)
    return h


def _edge_key(u, v) -> EdgeKey:
    return (u, v) if u <= v else (v, u)


def neighbor_measure(g: nx.Graph, node: Node, idleness: float = 0.0) -> NeighborMeasure:
    nbrs = sorted(g.neighbors(node))
    if not nbrs:
        raise IsolatedNodeError(f"node {node!r} has no neighbours")
    share = (1.0 - idleness) / len(nbrs)
    support, mass = list(nbrs), [share] * len(nbrs)
    if idleness > 0:
        support.insert(0, node)
        mass.insert(0, idleness)
    return NeighborMeasure(node, tuple(support), tuple(mass))


def _length(d: Mapping) -> float:
    # heavier communication means closer
    w = d.get("weight", 1.0)
    return 1.0 / w if w > 0 else math.inf


def _distances(g: nx.Graph, sources: Iterable, targets: Sequence, mode: str) -> dict:
    sentinel = g.number_of_nodes()
    out = {}
    for s in sources:
        if mode == "hop":
            lengths = nx.single_source_shortest_path_length(g, s)
        else:
            lengths = nx.single_source_dijkstra_path_length(g, s, weight=lambda u, v, d: _length(d))
        for t in targets:
            d = lengths.get(t, math.inf)
            out[s, t] = sentinel if math.isinf(d) else d
    return out


def _integer_masses(mu: Sequence[float], nu: Sequence[float]) -> tuple[list[int], list[int], int]:
    fm = [Fraction(m).limit_denominator(10**6) for m in mu]
    fn = [Fraction(m).limit_denominator(10**6) for m in nu]
    if sum(fm) == sum(fn):
        scale = math.lcm(*(f.denominator for f in fm + fn))
        return [int(f * scale) for f in fm], [int(f * scale) for f in fn], scale
    # masses that are not simple rationals: fixed-point with the residue on the largest entry
    scale = 10**12
    a = [round(m * scale) for m in mu]
    b = [round(m * scale) for m in nu]
    b[max(range(len(b)), key=b.__getitem__)] += sum(a) - sum(b)
    return a, b, scale


def transport_cost(mu: Sequence[float], nu: Sequence[float], cost: Sequence[Sequence[float]]) -> float:
    """Exact optimal transport cost between two discrete measures (min-cost flow)."""
    a, b, scale = _integer_masses(mu, nu)
    flow = nx.DiGraph()
    for i, m in enumerate(a):
        flow.add_node(("s", i), demand=-m)
    for j, m in enumerate(b):
        flow.add_node(("t", j), demand=m)
    for i in range(len(a)):
        for j in range(len(b)):
            flow.add_edge(("s", i), ("t", j), weight=cost[i][j])
    value, _ = nx.network_simplex(flow)
    return value / scale


def wasserstein1(mu: NeighborMeasure, nu: NeighborMeasure, g: nx.Graph, distance: str = "hop") -> float:
    """W1 distance with shortest-path ground metric in ``g``.

    Supports in different components are ``|V|`` apart.
    """
    dist = _distances(g, mu.support, nu.support, distance)
    cost = [[dist[s, t] for t in nu.support] for s in mu.support]
    return transport_cost(mu.mass, nu.mass, cost)


def orc_edge(g: nx.Graph, u: Node, v: Node, idleness: float = 0.0, distance: str = "hop") -> float:
    mu = neighbor_measure(g, u, idleness)
    nu = neighbor_measure(g, v, idleness)
    if distance == "hop":
        d = 1.0
    else:
        d = nx.dijkstra_path_length(g, u, v, weight=lambda a, b, e: _length(e))
    return 1.0 - wasserstein1(mu, nu, g, distance) / d


def curvatures(g: nx.Graph, idleness: float = 0.0, distance: str = "hop") -> dict[EdgeKey, float]:
    return {_edge_key(u, v): orc_edge(g, u, v, idleness, distance) for u, v in g.edges}


def _refresh(h: nx.Graph, curv: dict, u, v, idleness: float, distance: str) -> None:
    touched = {_edge_key(a, b) for n in (u, v) for a, b in h.edges(n)}
    for key in touched:
        curv[key] = orc_edge(h, *key, idleness=idleness, distance=distance)


def remove_negative_loop(
    g: nx.Graph,
    curv: dict[EdgeKey, float] | None = None,
    idleness: float = 0.0,
    distance: str = "hop",
    tol: float = 1e-12,
) -> nx.Graph:
    """Cut the most negatively curved edge until no negative edge remains.

    Returns a pruned copy; ``pruned.graph["removed"]`` lists cut edges in
    order and ``pruned.graph["curvature"]`` holds the final curvatures.
    Equal curvatures resolve to the lowest edge key.
    """
    h = g.copy()
    curv = dict(curv) if curv is not None else curvatures(h, idleness, distance)
    removed = list(h.graph.get("removed", []))
    while curv:
        key = min(curv, key=lambda k: (curv[k], k))
        if curv[key] >= -tol:
            break
        h.remove_edge(*key)
        del curv[key]
        removed.append(key)
        _refresh(h, curv, *key, idleness, distance)
    h.graph["removed"] = removed
    h.graph["curvature"] = curv
    return h


def default_min_size(n_nodes: int, target_count: int) -> int:
    return max(1, math.ceil(n_nodes / (4 * target_count)))


def _split_until(h: nx.Graph, target: int, min_size: int, idleness: float, distance: str) -> None:
    """Keep cutting the least curved edge until ``target`` components reach ``min_size``.

    Only used when the negative-curvature cuts leave fewer than ``target``
    components. Ties prefer the lighter edge so the cut stays cheap.
    """
    curv = h.graph["curvature"]
    if nx.number_connected_components(h) >= target:
        return
    while curv:
        big = sum(1 for c in nx.connected_components(h) if len(c) >= min_size)
        if big >= target:
            return
        key = min(curv, key=lambda k: (curv[k], h.edges[k]["weight"], k))
        h.remove_edge(*key)
        del curv[key]
        h.graph["removed"].append(key)
        _refresh(h, curv, *key, idleness, distance)


def preferential_attachment(
    components: Iterable[Iterable[Node]],
    target_count: int,
    min_size: int,
    graph: nx.Graph,
) -> Partition:
    """Merge components into their most strongly tied neighbour until ``target_count`` remain.

    Components below ``min_size`` are absorbed first (smallest first), then
    the smallest remaining ones. Merging never goes below ``target_count``,
    so a small component can survive when the pruned graph had no more
    pieces to give. Attachment strength is the total edge weight to a
    community in ``graph``; ties go to the lowest id.
    """
    comps = sorted((sorted(c) for c in components), key=lambda c: c[0])
    n_nodes = sum(len(c) for c in comps)
    if target_count < 1:
        raise ValueError("target community count must be at least 1")
    if target_count > n_nodes:
        raise ValueError(f"target community count {target_count} exceeds node count {n_nodes}")
    members = {i: set(c) for i, c in enumerate(comps)}
    owner = {n: i for i, c in members.items() for n in c}

    def pick_victim():
        if len(members) <= target_count:
            return None
        small = [c for c in members if len(members[c]) < min_size]
        return min(small or members, key=lambda c: (len(members[c]), c))

    while (victim := pick_victim()) is not None:
        ties = {c: 0.0 for c in members if c != victim}
        for n in members[victim]:
            for m, w in graph[n].items():
                c = owner[m]
                if c != victim:
                    ties[c] += w.get("weight", 1.0)
        dest = min(ties, key=lambda c: (-ties[c], c))
        for n in members[victim]:
            owner[n] = dest
        members[dest] |= members.pop(victim)

    order = sorted(members, key=lambda c: min(members[c]))
    relabel = {c: i for i, c in enumerate(order)}
    return Partition({n: relabel[c] for n, c in owner.items()})


def estimate_energy(
    g: nx.Graph, assignment: Mapping[Node, int], config: PartitionConfig
) -> EnergyEstimate:
    """Pre-mapping energy estimate used by the quality function.

    Communication energy charges every cut bit the per-bit energy of an
    average route on the configured mesh. The reference total is the node
    energy plus the communication energy when every edge is cut, so the
    energy term ranks partitions by how much traffic they keep local.
    """
    noc = config.noc
    eta = mean_routers(noc.mesh_x, noc.mesh_y)
    per_bit = eta * noc.e_switch_bit + (eta - 1) * noc.e_link_bit
    bits_per_unit = 8.0 * config.bytes_per_weight_unit
    per_cluster: dict[int, float] = {}
    for n in g.nodes:
        c = assignment[n]
        per_cluster[c] = per_cluster.get(c, 0.0) + g.nodes[n].get("energy", 0.0)
    stats = cluster_stats(g, assignment)
    e_link = stats.cut * bits_per_unit * per_bit
    e_total = sum(per_cluster.values()) + stats.total * bits_per_unit * per_bit
    return EnergyEstimate(per_cluster, e_link, e_total)


def quality(g: nx.Graph, assignment: Mapping[Node, int], energies: EnergyEstimate) -> float:
    """Locality minus load imbalance minus normalised energy.

    With no edge weight at all the locality and balance terms are taken as 0.
    """
    if energies.total == 0:
        raise ValueError("total energy estimate is zero")
    stats = cluster_stats(g, assignment)
    structural = 0.0
    if stats.total > 0:
        mean = stats.mean_internal
        for c in stats.internal:
            wc, sc = stats.internal[c], stats.boundary[c]
            structural += (wc - sc) / stats.total - (wc - mean) ** 2 / stats.total
    return structural - (energies.node_total + energies.communication) / energies.total


def discover_communities(g: nx.Graph, core_count: int, config: PartitionConfig | None = None) -> Partition:
    """Curvature-based communities for every count in 2..core_count; keep the best.

    The default rule keeps the candidate with the least inter-cluster weight
    (ties: higher quality, then fewer communities); ``selection="max-q"``
    ranks by quality first. Every candidate is recorded in ``candidates``.
    """
    config = config or PartitionConfig()
    if core_count < 2:
        raise ValueError("core count must be at least 2")
    if g.number_of_nodes() == 0:
        raise ValueError("empty graph")
    h = undirected_view(g)
    n = h.number_of_nodes()
    pruned = remove_negative_loop(h, idleness=config.idleness, distance=config.distance)

    candidates = []
    for count in range(2, min(core_count, n) + 1):
        min_size = config.min_size or default_min_size(n, count)
        _split_until(pruned, count, min_size, config.idleness, config.distance)
        part = preferential_attachment(nx.connected_components(pruned), count, min_size, h)
        est = estimate_energy(h, part.assignment, config)
        part.quality = quality(h, part.assignment, est) if est.total > 0 else None
        part.inter_cluster_weight = cluster_stats(h, part.assignment).cut
        candidates.append((count, part))
    if not candidates:
        return Partition({v: 0 for v in h.nodes}, None, 0.0, [])

    def rank(item):
        _, p = item
        q = p.quality if p.quality is not None else -math.inf
        if config.selection == "max-q":
            return (-q, p.inter_cluster_weight, p.n_c)
        return (p.inter_cluster_weight, -q, p.n_c)

    _, best = min(candidates, key=rank)
    best.candidates = [
        {"count": c, "n_c": p.n_c, "inter_cluster_weight": p.inter_cluster_weight, "quality": p.quality}
        for c, p in candidates
    ]
    return best
