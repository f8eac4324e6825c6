"""2D-mesh interconnect: XY routes, bit energy, and a wormhole timing simulation.

Time is integer nanoseconds. A packet of ``flits`` flits crossing ``eta``
routers sees its head after ``eta * t_switch + (eta - 1) * t_link`` and its
tail ``(flits - 1) * flit_cycle`` later. From injection until its tail is
delivered a packet holds every directed link on its route; a link doubles as
the input buffer of the tile it enters, so the last link is the destination
input port the packet arrives on. ``port_model`` can add a shared ejection
port per tile ("eject") or a single buffer per router ("router"). A packet
whose resources are busy waits, and the wait is a congestion interval charged
at ``p_static`` joules per bit per ns.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Iterable, Mapping

import networkx as nx

Tile = tuple[int, int]


@dataclass
class NocParams:
    mesh_x: int = 2
    mesh_y: int = 2
    e_switch_bit: float = 1e-12     # J/bit per router
    e_link_bit: float = 1e-12       # J/bit per link
    p_static: float = 1e-12         # J/(bit*ns) while buffered
    t_switch: int = 2               # ns
    t_link: int = 1                 # ns
    flit_size: int = 1              # bits
    flit_cycle: int = 1             # ns per flit
    default_exec_time: int = 10     # ns, clusters without an execution time
    contention: bool = True
    link_mode: str = "directed"     # "directed" | "undirected"
    send_order: str = "dest-id"     # "dest-id" | "declaration"
    port_model: str = "input"       # "input" | "eject" | "router"
    source_release: str = "injected"  # next packet after last flit leaves ("injected") or arrives ("tail")

    def __post_init__(self):
        if self.mesh_x < 1 or self.mesh_y < 1:
            raise ValueError("mesh dimensions must be positive")
        if self.link_mode not in ("directed", "undirected"):
            raise ValueError(f"unknown link mode {self.link_mode!r}")
        if self.send_order not in ("dest-id", "declaration"):
            raise ValueError(f"unknown send order {self.send_order!r}")
        if self.port_model not in ("input", "eject", "router"):
            raise ValueError(f"unknown port model {self.port_model!r}")
        if self.source_release not in ("injected", "tail"):
            raise ValueError(f"unknown source release rule {self.source_release!r}")

    @property
    def tiles(self) -> list[Tile]:
        return sorted(product(range(self.mesh_x), range(self.mesh_y)))

    def path_energy_per_bit(self, routers: int) -> float:
        return routers * self.e_switch_bit + (routers - 1) * self.e_link_bit


@dataclass(frozen=True)
class Route:
    tiles: tuple[Tile, ...]

    @property
    def routers(self) -> int:
        return len(self.tiles)

    @property
    def links(self) -> list[tuple[Tile, Tile]]:
        return list(zip(self.tiles, self.tiles[1:]))


def _check_tile(t: Tile, mesh_x: int, mesh_y: int) -> None:
    if not (0 <= t[0] < mesh_x and 0 <= t[1] < mesh_y):
        raise ValueError(f"tile {t} is off the {mesh_x}x{mesh_y} mesh")


def xy_route(mesh: tuple[int, int] | NocParams, src: Tile, dst: Tile) -> Route:
    """Dimension-ordered route: walk the first coordinate, then the second."""
    mx, my = (mesh.mesh_x, mesh.mesh_y) if isinstance(mesh, NocParams) else mesh
    src, dst = tuple(src), tuple(dst)
    _check_tile(src, mx, my)
    _check_tile(dst, mx, my)
    x, y = src
    path = [(x, y)]
    while x != dst[0]:
        x += 1 if dst[0] > x else -1
        path.append((x, y))
    while y != dst[1]:
        y += 1 if dst[1] > y else -1
        path.append((x, y))
    return Route(tuple(path))


def mean_routers(mesh_x: int, mesh_y: int) -> float:
    """Average router count over ordered pairs of distinct tiles (1.0 on a single tile)."""
    tiles = list(product(range(mesh_x), range(mesh_y)))
    pairs = [(a, b) for a in tiles for b in tiles if a != b]
    if not pairs:
        return 1.0
    return sum(abs(a[0] - b[0]) + abs(a[1] - b[1]) + 1 for a, b in pairs) / len(pairs)


def packet_energy(bits: float, routers: int, e_switch_bit: float, e_link_bit: float) -> float:
    return bits * (routers * e_switch_bit + (routers - 1) * e_link_bit)


def dynamic_energy(packets: Iterable[tuple[float, int]], e_switch_bit: float, e_link_bit: float) -> float:
    """Sum of bit energies for ``(bits, routers)`` pairs."""
    return sum(packet_energy(bits, eta, e_switch_bit, e_link_bit) for bits, eta in packets)


@dataclass
class Packet:
    pid: int
    src: int
    dst: int
    bits: int
    flits: int
    route: Route
    ready: int | None = None
    inject: int | None = None
    head: int | None = None
    tail: int | None = None


@dataclass(frozen=True)
class CongestionEvent:
    pid: int
    src: int
    dst: int
    wait: int          # ns blocked
    bits: int          # size of the blocked packet
    location: str      # input port that was busy
    start: int = 0


@dataclass
class Timeline:
    start: dict[int, int] = field(default_factory=dict)
    finish: dict[int, int] = field(default_factory=dict)
    packets: list[Packet] = field(default_factory=list)
    congestion: list[CongestionEvent] = field(default_factory=list)

    @property
    def makespan(self) -> int:
        times = list(self.finish.values()) + [p.tail for p in self.packets]
        return max(times, default=0)

    def packet(self, src: int, dst: int) -> Packet:
        return next(p for p in self.packets if p.src == src and p.dst == dst)

    def congestion_for(self, src: int, dst: int) -> int:
        return sum(e.wait for e in self.congestion if e.src == src and e.dst == dst)

    def to_csv(self) -> str:
        rows = []
        for c in sorted(self.start):
            rows.append((self.start[c], 1, "cluster_start", f"cluster {c}"))
            rows.append((self.finish[c], 0, "cluster_finish", f"cluster {c}"))
        for p in self.packets:
            loc = f"{p.src}->{p.dst} {_fmt_tile(p.route.tiles[0])}->{_fmt_tile(p.route.tiles[-1])}"
            rows.append((p.inject, 2, "packet_inject", loc))
            rows.append((p.head, 3, "packet_head", loc))
            rows.append((p.tail, 0, "packet_tail", loc))
        for e in self.congestion:
            rows.append((e.start, 2, "congestion_begin", f"{e.src}->{e.dst} at {e.location}"))
            rows.append((e.start + e.wait, 2, "congestion_end", f"{e.src}->{e.dst} at {e.location}"))
        rows.sort()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["event", "time_ns", "location"])
        for t, _, ev, loc in rows:
            w.writerow([ev, t, loc])
        return buf.getvalue()


def _fmt_tile(t: Tile) -> str:
    return f"({t[0]},{t[1]})"


def _resources(route: Route, params: NocParams) -> list[tuple]:
    res = []
    for a, b in route.links:
        if params.link_mode == "undirected":
            res.append(("link",) + tuple(sorted((a, b))))
        else:
            res.append(("link", a, b))
        if params.port_model == "router":
            res.append(("port", b))
    if params.port_model == "eject":
        res.append(("eject", route.tiles[-1]))
    return res


def _describe(resource: tuple) -> str:
    if resource[0] == "eject":
        return f"{_fmt_tile(resource[1])} local"
    if resource[0] == "port":
        return f"{_fmt_tile(resource[1])} input"
    return f"{_fmt_tile(resource[2])} from {_fmt_tile(resource[1])}"


def simulate(tg: nx.DiGraph, placement: Mapping[int, Tile], params: NocParams) -> Timeline:
    """Event-driven execution of a mapped task graph.

    A cluster starts once every inbound packet's tail has arrived, runs for
    its ``exec_time``, then sends its outbound packets one after another:
    the next packet is ready once the previous one's last flit has left the
    source (``source_release="injected"``) or has been delivered
    (``"tail"``). Same-time events resolve as: deliveries, then cluster
    completions, then freed sources, then waiting packets in (ready time,
    packet id) order. With ``params.contention`` off, packets
    never wait and a source sends all of its packets at once.
    """
    for c in tg.nodes:
        if c not in placement:
            raise ValueError(f"cluster {c} is not placed")
    packets: list[Packet] = []
    for pid, (u, v) in enumerate(sorted(tg.edges)):
        bits = tg[u][v]["volume"]
        if bits <= 0:
            raise ValueError(f"packet {u}->{v} has non-positive size")
        route = xy_route(params, placement[u], placement[v])
        packets.append(Packet(pid, u, v, int(bits), math.ceil(bits / params.flit_size), route))

    outbound: dict[int, list[Packet]] = {c: [] for c in tg.nodes}
    if params.send_order == "declaration":
        for u, v in tg.edges:
            outbound[u].append(next(p for p in packets if p.src == u and p.dst == v))
    else:
        for p in packets:
            outbound[p.src].append(p)   # already ascending by destination
    pending_in = {c: tg.in_degree(c) for c in tg.nodes}
    exec_time = {c: int(tg.nodes[c].get("exec_time", params.default_exec_time)) for c in tg.nodes}

    tl = Timeline()
    events: list[tuple] = []   # (time, rank, id); rank 0 delivery, 1 cluster finish, 2 source free
    busy: set = set()
    holding: dict[int, list] = {}
    waiting: list[Packet] = []
    first_block: dict[int, str] = {}

    def start_cluster(c, t):
        tl.start[c] = t
        tl.finish[c] = t + exec_time[c]
        heapq.heappush(events, (tl.finish[c], 1, c))

    for c in sorted(tg.nodes):
        if pending_in[c] == 0:
            start_cluster(c, 0)

    def release(c, t):
        queue = outbound[c]
        if not queue:
            return
        if params.contention:
            p = queue.pop(0)
            p.ready = t
            waiting.append(p)
        else:
            for p in queue:
                p.ready = t
                waiting.append(p)
            queue.clear()

    def grant(p, t):
        p.inject = t
        p.head = t + p.route.routers * params.t_switch + (p.route.routers - 1) * params.t_link
        p.tail = p.head + (p.flits - 1) * params.flit_cycle
        tl.packets.append(p)
        if p.inject > p.ready:
            tl.congestion.append(
                CongestionEvent(p.pid, p.src, p.dst, p.inject - p.ready, p.bits, first_block[p.pid], p.ready)
            )
        heapq.heappush(events, (p.tail, 0, p.pid))
        if params.contention and params.source_release == "injected":
            heapq.heappush(events, (t + p.flits * params.flit_cycle, 2, p.src))

    by_pid = {p.pid: p for p in packets}
    while events or waiting:
        if not events:
            raise RuntimeError("deadlock: packets waiting with no pending events")
        now = events[0][0]
        while events and events[0][0] == now:
            _, rank, ident = heapq.heappop(events)
            if rank == 0:
                p = by_pid[ident]
                busy.difference_update(holding.pop(p.pid, []))
                pending_in[p.dst] -= 1
                if pending_in[p.dst] == 0:
                    start_cluster(p.dst, now)
                if params.contention and params.source_release == "tail":
                    release(p.src, now)
            else:
                release(ident, now)
        waiting.sort(key=lambda p: (p.ready, p.pid))
        still = []
        for p in waiting:
            if not params.contention:
                grant(p, now)
                continue
            need = _resources(p.route, params)
            blocked = next((r for r in need if r in busy), None)
            if blocked is None:
                busy.update(need)
                holding[p.pid] = need
                grant(p, now)
            else:
                first_block.setdefault(p.pid, _describe(blocked))
                still.append(p)
        waiting = still
    tl.packets.sort(key=lambda p: p.pid)
    return tl


def static_energy(events: Iterable[CongestionEvent], p_static: float) -> float:
    return sum(p_static * e.bits * e.wait for e in events)


@dataclass
class EnergyReport:
    e_dynamic: float
    e_static: float
    e_noc: float
    e_nodes: float
    e_total: float

    def validate(self) -> "EnergyReport":
        if self.e_noc != self.e_static + self.e_dynamic:
            raise ValueError("interconnect energy is not static + dynamic")
        if self.e_total != self.e_nodes + self.e_noc:
            raise ValueError("chip energy is not node + interconnect energy")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "EnergyReport":
        return cls(**{k: float(doc[k]) for k in ("e_dynamic", "e_static", "e_noc", "e_nodes", "e_total")}).validate()


def chip_energy(node_energies: Iterable[float] | float, e_dynamic: float, e_static: float) -> EnergyReport:
    e_nodes = float(node_energies) if isinstance(node_energies, (int, float)) else float(sum(node_energies))
    e_noc = e_static + e_dynamic
    return EnergyReport(e_dynamic, e_static, e_noc, e_nodes, e_nodes + e_noc)


def mapping_energy(tg: nx.DiGraph, placement: Mapping[int, Tile], params: NocParams, timeline: Timeline | None = None):
    """Simulate (unless a timeline is given) and assemble the chip energy report."""
    tl = timeline or simulate(tg, placement, params)
    e_dyn = dynamic_energy(
        ((tg[u][v]["volume"], xy_route(params, placement[u], placement[v]).routers) for u, v in sorted(tg.edges)),
        params.e_switch_bit,
        params.e_link_bit,
    )
    e_st = static_energy(tl.congestion, params.p_static)
    nodes = [tg.nodes[c].get("energy", 0.0) for c in sorted(tg.nodes)]
    return chip_energy(nodes, e_dyn, e_st), tl
