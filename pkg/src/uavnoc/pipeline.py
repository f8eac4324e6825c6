"""End-to-end pipeline: trace -> DDG -> communities -> task graph -> mapping -> simulation.

Every artifact is written as sorted, indented JSON (or DOT/CSV with sorted
rows) so two runs on the same inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from .config import PipelineConfig
from .curvature import Partition, discover_communities
from .ddg import build_ddg, ddg_from_dict, ddg_to_dict, export_dot
from .mapping import (
    ArchGraph,
    TileMapping,
    build_task_graph,
    cdm_map,
    cwm_map,
    task_graph_dot,
    task_graph_from_dict,
    task_graph_to_dict,
)
from .noc import Timeline, mapping_energy
from .trace import build_tables, parse_trace

log = logging.getLogger(__name__)


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def task_graph_digest(tg: nx.DiGraph) -> str:
    """SHA-256 of the canonical task-graph JSON; identifies the workload of a report."""
    return hashlib.sha256(dump_json(task_graph_to_dict(tg)).encode()).hexdigest()


def trace_to_ddg(text: str, config: PipelineConfig):
    prog = parse_trace(text, latencies=config.latency or None)
    tables = build_tables(prog)
    return build_ddg(prog, tables, config.energy, branch_edges=config.branch_edges), tables


def partition_ddg(g: nx.DiGraph, config: PipelineConfig) -> Partition:
    return discover_communities(g, config.core_count, config.partition)


def map_task_graph(tg: nx.DiGraph, algorithm: str, config: PipelineConfig) -> TileMapping:
    ag = ArchGraph(config.noc)
    if algorithm == "cdm":
        return cdm_map(tg, ag, config.exhaustive_limit)
    if algorithm == "cwm":
        return cwm_map(tg, ag)
    raise ValueError(f"unknown mapping algorithm {algorithm!r}")


def energy_report(tg: nx.DiGraph, mapping: TileMapping, config: PipelineConfig) -> tuple[dict, Timeline]:
    report, tl = mapping_energy(tg, mapping.placement, config.noc)
    doc = {
        "algorithm": mapping.algorithm,
        "task_graph": task_graph_digest(tg),
        "energy": report.validate().to_dict(),
        "makespan_ns": tl.makespan,
        "congestion": [
            {"src": e.src, "dst": e.dst, "wait_ns": e.wait, "bits": e.bits, "location": e.location, "start_ns": e.start}
            for e in tl.congestion
        ],
        "packets": [
            {"src": p.src, "dst": p.dst, "bits": p.bits, "routers": p.route.routers,
             "ready_ns": p.ready, "inject_ns": p.inject, "tail_ns": p.tail}
            for p in tl.packets
        ],
    }
    return doc, tl


def _pct(new: float, old: float) -> float | None:
    if old == 0:
        return 0.0 if new == 0 else None
    return 100.0 * (new - old) / old


def compare_mappings(base: dict, other: dict) -> dict:
    """Percent change of ``other`` relative to ``base`` (absolute deltas alongside)."""
    if base["task_graph"] != other["task_graph"]:
        raise ValueError("reports describe different task graphs")
    out = {"base": base["algorithm"], "other": other["algorithm"], "task_graph": base["task_graph"]}
    for key in ("e_dynamic", "e_static", "e_noc", "e_total"):
        a, b = base["energy"][key], other["energy"][key]
        out[f"delta_{key}"] = b - a
        out[f"delta_{key}_pct"] = _pct(b, a)
    out["delta_makespan_ns"] = other["makespan_ns"] - base["makespan_ns"]
    return out


@dataclass
class PipelineResult:
    ddg: nx.DiGraph
    partition: Partition
    task_graph: nx.DiGraph
    mappings: dict[str, TileMapping] = field(default_factory=dict)
    reports: dict[str, dict] = field(default_factory=dict)
    timelines: dict[str, Timeline] = field(default_factory=dict)
    comparison: dict | None = None


def run_pipeline(trace_text: str, config: PipelineConfig, out_dir: str | Path | None = None) -> PipelineResult:
    g, tables = trace_to_ddg(trace_text, config)
    log.info("ddg: %d nodes, %d edges", g.number_of_nodes(), g.number_of_edges())
    part = partition_ddg(g, config)
    log.info("partition: %d communities, cut weight %g", part.n_c, part.inter_cluster_weight)
    tg = build_task_graph(g, part.assignment, config.ns_per_cycle)
    res = PipelineResult(g, part, tg)
    for alg in config.algorithms:
        m = map_task_graph(tg, alg, config)
        doc, tl = energy_report(tg, m, config)
        res.mappings[alg], res.reports[alg], res.timelines[alg] = m, doc, tl
        log.info("%s: E_NoC %.4g J, makespan %d ns", alg, doc["energy"]["e_noc"], tl.makespan)
    if len(res.reports) == 2:
        res.comparison = compare_mappings(res.reports["cdm"], res.reports["cwm"])
    if out_dir is not None:
        write_outputs(res, tables.format(), Path(out_dir))
    return res


def write_outputs(res: PipelineResult, tables_text: str, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "tables.txt").write_text(tables_text)
    (out / "ddg.json").write_text(dump_json(ddg_to_dict(res.ddg)))
    (out / "ddg.dot").write_text(export_dot(res.ddg))
    (out / "partition.json").write_text(dump_json(res.partition.to_dict()))
    (out / "taskgraph.json").write_text(dump_json(task_graph_to_dict(res.task_graph)))
    (out / "taskgraph.dot").write_text(task_graph_dot(res.task_graph))
    for alg, m in res.mappings.items():
        (out / f"mapping_{alg}.json").write_text(dump_json(m.to_dict()))
        (out / f"timeline_{alg}.csv").write_text(res.timelines[alg].to_csv())
        (out / f"energy_{alg}.json").write_text(dump_json(res.reports[alg]))
    if res.comparison is not None:
        (out / "comparison.json").write_text(dump_json(res.comparison))


def load_ddg(path: str | Path) -> nx.DiGraph:
    return ddg_from_dict(json.loads(Path(path).read_text()))


def load_task_graph(path: str | Path) -> nx.DiGraph:
    return task_graph_from_dict(json.loads(Path(path).read_text()))
