"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 invalid input (trace syntax,
configuration, or mesh capacity).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .curvature import Partition
from .ddg import export_dot, ddg_to_dict
from .mapping import CapacityError, TileMapping, build_task_graph, task_graph_dot, task_graph_to_dict
from .pipeline import (
    compare_mappings,
    dump_json,
    energy_report,
    load_ddg,
    load_task_graph,
    map_task_graph,
    partition_ddg,
    run_pipeline,
    trace_to_ddg,
)
from .trace import TraceSyntaxError
from .workload import gen_pd_trace

log = logging.getLogger("uavnoc")


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def cmd_gen(args) -> None:
    text = gen_pd_trace(args.steps, seed=args.seed)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_parse(args) -> None:
    config = load_config(args.config)
    g, tables = trace_to_ddg(Path(args.trace).read_text(), config)
    out = Path(args.out)
    _write(out, "tables.txt", tables.format())
    _write(out, "ddg.json", dump_json(ddg_to_dict(g)))
    _write(out, "ddg.dot", export_dot(g))


def cmd_partition(args) -> None:
    config = load_config(args.config)
    part = partition_ddg(load_ddg(args.ddg), config)
    _write(Path(args.out), "partition.json", dump_json(part.to_dict()))


def cmd_map(args) -> None:
    config = load_config(args.config)
    g = load_ddg(args.ddg)
    part = Partition.from_dict(json.loads(Path(args.partition).read_text()))
    tg = build_task_graph(g, part.assignment, config.ns_per_cycle)
    out = Path(args.out)
    _write(out, "taskgraph.json", dump_json(task_graph_to_dict(tg)))
    _write(out, "taskgraph.dot", task_graph_dot(tg))
    algs = config.algorithms if args.algorithm is None else (["cdm", "cwm"] if args.algorithm == "both" else [args.algorithm])
    for alg in algs:
        _write(out, f"mapping_{alg}.json", dump_json(map_task_graph(tg, alg, config).to_dict()))


def cmd_simulate(args) -> None:
    config = load_config(args.config)
    tg = load_task_graph(args.taskgraph)
    m = TileMapping.from_dict(json.loads(Path(args.mapping).read_text()))
    if tuple(m.mesh) != (config.noc.mesh_x, config.noc.mesh_y):
        raise ConfigError(f"mapping is for a {m.mesh[0]}x{m.mesh[1]} mesh, config has {config.noc.mesh_x}x{config.noc.mesh_y}")
    doc, tl = energy_report(tg, m, config)
    alg = m.algorithm or "custom"
    out = Path(args.out)
    _write(out, f"timeline_{alg}.csv", tl.to_csv())
    _write(out, f"energy_{alg}.json", dump_json(doc))


def cmd_run(args) -> None:
    config = load_config(args.config)
    if args.trace is None:
        text = gen_pd_trace(args.steps, seed=args.seed)
        _write(Path(args.out), "trace.ll", text)
    else:
        text = Path(args.trace).read_text()
    res = run_pipeline(text, config, args.out)
    for alg, doc in res.reports.items():
        e = doc["energy"]
        print(f"{alg}: E_dyn={e['e_dynamic']:.6g} J  E_st={e['e_static']:.6g} J  "
              f"E_noc={e['e_noc']:.6g} J  makespan={doc['makespan_ns']} ns")


def cmd_compare(args) -> None:
    a = json.loads(Path(args.base).read_text())
    b = json.loads(Path(args.other).read_text())
    try:
        doc = compare_mappings(a, b)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = dump_json(doc)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavnoc", description="Curvature-based partitioning and NoC mapping of IR traces.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="emit an unrolled PD-controller trace")
    s.add_argument("--steps", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("parse", help="trace -> dependency tables and DDG")
    s.add_argument("trace")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("partition", help="DDG -> communities")
    s.add_argument("ddg")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("map", help="DDG + communities -> task graph and tile mapping")
    s.add_argument("ddg")
    s.add_argument("partition")
    s.add_argument("--config", required=True)
    s.add_argument("--algorithm", choices=["cdm", "cwm", "both"])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("simulate", help="task graph + mapping -> timeline and energy report")
    s.add_argument("taskgraph")
    s.add_argument("mapping")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("run", help="full pipeline on one trace (generated when omitted)")
    s.add_argument("trace", nargs="?")
    s.add_argument("--steps", type=int, default=2, help="PD steps to generate when no trace is given")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("compare", help="percent deltas between two energy reports")
    s.add_argument("base")
    s.add_argument("other")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ConfigError, TraceSyntaxError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
