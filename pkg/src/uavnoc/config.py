"""Pipeline configuration loaded from a JSON file.

Every key below is required; ``configs/default.json`` ships the values
used in the worked mapping example.

    mesh.x, mesh.y              tiles along each mesh dimension
    core_count                  upper bound on the number of communities
    ns_per_cycle                converts summed instruction latency to ns
    branch_edges                add control edges after branches
    energy_table.{M,B,D,G}      J per instruction of each group
    latency                     per-opcode cycle overrides (may be empty)
    noc.*                       see NocParams
    partition.*                 see PartitionConfig
    mapping.algorithm           "cdm" | "cwm" | "both"
    mapping.exhaustive_limit    largest per-level search done exhaustively
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .curvature import PartitionConfig
from .noc import NocParams
from .trace import OPCODES, EnergyTable, InstructionGroup


class ConfigError(ValueError):
    pass


_NOC_KEYS = (
    "e_switch_bit", "e_link_bit", "p_static", "t_switch", "t_link", "flit_size",
    "flit_cycle", "default_exec_time", "contention", "link_mode", "port_model",
    "send_order", "source_release",
)
_NOC_POSITIVE = ("e_switch_bit", "e_link_bit", "p_static", "t_switch", "t_link", "flit_size", "flit_cycle")
_NOC_INT = ("t_switch", "t_link", "flit_size", "flit_cycle", "default_exec_time")
_PARTITION_KEYS = ("idleness", "distance", "min_size", "selection", "bytes_per_weight_unit")


@dataclass
class PipelineConfig:
    noc: NocParams = field(default_factory=NocParams)
    core_count: int = 4
    energy: EnergyTable = field(default_factory=EnergyTable)
    latency: dict[str, int] = field(default_factory=dict)
    ns_per_cycle: float = 1.0
    branch_edges: bool = True
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    algorithm: str = "both"
    exhaustive_limit: int = 10**6

    @property
    def algorithms(self) -> list[str]:
        return ["cdm", "cwm"] if self.algorithm == "both" else [self.algorithm]


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"missing config key '{where}{key}'")
    return doc[key]


def _positive(value, name: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
        raise ConfigError(f"config key '{name}' must be a positive number, got {value!r}")
    return value


def config_from_dict(doc: dict) -> PipelineConfig:
    mesh = _require(doc, "mesh", "")
    mx = _positive(_require(mesh, "x", "mesh."), "mesh.x")
    my = _positive(_require(mesh, "y", "mesh."), "mesh.y")
    core_count = _require(doc, "core_count", "")
    if not isinstance(core_count, int) or core_count < 2:
        raise ConfigError("config key 'core_count' must be an integer >= 2")
    if core_count > mx * my:
        raise ConfigError(f"core_count {core_count} exceeds the {mx}x{my} mesh")

    table = _require(doc, "energy_table", "")
    costs = {}
    for g in InstructionGroup:
        costs[g] = _positive(_require(table, g.value, "energy_table."), f"energy_table.{g.value}")

    latency = _require(doc, "latency", "")
    for op, cycles in latency.items():
        if op not in OPCODES:
            raise ConfigError(f"config key 'latency.{op}' is not an opcode")
        if not isinstance(cycles, int) or cycles < 0:
            raise ConfigError(f"config key 'latency.{op}' must be a non-negative integer")

    noc_doc = _require(doc, "noc", "")
    noc_kw = {k: _require(noc_doc, k, "noc.") for k in _NOC_KEYS}
    for k in _NOC_POSITIVE:
        _positive(noc_kw[k], f"noc.{k}")
    for k in _NOC_INT:
        if not isinstance(noc_kw[k], int):
            raise ConfigError(f"config key 'noc.{k}' must be an integer (ns or bits)")
    try:
        noc = NocParams(mesh_x=mx, mesh_y=my, **noc_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    part_doc = _require(doc, "partition", "")
    part_kw = {k: _require(part_doc, k, "partition.") for k in _PARTITION_KEYS}
    try:
        partition = PartitionConfig(noc=noc, **part_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    mapping = _require(doc, "mapping", "")
    algorithm = _require(mapping, "algorithm", "mapping.")
    if algorithm not in ("cdm", "cwm", "both"):
        raise ConfigError(f"config key 'mapping.algorithm' must be cdm, cwm or both, got {algorithm!r}")

    return PipelineConfig(
        noc=noc,
        core_count=core_count,
        energy=EnergyTable(costs),
        latency=dict(latency),
        ns_per_cycle=_positive(_require(doc, "ns_per_cycle", ""), "ns_per_cycle"),
        branch_edges=bool(_require(doc, "branch_edges", "")),
        partition=partition,
        algorithm=algorithm,
        exhaustive_limit=int(_require(mapping, "exhaustive_limit", "mapping.")),
    )


def load_config(path: str | Path) -> PipelineConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(doc)


def default_config_dict() -> dict:
    noc = NocParams()
    part = PartitionConfig()
    return {
        "mesh": {"x": noc.mesh_x, "y": noc.mesh_y},
        "core_count": 4,
        "ns_per_cycle": 1.0,
        "branch_edges": True,
        "energy_table": EnergyTable().to_dict(),
        "latency": {},
        "noc": {k: getattr(noc, k) for k in _NOC_KEYS},
        "partition": {k: getattr(part, k) for k in _PARTITION_KEYS},
        "mapping": {"algorithm": "both", "exhaustive_limit": 10**6},
    }
