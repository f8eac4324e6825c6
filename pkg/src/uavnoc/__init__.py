"""Curvature-based partitioning of instruction traces and energy-aware NoC mapping."""

from .config import ConfigError, PipelineConfig, load_config
from .curvature import Partition, PartitionConfig, discover_communities, orc_edge, curvatures
from .ddg import build_ddg
from .mapping import ArchGraph, CapacityError, TileMapping, build_task_graph, cdm_map, cwm_map, depth_assign
from .noc import EnergyReport, NocParams, mapping_energy, simulate, xy_route
from .pipeline import compare_mappings, run_pipeline
from .trace import EnergyTable, TraceSyntaxError, build_tables, parse_trace
from .workload import QuadParams, gen_pd_trace, inverse_mixer, mixer

__version__ = "0.1.0"

__all__ = [
    "ArchGraph", "CapacityError", "ConfigError", "EnergyReport", "EnergyTable", "NocParams",
    "Partition", "PartitionConfig", "PipelineConfig", "QuadParams", "TileMapping", "TraceSyntaxError",
    "build_ddg", "build_tables", "build_task_graph", "cdm_map", "compare_mappings", "curvatures",
    "cwm_map", "depth_assign", "discover_communities", "gen_pd_trace", "inverse_mixer", "load_config",
    "mapping_energy", "mixer", "orc_edge", "parse_trace", "run_pipeline", "simulate", "xy_route",
]
