"""Acceptance criteria 1-12; each test records one PASS/FAIL line in the summary."""

import itertools
import warnings

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import ACCEPTANCE_LINES, criterion
from oracles import (
    A, B, C, D, FOUR_LINE_TRACE, diamond_task_graph, level_oracle, longest_path_depths, stats_oracle, w1_enumerate,
)
from test_curvature import measures, small_graphs, two_cliques
from uavnoc.cli import main
from uavnoc.config import PipelineConfig, default_config_dict
from uavnoc.curvature import (
    PartitionConfig, curvatures, discover_communities, estimate_energy, orc_edge, quality, wasserstein1,
)
from uavnoc.ddg import cluster_stats
from uavnoc.mapping import ArchGraph, cdm_map, cwm_map, depth_assign, level_energy
from uavnoc.noc import EnergyReport, NocParams, mapping_energy, packet_energy, simulate
from uavnoc.pipeline import run_pipeline
from uavnoc.trace import build_tables, parse_trace
from uavnoc.workload import QuadParams, gen_pd_trace, inverse_mixer, mixer


def test_c01_dependency_tables():
    with criterion(1, "four-line trace source/destination/dependency tables", 1.0):
        t = build_tables(parse_trace(FOUR_LINE_TRACE))
        assert t.src_table == {"%5": [1], "%1": [2], "%6": [3], "%2": [4], "%3": [4]}
        assert t.dest_table == {"%1": 1, "%2": 2, "%3": 3, "%4": 4}
        assert t.dep_lines() == {2: [1], 4: [2, 3]}


def test_c02_packet_energy_spot_value():
    with criterion(2, "6-bit packet over 3 routers costs 30e-12 J", 1.0):
        assert abs(packet_energy(6, 3, 1e-12, 1e-12) - 30e-12) <= 1e-18


def test_c03_timing_spot_values():
    with criterion(3, "adjacent head latency 5 ns; 10-flit tail 9 ns after head", 1.0):
        tg = nx.DiGraph()
        tg.add_edge(0, 1, volume=10)
        p = simulate(tg, {0: (0, 0), 1: (0, 1)}, NocParams(t_switch=2, t_link=1)).packet(0, 1)
        assert p.head - p.inject == 5
        assert p.tail - p.head == 9


def _diamond_pair(volumes, params, ag):
    tg = diamond_task_graph(volumes)
    m1, m2 = cdm_map(tg, ag), cwm_map(tg, ag)
    r1, t1 = mapping_energy(tg, m1.placement, params)
    r2, t2 = mapping_energy(tg, m2.placement, params)
    return m1, m2, r1, t1, r2, t2


def _shape_checks(r1, t1, r2, t2) -> bool:
    return (
        abs(r1.e_dynamic - r2.e_dynamic) <= 1e-9 * r1.e_dynamic
        and t2.congestion_for(B, D) > t1.congestion_for(B, D)
        and r2.e_static > r1.e_static
    )


def test_c04_mapping_reconstruction():
    with criterion(4, "CDM vs CWM reconstruction: equal dynamic energy, CWM congests B->D, more static energy", 10.0):
        params = NocParams()
        ag = ArchGraph(params)
        # brute force for an instance that also hits 109e-12 J, 67 ns and +17 %
        exact = []
        for ab, ad, bd, cd in itertools.product(range(1, 10), repeat=4):
            vols = {(A, B): ab, (A, C): 6, (A, D): ad, (B, D): bd, (C, D): cd}
            m1, m2, r1, t1, r2, t2 = _diamond_pair(vols, params, ag)
            if not _shape_checks(r1, t1, r2, t2):
                continue
            if (
                round(r1.e_dynamic * 1e12) == 109
                and t1.makespan == t2.makespan == 67
                and t2.congestion_for(B, D) - t1.congestion_for(B, D) == 10
                and round(100 * (r2.e_noc / r1.e_noc - 1)) == 17
            ):
                exact.append(vols)
        if exact:
            vols = exact[0]
        else:
            vols = None   # figures unreachable; the shape checks bind
        m1, m2, r1, t1, r2, t2 = _diamond_pair(vols, params, ag)
        a = m2.placement
        assert abs(a[A][0] - a[C][0]) + abs(a[A][1] - a[C][1]) + 1 == 3   # A->C at three routers
        assert r1.e_dynamic == pytest.approx(r2.e_dynamic, rel=1e-12)          # (a)
        assert t2.congestion_for(B, D) > t1.congestion_for(B, D)               # (b)
        assert r2.e_static > r1.e_static                                       # (c)
        if exact:
            assert round(r1.e_dynamic * 1e12) == 109 and t1.makespan == t2.makespan == 67
    note = "exact figures matched" if exact else "no small-volume instance matches 109e-12 J / 67 ns / 17 %"
    ACCEPTANCE_LINES.append(f"INFO  criterion  4: {note}")


@settings(max_examples=250, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small_graphs(max_degree=6), st.data())
def _w1_property(g, data):
    nodes = sorted(g.nodes)
    mu, nu = data.draw(measures(nodes)), data.draw(measures(nodes))
    d = dict(nx.all_pairs_shortest_path_length(g))
    cost = [[d[x][y] for y in nu.support] for x in mu.support]
    assert abs(wasserstein1(mu, nu, g) - w1_enumerate(mu.mass, nu.mass, cost)) <= 1e-9


def test_c05_w1_oracle_equivalence():
    with criterion(5, "min-cost-flow W1 equals transport-plan enumeration", 60.0):
        _w1_property()


def test_c06_curvature_ground_truths():
    with criterion(6, "triangle 1/2, path 0, two-K4 bridge unique minimum and recovered", 10.0):
        assert orc_edge(nx.complete_graph(3), 0, 1) == 0.5
        assert orc_edge(nx.path_graph(2), 0, 1) == 0.0
        g = two_cliques()
        curv = curvatures(g)
        low = min(curv.values())
        assert [k for k, v in curv.items() if v == low] == [(3, 4)]
        part = discover_communities(g, 2)
        assert part.communities() == {0: [0, 1, 2, 3], 1: [4, 5, 6, 7]}


def _random_dag(rng, n):
    g = nx.DiGraph()
    for v in range(n):
        g.add_node(v, energy=float(rng.integers(1, 6)) * 1e-12)
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < 0.15:
            g.add_edge(u, v, weight=float(rng.integers(1, 33)))
    return g


def test_c07_quality_identities():
    with criterion(7, "single-cluster Q and conservation laws on 1000 random partitions", 30.0):
        rng = np.random.default_rng(7)
        config = PartitionConfig()
        for _ in range(1000):
            g = _random_dag(rng, int(rng.integers(2, 51)))
            k = int(rng.integers(1, 6))
            assignment = {n: int(rng.integers(0, k)) for n in g.nodes}
            s = cluster_stats(g, assignment)
            wc, sc, total, cut = stats_oracle(g, assignment)
            assert abs(sum(s.internal.values()) + s.cut - s.total) <= 1e-9
            assert abs(sum(s.boundary.values()) - 2 * s.cut) <= 1e-9
            assert abs(s.cut - cut) <= 1e-9 and abs(s.total - total) <= 1e-9
            one = {n: 0 for n in g.nodes}
            est = estimate_energy(g, one, config)
            expected = (1.0 if total > 0 else 0.0) - (est.node_total + est.communication) / est.total
            assert abs(quality(g, one, est) - expected) <= 1e-9


def test_c08_depth_and_mapping():
    with criterion(8, "depths {A:0,B:1,C:1,D:2}; root at (0,0); levels match exhaustive oracle", 60.0):
        assert depth_assign(diamond_task_graph()) == {A: 0, B: 1, C: 1, D: 2}
        rng = np.random.default_rng(8)
        for _ in range(400):
            x, y = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            n = int(rng.integers(1, min(7, x * y) + 1))
            tg = nx.DiGraph()
            tg.add_nodes_from(range(n))
            for u, v in itertools.combinations(range(n), 2):
                if rng.random() < 0.4:
                    tg.add_edge(u, v, volume=int(rng.integers(1, 21)))
            ag = ArchGraph(NocParams(mesh_x=x, mesh_y=y))
            m = cdm_map(tg, ag)
            depth = longest_path_depths(tg)
            assert depth == depth_assign(tg)
            roots = sorted(c for c in tg if depth[c] == 0)
            first = min(roots, key=lambda c: (-sum(w for *_, w in tg.out_edges(c, data="volume")), c))
            assert m.placement[first] == (0, 0)
            placed = {first: (0, 0)}
            levels = {}
            for c in sorted(tg):
                if c != first:
                    levels.setdefault(max(depth[c], 1), []).append(c)
            for d in sorted(levels):
                level = levels[d]
                assert len(level) <= 6
                best, tiles = level_oracle(tg, level, placed, ag.tiles)
                chosen = {c: m.placement[c] for c in level}
                pos = {**placed, **chosen}
                got = level_energy(tg, ag, pos) - level_energy(tg, ag, placed)
                assert got == pytest.approx(best, rel=1e-9, abs=1e-24)
                assert tuple(chosen[c] for c in level) == tiles
                placed.update(chosen)


def test_c09_energy_identities():
    with criterion(9, "E_NoC = static + dynamic and E = nodes + E_NoC on every report; dynamic schedule-free", 10.0):
        reports = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for text in (FOUR_LINE_TRACE, gen_pd_trace(1), gen_pd_trace(2, seed=3)):
                res = run_pipeline(text, PipelineConfig())
                reports += [EnergyReport.from_dict(doc["energy"]) for doc in res.reports.values()]
        tg = diamond_task_graph(energy=2e-12)
        ag = ArchGraph(NocParams())
        for m in (cdm_map(tg, ag), cwm_map(tg, ag)):
            dyn = set()
            for kw in ({}, {"contention": False}, {"port_model": "eject"}, {"port_model": "router"},
                       {"source_release": "tail"}, {"link_mode": "undirected"}):
                r, _ = mapping_energy(tg, m.placement, NocParams(**kw))
                reports.append(r)
                dyn.add(r.e_dynamic)
            assert len(dyn) == 1
        for r in reports:
            assert r.e_noc == r.e_static + r.e_dynamic
            assert r.e_total == r.e_nodes + r.e_noc


def test_c10_mixer_algebra():
    with criterion(10, "hover (1,1,1,1) -> (-4,0,0,0); inverse round trip under 1e-9", 5.0):
        unit = QuadParams(1.0, 1.0, 1.0)
        t, torque = mixer([1, 1, 1, 1], unit)
        assert (t, *torque) == (-4, 0, 0, 0)
        rng = np.random.default_rng(10)
        for _ in range(1000):
            params = QuadParams(*rng.uniform(0.1, 5.0, 3))
            w = rng.uniform(0.0, 100.0, 4)
            t, torque = mixer(w, params)
            assert np.max(np.abs(inverse_mixer(t, torque, params).omega_sq - w)) < 1e-9


def test_c11_pipeline_determinism(tmp_path):
    with criterion(11, "two runs on the generated PD trace give byte-identical bundles", 30.0):
        cfg = tmp_path / "config.json"
        import json

        cfg.write_text(json.dumps(default_config_dict()))
        trace = tmp_path / "pd.ll"
        assert main(["gen", "--steps", "8", "--seed", "0", "-o", str(trace)]) == 0
        outs = [tmp_path / "a", tmp_path / "b"]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for out in outs:
                assert main(["run", str(trace), "--config", str(cfg), "--out", str(out)]) == 0
        files = sorted(p.name for p in outs[0].iterdir())
        assert files == sorted(p.name for p in outs[1].iterdir()) and len(files) == 13
        for name in files:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_c12_full_system_results_not_reproduced():
    ACCEPTANCE_LINES.append(
        "SKIP  criterion 12: full-system energy/speedup results need architectural simulation; declared not reproducible"
    )
    pytest.skip("full-system architectural simulation is out of scope")
