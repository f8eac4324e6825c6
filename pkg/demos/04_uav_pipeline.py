"""End to end: quadrotor PD controller trace through partitioning, mapping and simulation."""

import json
import tempfile

from uavnoc import PipelineConfig, QuadParams, gen_pd_trace, inverse_mixer, mixer, run_pipeline

# the controller ends in the mixer; check it inverts cleanly
params = QuadParams()
thrust, torque = mixer([1.0, 2.0, 3.0, 4.0], params)
print("thrust", thrust, "torque", torque, "->", inverse_mixer(thrust, torque, params).omega_sq)

trace = gen_pd_trace(steps=2, seed=0)
print(len(trace.splitlines()), "trace lines")

with tempfile.TemporaryDirectory() as out:
    res = run_pipeline(trace, PipelineConfig(), out_dir=out)
    print("DDG:", res.ddg.number_of_nodes(), "nodes", res.ddg.number_of_edges(), "edges")
    print("communities:", res.partition.n_c, "cut", res.partition.inter_cluster_weight)
    print("task edges:", list(res.task_graph.edges(data="volume")))
    for alg, doc in res.reports.items():
        print(alg, res.mappings[alg].placement, json.dumps(doc["energy"]), doc["makespan_ns"], "ns")
    print("comparison:", json.dumps(res.comparison, indent=1))
