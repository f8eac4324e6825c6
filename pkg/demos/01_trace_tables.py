"""Parse a short IR trace and look at its dependency tables and DDG."""

from uavnoc import EnergyTable, build_ddg, build_tables, parse_trace
from uavnoc.ddg import export_dot

trace = """\
store double %5, double* %1, align 8
%2 = load double, double* %1, align 8
%3 = load double, double* %6, align 8
%4 = fcmp oeq double %2, %3
"""

prog = parse_trace(trace)
for ins in prog:
    print(ins.line_no, ins.opcode, ins.group.value, "latency", ins.latency, "bits", ins.data_size)

tables = build_tables(prog)
print(tables.format())

# edge weight is latency x data size of the producer
g = build_ddg(prog, tables, EnergyTable())
for u, v, w in g.edges(data="weight"):
    print(f"{u} -> {v}  weight {w:g}")
print(export_dot(g))
