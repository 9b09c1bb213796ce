"""
More than one interior fixed point.

The PCHIP table in the catalog crosses the identity at 1, 2 and 3.  A
single solve returns whichever root the first successful start reaches.
A scan runs every start and groups the converged iterates into clusters.
"""

import numpy as np

from orderfix import SolverConfig, assemble, find_anchors, get_instance, scan_fixed_points

inst = get_instance("C6")
T = assemble(inst)
f = inst.nonlinearity.function()

xs = np.linspace(0.5, 3.5, 13)
for x, fx in zip(xs, f(xs)):
    side = "below" if fx < x else ("above" if fx > x else "on")
    print(f"u = {x:5.2f}  f(u) = {fx:8.4f}  {side}")

cfg = SolverConfig(n_starts=32)
anchors = find_anchors(T, inst.interval, cfg)
print("anchors:", anchors.p_minus.values, anchors.p_plus.values)

scan = scan_fixed_points(T, inst.interval, anchors, cfg)
print("starts tried:", scan.starts_tried)
for rep, size in zip(scan.clusters, scan.cluster_sizes):
    print(f"  u* = {rep.candidate.values[0]:.12f}  residual {rep.residual_sup:.1e}  starts {size}")
