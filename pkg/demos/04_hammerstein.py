"""
Hammerstein integral operators.

T(u)(x) = scale * integral of k(x, y) f(u(y)) dy, discretised with the
trapezoid rule.  A nonnegative kernel and a nondecreasing f make T monotone.
The built-in catalog contains the scalar and integral problems used by the
tests; here we certify and solve each of the solvable ones.
"""

import time

import numpy as np

from orderfix import (
    Grid,
    KernelSpec,
    NonlinearitySpec,
    OrderInterval,
    ProblemInstance,
    SolverConfig,
    assemble,
    catalog,
    solve,
    sup_norm,
)

cfg = SolverConfig()

for inst in catalog():
    T = assemble(inst)
    t0 = time.perf_counter()
    try:
        cert, anchors, rep = solve(T, inst.interval, cfg)
    except ValueError as exc:
        print(f"{inst.name}: {exc}")
        continue
    dt = time.perf_counter() - t0
    u = rep.candidate
    print(
        f"{inst.name}: n={inst.grid.size:3d} scale={inst.scale:.6f} "
        f"{rep.classification.value} residual={rep.residual_sup:.2e} "
        f"range=[{u.min():.6f}, {u.max():.6f}] {dt:.2f}s"
    )

# a problem built by hand: exponential kernel, affine-quadratic f
g = Grid.trapezoid(0.0, 1.0, 81)
I = OrderInterval(g.constant(0.1), g.constant(3.0))
inst = ProblemInstance(
    "custom", g, KernelSpec.exponential_decay(2.0), NonlinearitySpec.affine_power(0.05, 1.0, 2.0), I, scale=1.2
)
T = assemble(inst)
cert, anchors, rep = solve(T, I, cfg)
print("custom:", cert.passed, rep.classification.value, rep.residual_sup)
print("u* at x = 0, 0.5, 1:", rep.candidate.values[[0, 40, 80]])

# quadrature error halves twice when the step halves
def error(n):
    grid = Grid.trapezoid(0.0, 1.0, n)
    J = OrderInterval(grid.constant(0.0), grid.constant(1.0))
    op = assemble(ProblemInstance("q", grid, KernelSpec.constant(1.0), NonlinearitySpec.power(2.0), J))
    return sup_norm(op(grid.function(grid.points)) - 1.0 / 3.0)

print("error ratio 101 -> 201:", error(101) / error(201))
