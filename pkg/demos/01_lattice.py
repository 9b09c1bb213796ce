"""
Grid functions and their order.

Functions on a finite grid are ordered pointwise.  The join and meet of two
functions are the pointwise max and min, the sup norm is monotone on the
positive cone, and the strict order asks for a positive gap at every point.
"""

import numpy as np

from orderfix import (
    Grid,
    GridFunction,
    OrderInterval,
    StrictMargin,
    inf2,
    leq,
    lt,
    strictly_less,
    sup2,
    sup_norm,
)

grid = Grid.trapezoid(0.0, 1.0, 5)
print("points ", grid.points)
print("weights", grid.weights)

u = grid.function(np.sin(np.pi * grid.points))
v = grid.constant(0.5)

# neither dominates the other
print("u <= v:", leq(u, v), " v <= u:", leq(v, u))
print("sup(u, v):", sup2(u, v).values)
print("inf(u, v):", inf2(u, v).values)

# the join is above both, the meet below both
print(leq(u, sup2(u, v)) and leq(v, sup2(u, v)))
print(leq(inf2(u, v), u) and leq(inf2(u, v), v))

# strict order needs a gap everywhere; lt only needs <= and not equal
lo, hi = grid.constant(0.0), grid.constant(1.0)
I = OrderInterval(lo, hi)
m = StrictMargin.for_interval(I)
print("margin", m.margin)
print("lo << hi:", strictly_less(lo, hi, m))
w = hi - grid.function([0.0, 0.1, 0.1, 0.1, 0.1])
print("w < hi:", lt(w, hi), " w << hi:", strictly_less(w, hi, m))

# monotone norm: 0 <= x <= y gives |x| <= |y|
y = grid.function([0.2, 0.9, 0.4, 0.3, 1.1])
x = y * 0.5
print(sup_norm(x), "<=", sup_norm(y))

# membership in the interval
print("u in [0, 1]:", I.contains(u))
print("u + 1 in [0, 1]:", I.contains(u + 1.0))
