"""
Anchors and the interior fixed point.

Scanning the segment between the ends of the interval gives two inner
points: one where T drops below the identity, one where it rises above.
Monotone iteration from these anchors runs away from the interior and
collapses onto the clamp endpoints.  The fixed point we actually want lies
between them and is found with a damped iteration followed by Newton.
"""

import numpy as np

from orderfix import (
    Grid,
    MonotoneOperator,
    OrderInterval,
    SolverConfig,
    find_anchors,
    find_interior_fixed_point,
    monotone_iterate,
    truncate,
)

g = Grid.scalar()
square = MonotoneOperator.from_array_map(np.square, label="square")
I = OrderInterval(g.constant(0.25), g.constant(2.0))
cfg = SolverConfig()

a = find_anchors(square, I, cfg)
print("t_minus", a.t_minus, "p_minus", a.p_minus.values)
print("t_plus ", a.t_plus, "p_plus ", a.p_plus.values)

clamped = truncate(square, I)
down = monotone_iterate(clamped, a.p_minus, I, cfg)
up = monotone_iterate(clamped, a.p_plus, I, cfg)
print("from p_minus:", down.classification.value, down.candidate.values, "residual", down.residual_sup)
print("from p_plus: ", up.classification.value, up.candidate.values, "residual", up.residual_sup)

rep = find_interior_fixed_point(square, I, a, cfg)
print(rep.classification.value)
print("candidate", rep.candidate.values, "residual", rep.residual_sup)
print("outside [lo, p_minus]:", rep.exclusion_lo, " outside [p_plus, hi]:", rep.exclusion_hi)

# the same search on a cube
cube = MonotoneOperator.from_array_map(lambda v: v**3, label="cube")
I3 = OrderInterval(g.constant(0.1), g.constant(3.0))
rep3 = find_interior_fixed_point(cube, I3, find_anchors(cube, I3, cfg), cfg)
print("cube:", rep3.candidate.values, rep3.residual_sup)
