"""
Truncating an operator into an order interval.

For T(u) = u**2 on the interval [0.25, 2] the lower end is a strong
supersolution (T maps it strictly below itself) and the upper end is a
strong subsolution.  The truncated operator clamps T back into the interval,
which makes both endpoints fixed points of the clamped map but not of T.
"""

import numpy as np

from orderfix import (
    Grid,
    MonotoneOperator,
    OrderInterval,
    certify,
    check_endpoints_fixed,
    truncate,
)

g = Grid.scalar()
square = MonotoneOperator.from_array_map(np.square, label="square")
I = OrderInterval(g.constant(0.25), g.constant(2.0))

report = certify(square, I)
print("passed:", report.passed)
print("super margin at lo:", report.super_margin)  # 0.25 - 0.0625
print("sub margin at hi:  ", report.sub_margin)  # 4 - 2

clamped = truncate(square, I)
for x in (0.25, 0.5, 1.0, 1.5, 2.0):
    u = g.constant(x)
    print(f"u = {x:4}  T(u) = {square(u).values[0]:7.4f}  clamped = {clamped(u).values[0]:7.4f}")

print("endpoints fixed by the clamp:", check_endpoints_fixed(clamped, I))

# a decreasing map is caught by the monotonicity sampler
flip = MonotoneOperator.from_array_map(lambda v: 2.25 - v, label="flip")
bad = certify(flip, I)
print("flip passed:", bad.passed)
print(bad.failures())

# so is a concave map whose endpoints have the wrong signs
root = MonotoneOperator.from_array_map(np.sqrt, label="sqrt")
print(certify(root, I).failures())
