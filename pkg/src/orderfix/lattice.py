"""Grid functions with the componentwise order.

A finite grid ``Q`` makes ``C(Q)`` the space of real vectors indexed by the
grid points.  The cone of nonnegative functions is normal (constant 1 for the
sup norm), minihedral (sup/inf are componentwise max/min) and has nonempty
interior (the strictly positive functions).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridMismatchError

__all__ = [
    "Grid",
    "GridFunction",
    "OrderInterval",
    "StrictMargin",
    "DEFAULT_RELATIVE_MARGIN",
    "leq",
    "lt",
    "strictly_less",
    "sup2",
    "inf2",
    "clamp_to_interval",
    "sup_norm",
    "normality_constant",
    "interior_distance",
]

DEFAULT_RELATIVE_MARGIN = 1e-8


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


class Grid:
    """A strictly increasing finite point set with nonnegative quadrature weights."""

    __slots__ = ("points", "weights")

    def __init__(self, points, weights=None):
        pts = _frozen(points)
        if pts.size < 1:
            raise ValueError("a grid needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if weights is None:
            weights = _trapezoid_weights(pts)
        w = _frozen(weights)
        if w.shape != pts.shape:
            raise ValueError(
                f"expected {pts.size} quadrature weights, got {w.size}"
            )
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("quadrature weights must be finite and nonnegative")
        if pts.size >= 2:
            length = pts[-1] - pts[0]
            if abs(w.sum() - length) > 1e-12 * length:
                raise ValueError(
                    f"weights sum to {w.sum()!r}, expected the domain length {length!r}"
                )
        self.points = pts
        self.weights = w

    @classmethod
    def trapezoid(cls, a: float, b: float, n: int) -> "Grid":
        """Uniform grid of ``n`` points on ``[a, b]`` with trapezoidal weights.

        ``n == 1`` gives the scalar embedding: the single point ``a`` with
        weight 1.
        """
        if n < 1:
            raise ValueError("n must be at least 1")
        if n == 1:
            return cls([a], [1.0])
        if not b > a:
            raise ValueError("need a < b for a grid with several points")
        return cls(np.linspace(a, b, n))

    @classmethod
    def scalar(cls, x: float = 0.0) -> "Grid":
        return cls([x], [1.0])

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self) -> int:
        return hash((self.points.tobytes(), self.weights.tobytes()))

    def __repr__(self) -> str:
        return f"Grid(n={self.size}, a={self.a!r}, b={self.b!r})"

    def constant(self, c: float) -> "GridFunction":
        return GridFunction(self, np.full(self.size, float(c)))

    def function(self, values) -> "GridFunction":
        return GridFunction(self, values)


def _trapezoid_weights(points: np.ndarray) -> np.ndarray:
    if points.size == 1:
        return np.ones(1)
    h = np.diff(points)
    w = np.zeros_like(points)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


class GridFunction:
    """An immutable real-valued function on a :class:`Grid`.

    Arithmetic with another grid function (same grid) or a real scalar is
    pointwise.  ``==`` is exact equality of the values.
    """

    __slots__ = ("grid", "values")
    __array_priority__ = 1000

    def __init__(self, grid: Grid, values):
        vals = _frozen(values)
        if vals.size != grid.size:
            raise ValueError(f"expected {grid.size} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite (no NaN/Inf)")
        self.grid = grid
        self.values = vals

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values.tolist())

    def __repr__(self) -> str:
        if self.values.size <= 6:
            return f"GridFunction({self.values.tolist()!r})"
        return (
            f"GridFunction(n={self.values.size}, min={self.values.min()!r}, "
            f"max={self.values.max()!r})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((hash(self.grid), self.values.tobytes()))

    def _other(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return other.values
        return float(other)

    def __add__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def _check_same_grid(x: GridFunction, y: GridFunction) -> None:
    if x.grid is not y.grid and x.grid != y.grid:
        raise GridMismatchError(
            f"operands live on different grids: {x.grid!r} vs {y.grid!r}"
        )


@dataclass(frozen=True)
class OrderInterval:
    """The order interval ``[lo, hi]``.

    The constructor enforces ``lo <= hi``.  Certification code that must be
    able to *report* a misordered pair builds one with :meth:`unchecked`.
    """

    lo: GridFunction
    hi: GridFunction
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        _check_same_grid(self.lo, self.hi)
        if self.check and not leq(self.lo, self.hi):
            raise ValueError("order interval requires lo <= hi componentwise")

    @classmethod
    def unchecked(cls, lo: GridFunction, hi: GridFunction) -> "OrderInterval":
        return cls(lo, hi, check=False)

    @property
    def grid(self) -> Grid:
        return self.lo.grid

    @property
    def is_ordered(self) -> bool:
        return leq(self.lo, self.hi)

    @property
    def scale(self) -> float:
        """Sup-norm diameter ``||hi - lo||``."""
        return sup_norm(self.hi - self.lo)

    @property
    def value_bounds(self) -> tuple[float, float]:
        """Smallest and largest value taken by either endpoint."""
        return (
            min(self.lo.min(), self.hi.min()),
            max(self.lo.max(), self.hi.max()),
        )

    def contains(self, u: GridFunction) -> bool:
        return leq(self.lo, u) and leq(u, self.hi)


@dataclass(frozen=True)
class StrictMargin:
    """Numerical threshold realizing the strict order ``x << y``.

    ``margin`` is in units of function value; ``relative_to`` records the
    interval diameter it was derived from.
    """

    margin: float
    relative_to: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.margin) and self.margin > 0):
            raise ValueError(f"strict margin must be positive, got {self.margin!r}")

    @classmethod
    def for_interval(
        cls, interval: OrderInterval, relative: float = DEFAULT_RELATIVE_MARGIN
    ) -> "StrictMargin":
        if not relative > 0:
            raise ValueError("relative margin must be positive")
        scale = interval.scale
        return cls(max(relative * scale, np.finfo(float).tiny), scale)


def leq(x: GridFunction, y: GridFunction) -> bool:
    """``x <= y`` at every grid point."""
    _check_same_grid(x, y)
    return bool(np.all(x.values <= y.values))


def lt(x: GridFunction, y: GridFunction) -> bool:
    """``x <= y`` and ``x != y``."""
    _check_same_grid(x, y)
    return bool(np.all(x.values <= y.values) and np.any(x.values != y.values))


def strictly_less(x: GridFunction, y: GridFunction, m: StrictMargin) -> bool:
    """``x << y``: ``y - x`` exceeds the margin at every grid point."""
    _check_same_grid(x, y)
    return bool(np.min(y.values - x.values) > m.margin)


def sup2(x: GridFunction, y: GridFunction) -> GridFunction:
    _check_same_grid(x, y)
    return GridFunction(x.grid, np.maximum(x.values, y.values))


def inf2(x: GridFunction, y: GridFunction) -> GridFunction:
    _check_same_grid(x, y)
    return GridFunction(x.grid, np.minimum(x.values, y.values))


def clamp_to_interval(u: GridFunction, interval: OrderInterval) -> GridFunction:
    """``sup{inf{u, hi}, lo}``."""
    return sup2(inf2(u, interval.hi), interval.lo)


def sup_norm(x: GridFunction) -> float:
    return float(np.max(np.abs(x.values)))


def normality_constant() -> float:
    # 0 <= x <= y componentwise forces max|x_i| <= max|y_i|.
    return 1.0


def interior_distance(x: GridFunction) -> float:
    """Sup-norm distance from ``x`` to the boundary of the cone, signed.

    Positive exactly when ``x`` is strictly positive everywhere.
    """
    return float(np.min(x.values))
