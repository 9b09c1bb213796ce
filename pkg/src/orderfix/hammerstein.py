"""Hammerstein integral operators on a trapezoidal grid.

    (T u)(x_i) = lam * sum_j w_j k(x_i, y_j) f(u(y_j))

With ``k >= 0`` and ``f`` nondecreasing the operator is monotone increasing.
The catalog collects instances in the reversed configuration
``T lo << lo``, ``T hi >> hi``, plus a negative control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect

from .exceptions import DomainError, MonotonicityError
from .lattice import (
    Grid,
    GridFunction,
    OrderInterval,
    StrictMargin,
)
from .operators import MonotoneOperator, certify_boundary

__all__ = [
    "KernelSpec",
    "NonlinearitySpec",
    "ProblemInstance",
    "HammersteinOperator",
    "assemble",
    "calibrate_scale",
    "catalog",
    "get_instance",
    "multiroot_cubic",
]


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel ``k(x, y)``; ``params`` depends on ``kind``.

    * ``constant``: ``c``
    * ``separable``: ``g``, a callable or per-point values; ``k = g(x) g(y)``
    * ``exponential_decay``: ``alpha``; ``k = exp(-alpha |x - y|)``
    * ``table``: ``matrix``, rows indexed by x, columns by y
    """

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("constant", "separable", "exponential_decay", "table")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float = 1.0) -> "KernelSpec":
        return cls("constant", {"c": float(c)})

    @classmethod
    def separable(cls, g) -> "KernelSpec":
        return cls("separable", {"g": g})

    @classmethod
    def exponential_decay(cls, alpha: float = 1.0) -> "KernelSpec":
        return cls("exponential_decay", {"alpha": float(alpha)})

    @classmethod
    def table(cls, matrix) -> "KernelSpec":
        return cls("table", {"matrix": np.asarray(matrix, dtype=float)})

    def matrix(self, grid: Grid) -> np.ndarray:
        x = grid.points
        n = grid.size
        if self.kind == "constant":
            K = np.full((n, n), self.params["c"])
        elif self.kind == "separable":
            g = self.params["g"]
            gx = np.asarray(g(x) if callable(g) else g, dtype=float).reshape(-1)
            if gx.size != n:
                raise ValueError(f"separable kernel needs {n} values, got {gx.size}")
            K = np.outer(gx, gx)
        elif self.kind == "exponential_decay":
            K = np.exp(-self.params["alpha"] * np.abs(x[:, None] - x[None, :]))
        else:
            K = np.array(self.params["matrix"], dtype=float)
            if K.shape != (n, n):
                raise ValueError(f"kernel table must be {n}x{n}, got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise ValueError("kernel entries must be finite")
        if np.any(K < 0):
            i, j = np.argwhere(K < 0)[0]
            raise ValueError(
                f"negative kernel entry k[{i}, {j}] = {K[i, j]!r}; the operator would not be monotone"
            )
        return K


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """Nonlinearity ``f(u)``; ``params`` depends on ``kind``.

    * ``power``: ``q > 0``; ``f = u**q``
    * ``affine_power``: ``a, b, q``; ``f = a + b u**q``
    * ``table``: ``u``, ``f`` node values, interpolated shape-preservingly
      (PCHIP), so nondecreasing data gives a nondecreasing ``f``
    """

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("power", "affine_power", "table")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind in ("power", "affine_power") and not self.params["q"] > 0:
            raise ValueError("power nonlinearity needs q > 0")

    @classmethod
    def power(cls, q: float) -> "NonlinearitySpec":
        return cls("power", {"q": float(q)})

    @classmethod
    def affine_power(cls, a: float, b: float, q: float) -> "NonlinearitySpec":
        return cls("affine_power", {"a": float(a), "b": float(b), "q": float(q)})

    @classmethod
    def table(cls, u, f) -> "NonlinearitySpec":
        u = np.asarray(u, dtype=float)
        f = np.asarray(f, dtype=float)
        if u.shape != f.shape or u.ndim != 1 or u.size < 2:
            raise ValueError("table nonlinearity needs matching 1-d node arrays")
        return cls("table", {"u": u, "f": f})

    def function(self) -> Callable[[np.ndarray], np.ndarray]:
        p = self.params
        if self.kind == "power":
            q = p["q"]
            if q == 2.0:
                return np.square
            return lambda u: np.power(u, q)
        if self.kind == "affine_power":
            a, b, q = p["a"], p["b"], p["q"]
            return lambda u: a + b * np.power(u, q)
        return PchipInterpolator(p["u"], p["f"], extrapolate=False)

    def domain(self) -> tuple[float, float]:
        """Where ``f`` is defined at all (before restriction to an interval)."""
        if self.kind == "table":
            return float(self.params["u"][0]), float(self.params["u"][-1])
        if self.params["q"] == int(self.params["q"]):
            return -np.inf, np.inf
        return 0.0, np.inf


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    name: str
    grid: Grid
    kernel: KernelSpec
    nonlinearity: NonlinearitySpec
    interval: OrderInterval
    scale: float = 1.0
    label: str = ""
    expected_fixed_point: Optional[GridFunction] = None
    note: str = ""

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be positive")
        if self.interval.grid != self.grid:
            raise ValueError("interval lives on a different grid")


class HammersteinOperator(MonotoneOperator):
    """Discretized Hammerstein operator ``u -> A f(u)`` with
    ``A = lam * K * diag(w)`` precomputed once."""

    def __init__(self, instance: ProblemInstance, matrix: np.ndarray, f, bounds):
        self.instance = instance
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.f = f
        self.bounds = bounds
        super().__init__(
            self._evaluate,
            label=instance.label or instance.name,
            domain_interval=instance.interval,
        )

    def _evaluate(self, u: GridFunction) -> GridFunction:
        v = u.values
        lo, hi = self.bounds
        if v.min() < lo or v.max() > hi:
            raise DomainError(
                f"{self.label}: argument range [{u.min()!r}, {u.max()!r}] leaves the "
                f"interval bounds [{lo!r}, {hi!r}]"
            )
        return GridFunction(u.grid, self.matrix @ self.f(v))


def _check_nondecreasing(f, lo: float, hi: float, n: int = 1000) -> None:
    if hi <= lo:
        return
    s = np.linspace(lo, hi, n)
    fs = np.asarray(f(s), dtype=float)
    if not np.all(np.isfinite(fs)):
        k = int(np.argmin(np.isfinite(fs)))
        raise DomainError(f"nonlinearity is undefined at u = {s[k]!r}")
    drops = np.flatnonzero(np.diff(fs) < 0)
    if drops.size:
        k = int(drops[0])
        raise MonotonicityError(
            f"nonlinearity decreases between u = {s[k]!r} and u = {s[k + 1]!r}",
            counterexample=(float(s[k]), float(s[k + 1])),
        )


def assemble(p: ProblemInstance) -> HammersteinOperator:
    """Build the discretized operator, rejecting negative kernels and
    nonlinearities that are not nondecreasing on the interval's value range."""
    K = p.kernel.matrix(p.grid)
    A = p.scale * K * p.grid.weights[None, :]
    lo, hi = p.interval.value_bounds
    dlo, dhi = p.nonlinearity.domain()
    if lo < dlo or hi > dhi:
        raise DomainError(
            f"interval value range [{lo!r}, {hi!r}] exceeds the nonlinearity's "
            f"domain [{dlo!r}, {dhi!r}]"
        )
    f = p.nonlinearity.function()
    _check_nondecreasing(f, lo, hi)
    return HammersteinOperator(p, A, f, (float(lo), float(hi)))


def calibrate_scale(
    grid: Grid,
    kernel: KernelSpec,
    nonlinearity: NonlinearitySpec,
    interval: OrderInterval,
) -> float:
    """Choose ``lam`` balancing the strong super- and subsolution margins.

    ``lam = s / ||K||`` with ``||K||`` the max row sum of the quadrature
    matrix; ``s`` is found by bisection on ``super_margin - sub_margin``,
    which decreases in ``s``.
    """
    norm = float(np.max(kernel.matrix(grid) @ grid.weights))
    margin = StrictMargin.for_interval(interval)

    def gap(s: float) -> float:
        inst = ProblemInstance("calibration", grid, kernel, nonlinearity, interval, s / norm)
        chk = certify_boundary(assemble(inst), interval, margin)
        return chk.super_margin - chk.sub_margin

    s_hi = 1.0
    while gap(s_hi) > 0:
        s_hi *= 2.0
        if s_hi > 1e12:
            raise RuntimeError("calibration bracket not found")
    s = bisect(gap, 1e-12, s_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return s / norm


def multiroot_cubic(u, c: float = 0.5):
    """``u + c (u - 1)(u - 2)(u - 3)``: crosses the diagonal at 1, 2 and 3,
    nondecreasing for ``c < 1``."""
    u = np.asarray(u, dtype=float)
    return u + c * (u - 1.0) * (u - 2.0) * (u - 3.0)


def _constants(grid: Grid, lo: float, hi: float, check: bool = True) -> OrderInterval:
    return OrderInterval(grid.constant(lo), grid.constant(hi), check=check)


@lru_cache(maxsize=None)
def catalog() -> tuple[ProblemInstance, ...]:
    """Shipped instances C1..C6.

    C1..C4 and C6 satisfy the reversed hypotheses; C5 is a negative control
    with ``T lo >> lo`` and ``T hi << hi``.
    """
    scalar = Grid.scalar(0.0)
    fine = Grid.trapezoid(0.0, 1.0, 101)
    square = NonlinearitySpec.power(2.0)
    out = [
        ProblemInstance(
            "C1",
            scalar,
            KernelSpec.constant(1.0),
            square,
            _constants(scalar, 0.25, 2.0),
            label="scalar square map u -> u^2 on [0.25, 2]",
            expected_fixed_point=scalar.constant(1.0),
            note="unique root of u = u^2 in (0.25, 2)",
        ),
        ProblemInstance(
            "C2",
            fine,
            KernelSpec.constant(1.0),
            square,
            _constants(fine, 0.25, 2.0),
            label="constant kernel, f(u) = u^2, 101 points on [0, 1]",
            expected_fixed_point=fine.constant(1.0),
            note="T u is constant, so fixed points are constants c = c^2",
        ),
        ProblemInstance(
            "C3",
            scalar,
            KernelSpec.constant(1.0),
            NonlinearitySpec.power(3.0),
            _constants(scalar, 0.1, 3.0),
            label="scalar cubic map u -> u^3 on [0.1, 3]",
            expected_fixed_point=scalar.constant(1.0),
            note="unique root of u = u^3 in (0.1, 3)",
        ),
    ]
    exp_kernel = KernelSpec.exponential_decay(1.0)
    c4_interval = _constants(fine, 0.25, 2.0)
    out.append(
        ProblemInstance(
            "C4",
            fine,
            exp_kernel,
            square,
            c4_interval,
            scale=calibrate_scale(fine, exp_kernel, square, c4_interval),
            label="kernel exp(-|x - y|), f(u) = u^2, calibrated scale, 101 points",
            note="no closed-form fixed point; accepted by residual",
        )
    )
    out.append(
        ProblemInstance(
            "C5",
            scalar,
            KernelSpec.constant(1.0),
            NonlinearitySpec.power(0.5),
            _constants(scalar, 0.25, 2.0),
            label="scalar sqrt map on [0.25, 2] (classical ordering, negative control)",
            note="T lo >> lo and T hi << hi: fails the reversed hypotheses",
        )
    )
    nodes = np.arange(10, 71) / 20.0
    out.append(
        ProblemInstance(
            "C6",
            scalar,
            KernelSpec.constant(1.0),
            NonlinearitySpec.table(nodes, multiroot_cubic(nodes)),
            _constants(scalar, 0.5, 3.5),
            label="scalar table nonlinearity crossing the diagonal three times",
            note="PCHIP through u + (u-1)(u-2)(u-3)/2 at nodes k/20; roots 1, 2, 3",
        )
    )
    return tuple(out)


def get_instance(name: str) -> ProblemInstance:
    for inst in catalog():
        if inst.name == name:
            return inst
    raise KeyError(f"no catalog instance named {name!r}")
