"""Monotone operators, the truncation onto an order interval, and
certification of the reversed sub/supersolution hypotheses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import EvaluationError
from .lattice import (
    GridFunction,
    OrderInterval,
    StrictMargin,
    clamp_to_interval,
    inf2,
    interior_distance,
    leq,
    normality_constant,
    sup2,
)

__all__ = [
    "MonotoneOperator",
    "TruncatedOperator",
    "MonotoneCheck",
    "BoundaryCheck",
    "CertificationReport",
    "truncate",
    "certify_monotone",
    "certify_boundary",
    "check_endpoints_fixed",
    "certify",
]


class MonotoneOperator:
    """A map ``GridFunction -> GridFunction`` on one grid.

    ``evaluate`` must be deterministic.  ``claimed_monotone`` and
    ``claimed_continuous`` are metadata only; monotonicity is checked by
    :func:`certify_monotone`, continuity is assumed.
    """

    def __init__(
        self,
        evaluate: Callable[[GridFunction], GridFunction],
        label: str = "T",
        domain_interval: Optional[OrderInterval] = None,
        claimed_monotone: bool = True,
        claimed_continuous: bool = True,
    ):
        self.evaluate = evaluate
        self.label = label
        self.domain_interval = domain_interval
        self.claimed_monotone = claimed_monotone
        self.claimed_continuous = claimed_continuous

    @classmethod
    def from_array_map(cls, func: Callable[[np.ndarray], np.ndarray], **kwargs):
        """Wrap a function acting on value arrays."""

        def evaluate(u: GridFunction) -> GridFunction:
            return GridFunction(u.grid, func(u.values))

        return cls(evaluate, **kwargs)

    def __call__(self, u: GridFunction) -> GridFunction:
        out = self.evaluate(u)
        if not isinstance(out, GridFunction):
            out = GridFunction(u.grid, out)
        elif out.grid != u.grid:
            raise ValueError(f"{self.label}: output grid differs from input grid")
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label!r})"


class TruncatedOperator(MonotoneOperator):
    """``u -> sup{inf{T u, hi}, lo}``; keeps a handle on the untruncated map."""

    def __init__(self, base: MonotoneOperator, interval: OrderInterval):
        self.base = base
        self.interval = interval
        super().__init__(
            lambda u: clamp_to_interval(base(u), interval),
            label=f"trunc({base.label})",
            domain_interval=interval,
            claimed_monotone=base.claimed_monotone,
            claimed_continuous=base.claimed_continuous,
        )


def truncate(T: MonotoneOperator, interval: OrderInterval) -> TruncatedOperator:
    if T.domain_interval is not None and T.domain_interval.grid != interval.grid:
        raise ValueError("interval and operator live on different grids")
    return TruncatedOperator(T, interval)


@dataclass(frozen=True)
class MonotoneCheck:
    ok: bool
    samples: int
    counterexample: Optional[tuple[GridFunction, GridFunction]] = None
    counterexample_index: Optional[int] = None


@dataclass(frozen=True)
class BoundaryCheck:
    super_margin: float
    sub_margin: float
    interval_order_margin: float
    threshold: float

    @property
    def passed(self) -> bool:
        return min(self.super_margin, self.sub_margin, self.interval_order_margin) > (
            self.threshold
        )


def _hull(interval: OrderInterval) -> tuple[np.ndarray, np.ndarray]:
    return (
        inf2(interval.lo, interval.hi).values,
        sup2(interval.lo, interval.hi).values,
    )


def _evaluate(T: MonotoneOperator, u: GridFunction, what: str) -> GridFunction:
    try:
        return T(u)
    except Exception as exc:
        raise EvaluationError(f"{T.label} failed at {what}: {exc}", input=u) from exc


def certify_monotone(
    T: MonotoneOperator, interval: OrderInterval, n_samples: int = 1000, seed: int = 0
) -> MonotoneCheck:
    """Look for an ordered pair ``u <= v`` in the interval with ``Tu`` not ``<= Tv``.

    ``u`` is uniform in the interval; ``v = u + r (hi - u)`` with ``r``
    uniform in ``[0, 1]`` per component, so every pair is comparable by
    construction.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    lo, hi = _hull(interval)
    grid = interval.grid
    for k in range(n_samples):
        u = np.minimum(lo + rng.random(lo.size) * (hi - lo), hi)
        v = np.minimum(u + rng.random(lo.size) * (hi - u), hi)
        gu, gv = GridFunction(grid, u), GridFunction(grid, v)
        Tu = _evaluate(T, gu, f"monotonicity sample {k}")
        Tv = _evaluate(T, gv, f"monotonicity sample {k}")
        if not leq(Tu, Tv):
            return MonotoneCheck(False, k + 1, (gu, gv), k)
    return MonotoneCheck(True, n_samples)


def certify_boundary(
    T: MonotoneOperator, interval: OrderInterval, margin: StrictMargin
) -> BoundaryCheck:
    """Signed strictness of ``T lo << lo``, ``T hi >> hi`` and ``lo << hi``."""
    lo, hi = interval.lo, interval.hi
    T_lo = _evaluate(T, lo, "the lower endpoint")
    T_hi = _evaluate(T, hi, "the upper endpoint")
    return BoundaryCheck(
        super_margin=interior_distance(lo - T_lo),
        sub_margin=interior_distance(T_hi - hi),
        interval_order_margin=interior_distance(hi - lo),
        threshold=margin.margin,
    )


def check_endpoints_fixed(T_hat: MonotoneOperator, interval: OrderInterval) -> bool:
    return T_hat(interval.lo) == interval.lo and T_hat(interval.hi) == interval.hi


@dataclass(frozen=True)
class CertificationReport:
    monotone_ok: bool
    monotone_samples: int
    monotone_counterexample: Optional[tuple[GridFunction, GridFunction]]
    super_margin: float
    sub_margin: float
    interval_order_margin: float
    endpoints_fixed_by_truncation: bool
    normality_constant: float
    strict_margin: float
    seed: int
    assumed: tuple[str, ...] = field(default=("compactness", "continuity"))

    @property
    def passed(self) -> bool:
        return self.monotone_ok and (
            min(self.super_margin, self.sub_margin, self.interval_order_margin)
            > self.strict_margin
        )

    def failures(self) -> list[str]:
        out = []
        if not self.monotone_ok:
            out.append("monotonicity counterexample found")
        for name in ("super_margin", "sub_margin", "interval_order_margin"):
            value = getattr(self, name)
            if not value > self.strict_margin:
                out.append(f"{name} = {value:.6g} does not exceed {self.strict_margin:.3g}")
        return out

    def to_dict(self) -> dict:
        cex = None
        if self.monotone_counterexample is not None:
            u, v = self.monotone_counterexample
            cex = {"u": u.values.tolist(), "v": v.values.tolist()}
        return {
            "passed": self.passed,
            "monotone_ok": self.monotone_ok,
            "monotone_samples": self.monotone_samples,
            "monotone_counterexample": cex,
            "super_margin": self.super_margin,
            "sub_margin": self.sub_margin,
            "interval_order_margin": self.interval_order_margin,
            "endpoints_fixed_by_truncation": self.endpoints_fixed_by_truncation,
            "normality_constant": self.normality_constant,
            "strict_margin": self.strict_margin,
            "seed": self.seed,
            "assumed": list(self.assumed),
        }


def certify(
    T: MonotoneOperator,
    interval: OrderInterval,
    margin: Optional[StrictMargin] = None,
    n_samples: int = 1000,
    seed: int = 0,
) -> CertificationReport:
    """Check every hypothesis of the reversed-order fixed point theorem that
    can be checked on a finite grid."""
    if margin is None:
        margin = StrictMargin.for_interval(interval)
    mono = certify_monotone(T, interval, n_samples, seed)
    bnd = certify_boundary(T, interval, margin)
    return CertificationReport(
        monotone_ok=mono.ok,
        monotone_samples=mono.samples,
        monotone_counterexample=mono.counterexample,
        super_margin=bnd.super_margin,
        sub_margin=bnd.sub_margin,
        interval_order_margin=bnd.interval_order_margin,
        endpoints_fixed_by_truncation=check_endpoints_fixed(
            truncate(T, interval), interval
        ),
        normality_constant=normality_constant(),
        strict_margin=margin.margin,
        seed=seed,
    )
