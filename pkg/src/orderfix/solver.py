"""Anchor construction between the endpoints and the search for a fixed point
of ``T`` lying strictly between them.

The existence argument behind this module is non-constructive.  What is
computed here:

* two anchors ``lo << p_minus << p_plus << hi`` on the segment from ``lo`` to
  ``hi`` with ``T p_minus << p_minus`` and ``T p_plus >> p_plus``;
* a candidate ``u*`` with small residual ``||u* - T u*||`` that lies neither
  below ``p_minus`` nor above ``p_plus``.

Plain monotone iteration of the truncated operator runs into the interval
endpoints (which are spurious fixed points of the truncation), so the interior
search hands off to damped Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import (
    AnchorOverlapError,
    AnchorSearchError,
    JacobianBreakdown,
    NotMonotoneStart,
    OrbitOrderViolation,
)
from .lattice import (
    DEFAULT_RELATIVE_MARGIN,
    GridFunction,
    OrderInterval,
    StrictMargin,
    interior_distance,
    leq,
    lt,
    strictly_less,
    sup_norm,
)
from .operators import (
    CertificationReport,
    MonotoneOperator,
    TruncatedOperator,
    certify,
    truncate,
)

__all__ = [
    "Classification",
    "SolverConfig",
    "AnchorPair",
    "SolveReport",
    "ScanReport",
    "segment_point",
    "find_anchors",
    "monotone_iterate",
    "newton_refine",
    "fd_jacobian",
    "start_parameters",
    "find_interior_fixed_point",
    "scan_fixed_points",
    "solve",
]

# scan depth for the dyadic anchor parameters 2^-k, 1 - 2^-k
MAX_ANCHOR_DEPTH = 40
MAX_HALVINGS = 30
COND_LIMIT = 1e14


class Classification(str, Enum):
    INTERIOR = "interior_fixed_point"
    COLLAPSE_LO = "boundary_collapse_lo"
    COLLAPSE_HI = "boundary_collapse_hi"
    NO_CONVERGENCE = "no_convergence"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    tol_res: float = 1e-10
    tol_step: float = 1e-12
    max_iter: int = 10000
    damping: float = 0.5
    n_starts: int = 8
    margin: Optional[StrictMargin] = None
    relative_margin: float = DEFAULT_RELATIVE_MARGIN
    seed: int = 0
    fd_step: float = 1e-6
    newton_max_iter: int = 100

    def __post_init__(self):
        for name in ("tol_res", "tol_step", "fd_step", "relative_margin"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping!r}")
        if self.max_iter < 1 or self.newton_max_iter < 1:
            raise ValueError("iteration limits must be at least 1")
        if self.n_starts < 1:
            raise ValueError(f"n_starts must be at least 1, got {self.n_starts!r}")

    def strict_margin(self, interval: OrderInterval) -> StrictMargin:
        if self.margin is not None:
            return self.margin
        return StrictMargin.for_interval(interval, self.relative_margin)

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class AnchorPair:
    p_minus: GridFunction
    p_plus: GridFunction
    t_minus: float
    t_plus: float
    super_margin_at_p_minus: float
    sub_margin_at_p_plus: float

    def to_dict(self) -> dict:
        return {
            "t_minus": self.t_minus,
            "t_plus": self.t_plus,
            "super_margin_at_p_minus": self.super_margin_at_p_minus,
            "sub_margin_at_p_plus": self.sub_margin_at_p_plus,
            "p_minus": self.p_minus.values.tolist(),
            "p_plus": self.p_plus.values.tolist(),
        }


@dataclass(frozen=True)
class SolveReport:
    candidate: GridFunction
    residual_sup: float
    classification: Classification
    iterations: int
    starts_tried: int = 1
    exclusion_lo: Optional[bool] = None
    exclusion_hi: Optional[bool] = None
    within_interval: bool = True
    message: str = ""
    attempts: tuple = field(default=(), repr=False)

    @property
    def ok(self) -> bool:
        return self.classification is Classification.INTERIOR and (
            self.exclusion_lo is not False and self.exclusion_hi is not False
        )

    def to_dict(self, include_candidate: bool = True) -> dict:
        out = {
            "classification": self.classification.value,
            "residual_sup": self.residual_sup,
            "iterations": self.iterations,
            "starts_tried": self.starts_tried,
            "exclusion_lo": self.exclusion_lo,
            "exclusion_hi": self.exclusion_hi,
            "within_interval": self.within_interval,
            "message": self.message,
            "attempts": [dict(a) for a in self.attempts],
        }
        if include_candidate:
            out["candidate"] = self.candidate.values.tolist()
        return out


def segment_point(interval: OrderInterval, t: float) -> GridFunction:
    """``(1 - t) lo + t hi``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"segment parameter must lie in [0, 1], got {t!r}")
    if t == 0.0:
        return interval.lo
    if t == 1.0:
        return interval.hi
    lo, hi = interval.lo.values, interval.hi.values
    # rounding must not push the point out of the interval
    p = np.clip((1.0 - t) * lo + t * hi, np.minimum(lo, hi), np.maximum(lo, hi))
    return GridFunction(interval.grid, p)


def _residual(T: MonotoneOperator, u: GridFunction) -> float:
    return sup_norm(u - T(u))


def find_anchors(
    T: MonotoneOperator, interval: OrderInterval, cfg: SolverConfig = SolverConfig()
) -> AnchorPair:
    """Locate ``p_minus`` near ``lo`` and ``p_plus`` near ``hi`` on the segment.

    ``t_minus`` runs through ``1/2, 1/4, ...`` and ``t_plus`` through
    ``1/2, 3/4, ...``; the first parameter at which the strict inequalities
    hold, and at which the truncated operator moves the point strictly in the
    right direction, is taken.
    """
    m = cfg.strict_margin(interval)
    T_hat = truncate(T, interval)
    lo, hi = interval.lo, interval.hi
    best = {"super_margin_at_p_minus": -math.inf, "sub_margin_at_p_plus": -math.inf}

    lower = None
    for k in range(1, MAX_ANCHOR_DEPTH + 1):
        t = math.ldexp(1.0, -k)
        p = segment_point(interval, t)
        Tp = T(p)
        gap = interior_distance(p - Tp)
        best["super_margin_at_p_minus"] = max(best["super_margin_at_p_minus"], gap)
        if (
            strictly_less(Tp, p, m)
            and strictly_less(lo, p, m)
            and lt(T_hat(p), p)
        ):
            lower = (t, p, gap)
            break

    upper = None
    for k in range(1, MAX_ANCHOR_DEPTH + 1):
        t = 1.0 - math.ldexp(1.0, -k)
        p = segment_point(interval, t)
        Tp = T(p)
        gap = interior_distance(Tp - p)
        best["sub_margin_at_p_plus"] = max(best["sub_margin_at_p_plus"], gap)
        if (
            strictly_less(p, Tp, m)
            and strictly_less(p, hi, m)
            and lt(p, T_hat(p))
        ):
            upper = (t, p, gap)
            break

    if lower is None or upper is None:
        side = "lower" if lower is None else "upper"
        raise AnchorSearchError(
            f"anchor search failed on the {side} side: no dyadic parameter down to "
            f"2^-{MAX_ANCHOR_DEPTH} gives a strict margin above {m.margin:.3g}",
            best,
        )
    (t_minus, p_minus, gap_minus), (t_plus, p_plus, gap_plus) = lower, upper
    if not (t_minus < t_plus and strictly_less(p_minus, p_plus, m)):
        raise AnchorOverlapError(
            f"anchors overlap: t_minus = {t_minus!r}, t_plus = {t_plus!r}",
            {"super_margin_at_p_minus": gap_minus, "sub_margin_at_p_plus": gap_plus},
        )
    return AnchorPair(p_minus, p_plus, t_minus, t_plus, gap_minus, gap_plus)


def _classify_limit(
    u: GridFunction,
    interval: OrderInterval,
    residual: float,
    converged: bool,
    m: StrictMargin,
    tol_res: float,
) -> Classification:
    if converged and sup_norm(u - interval.lo) <= m.margin:
        return Classification.COLLAPSE_LO
    if converged and sup_norm(u - interval.hi) <= m.margin:
        return Classification.COLLAPSE_HI
    if residual <= tol_res:
        return Classification.INTERIOR
    return Classification.NO_CONVERGENCE


def monotone_iterate(
    T_hat: MonotoneOperator,
    start: GridFunction,
    interval: OrderInterval,
    cfg: SolverConfig = SolverConfig(),
) -> SolveReport:
    """Picard iteration ``u <- T_hat u`` from a point that ``T_hat`` moves
    monotonically.

    A start with ``T_hat start <= start`` yields a decreasing orbit and one
    with ``T_hat start >= start`` an increasing one; either is bounded by the
    interval and the ordering is checked at every step.  The residual is
    measured against the untruncated operator.
    """
    if not interval.contains(start):
        raise ValueError("start point must lie in the order interval")
    base = T_hat.base if isinstance(T_hat, TruncatedOperator) else T_hat
    m = cfg.strict_margin(interval)
    u = start
    Tu = T_hat(u)
    if leq(Tu, u):
        decreasing = True
    elif leq(u, Tu):
        decreasing = False
    else:
        raise NotMonotoneStart("not a monotone starting point: T(start) is incomparable with start")

    iterations = 0
    step = sup_norm(Tu - u)
    while step > cfg.tol_step and iterations < cfg.max_iter:
        if not (leq(Tu, u) if decreasing else leq(u, Tu)):
            raise OrbitOrderViolation(f"orbit lost monotonicity at iteration {iterations}")
        u = Tu
        Tu = T_hat(u)
        step = sup_norm(Tu - u)
        iterations += 1
    converged = step <= cfg.tol_step
    residual = _residual(base, u)
    cls = _classify_limit(u, interval, residual, converged, m, cfg.tol_res)
    return SolveReport(
        candidate=u,
        residual_sup=residual,
        classification=cls,
        iterations=iterations,
        within_interval=interval.contains(u),
        message="decreasing orbit" if decreasing else "increasing orbit",
    )


def fd_jacobian(
    residual, u: np.ndarray, R0: np.ndarray, lo: np.ndarray, hi: np.ndarray, h: float
) -> np.ndarray:
    """Forward-difference Jacobian of ``residual`` at ``u``, column by column.

    A component sitting within ``h`` of its upper bound is differenced
    backwards so that every probe stays inside ``[lo, hi]``.
    """
    n = u.size
    J = np.empty((n, n))
    for j in range(n):
        step = h if (u[j] + h <= hi[j] or u[j] - h < lo[j]) else -h
        probe = u.copy()
        probe[j] = u[j] + step
        actual = probe[j] - u[j]
        J[:, j] = (residual(probe) - R0) / actual
    return J


def _check_jacobian(J: np.ndarray, fd_step: float) -> float:
    s = np.linalg.svd(J, compute_uv=False)
    smax, smin = float(s[0]), float(s[-1])
    cond = math.inf if smin == 0.0 else smax / smin
    # below this the singular value is indistinguishable from forward-difference error
    resolution = 10.0 * fd_step * max(1.0, smax)
    if cond > COND_LIMIT or smin <= resolution:
        raise JacobianBreakdown(
            f"Jacobian breakdown: smallest singular value {smin:.3g}, condition {cond:.3g}"
        )
    return cond


def newton_refine(
    T: MonotoneOperator,
    u0: GridFunction,
    interval: OrderInterval,
    cfg: SolverConfig = SolverConfig(),
) -> SolveReport:
    """Damped Newton on ``R(u) = u - T u`` kept inside the interval.

    Each step is halved (at most 30 times) until the sup norm of the residual
    decreases; the trial point is clamped to the interval.  Raises
    :class:`JacobianBreakdown` carrying the last iterate when the Jacobian is
    numerically singular.
    """
    if not interval.contains(u0):
        raise ValueError("initial point must lie in the order interval")
    grid = interval.grid
    lo, hi = interval.lo.values, interval.hi.values

    def residual(v: np.ndarray) -> np.ndarray:
        return v - T(GridFunction(grid, v)).values

    u = u0.values.copy()
    R = residual(u)
    r = float(np.max(np.abs(R)))
    iterations = 0
    message = ""
    while r > cfg.tol_res:
        if iterations >= cfg.newton_max_iter:
            message = "Newton iteration limit reached"
            break
        J = fd_jacobian(residual, u, R, lo, hi, cfg.fd_step)
        try:
            _check_jacobian(J, cfg.fd_step)
        except JacobianBreakdown as exc:
            exc.iterate = GridFunction(grid, u)
            exc.iterations = iterations
            raise
        delta = np.linalg.solve(J, -R)
        alpha = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = np.clip(u + alpha * delta, lo, hi)
            R_trial = residual(trial)
            r_trial = float(np.max(np.abs(R_trial)))
            if r_trial < r:
                break
            alpha *= 0.5
        else:
            message = "no residual decrease after damping floor"
            break
        step = float(np.max(np.abs(trial - u)))
        u, R, r = trial, R_trial, r_trial
        iterations += 1
        if step <= cfg.tol_step and r > cfg.tol_res:
            message = "Newton steps stagnated"
            break

    candidate = GridFunction(grid, u)
    cls = Classification.INTERIOR if r <= cfg.tol_res else Classification.NO_CONVERGENCE
    return SolveReport(
        candidate=candidate,
        residual_sup=r,
        classification=cls,
        iterations=iterations,
        within_interval=interval.contains(candidate),
        message=message or ("converged" if cls is Classification.INTERIOR else ""),
    )


def start_parameters(anchors: AnchorPair, n_starts: int) -> list[float]:
    """``n_starts`` equispaced parameters strictly inside ``(t_minus, t_plus)``,
    then the midpoint unless it is already among them."""
    a, b = anchors.t_minus, anchors.t_plus
    ts = [a + k * (b - a) / (n_starts + 1) for k in range(1, n_starts + 1)]
    mid = 0.5 * (a + b)
    if not any(math.isclose(t, mid, rel_tol=0.0, abs_tol=1e-15) for t in ts):
        ts.append(mid)
    return ts


def _damped_run(
    T: MonotoneOperator, start: GridFunction, interval: OrderInterval, cfg: SolverConfig
) -> tuple[GridFunction, int]:
    """Averaged iteration ``u <- (1 - d) u + d T_hat u`` while it contracts.

    Stops as soon as a step fails to shrink (the orbit is being repelled) and
    returns the iterate with the smallest residual against ``T``.
    """
    lo, hi = interval.lo.values, interval.hi.values
    d = cfg.damping
    u = start.values
    best_u, best_r = u, math.inf
    prev_step = math.inf
    iterations = 0
    while iterations < cfg.max_iter:
        Tu = T(GridFunction(interval.grid, u)).values
        r = float(np.max(np.abs(u - Tu)))
        if r < best_r:
            best_u, best_r = u, r
        if r <= cfg.tol_res:
            break
        nxt = np.clip((1.0 - d) * u + d * np.clip(Tu, lo, hi), lo, hi)
        step = float(np.max(np.abs(nxt - u)))
        if step <= cfg.tol_step or step >= prev_step:
            break
        u, prev_step = nxt, step
        iterations += 1
    return GridFunction(interval.grid, best_u), iterations


def _exclusions(u: GridFunction, anchors: AnchorPair) -> tuple[bool, bool]:
    return (not leq(u, anchors.p_minus), not leq(anchors.p_plus, u))


def _run_start(
    T: MonotoneOperator,
    interval: OrderInterval,
    anchors: AnchorPair,
    cfg: SolverConfig,
    index: int,
    t: float,
) -> tuple[Optional[SolveReport], dict]:
    start = segment_point(interval, t)
    stall, damped_iters = _damped_run(T, start, interval, cfg)
    attempt = {"start_index": index, "t": t, "damped_iterations": damped_iters}
    try:
        rep = newton_refine(T, stall, interval, cfg)
    except JacobianBreakdown as exc:
        attempt.update(outcome="jacobian_breakdown", residual_sup=_residual(T, exc.iterate))
        return None, attempt
    ex_lo, ex_hi = _exclusions(rep.candidate, anchors)
    rep = replace(
        rep,
        iterations=damped_iters + rep.iterations,
        exclusion_lo=ex_lo,
        exclusion_hi=ex_hi,
    )
    outcome = rep.classification.value
    if rep.classification is Classification.INTERIOR and not (ex_lo and ex_hi):
        outcome = "excluded_by_anchor"
    attempt.update(outcome=outcome, residual_sup=rep.residual_sup)
    return rep, attempt


def _accepted(rep: Optional[SolveReport]) -> bool:
    return (
        rep is not None
        and rep.classification is Classification.INTERIOR
        and rep.within_interval
        and bool(rep.exclusion_lo)
        and bool(rep.exclusion_hi)
    )


def find_interior_fixed_point(
    T: MonotoneOperator,
    interval: OrderInterval,
    anchors: AnchorPair,
    cfg: SolverConfig = SolverConfig(),
) -> SolveReport:
    """Multi-start search for a fixed point of ``T`` outside ``[lo, p_minus]``
    and ``[p_plus, hi]``.

    Starts are tried in order of :func:`start_parameters`; the first accepted
    candidate is returned.  If none is accepted the report is
    ``no_convergence`` and lists every attempt.
    """
    attempts = []
    best = None
    total_iters = 0
    for index, t in enumerate(start_parameters(anchors, cfg.n_starts)):
        rep, attempt = _run_start(T, interval, anchors, cfg, index, t)
        attempts.append(attempt)
        if rep is None:
            continue
        total_iters += rep.iterations
        if _accepted(rep):
            return replace(
                rep, starts_tried=index + 1, iterations=total_iters, attempts=tuple(attempts)
            )
        if best is None or rep.residual_sup < best.residual_sup:
            best = rep
    if best is None:
        candidate = segment_point(interval, 0.5 * (anchors.t_minus + anchors.t_plus))
        ex_lo, ex_hi = _exclusions(candidate, anchors)
        best = SolveReport(
            candidate,
            _residual(T, candidate),
            Classification.NO_CONVERGENCE,
            0,
            exclusion_lo=ex_lo,
            exclusion_hi=ex_hi,
        )
    return replace(
        best,
        classification=Classification.NO_CONVERGENCE,
        starts_tried=len(attempts),
        iterations=total_iters,
        attempts=tuple(attempts),
        message="no start produced an accepted interior fixed point",
    )


@dataclass(frozen=True)
class ScanReport:
    clusters: tuple[SolveReport, ...]
    cluster_sizes: tuple[int, ...]
    radius: float
    starts_tried: int
    attempts: tuple = ()

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "starts_tried": self.starts_tried,
            "n_clusters": len(self.clusters),
            "clusters": [
                dict(rep.to_dict(), members=size)
                for rep, size in zip(self.clusters, self.cluster_sizes)
            ],
            "attempts": [dict(a) for a in self.attempts],
        }


def scan_fixed_points(
    T: MonotoneOperator,
    interval: OrderInterval,
    anchors: AnchorPair,
    cfg: SolverConfig = SolverConfig(),
    radius: Optional[float] = None,
) -> ScanReport:
    """Run every start and group accepted candidates into clusters.

    Two candidates belong to one cluster when their sup distance is at most
    ``radius`` (default ``1e-6`` times the interval diameter).  The member
    with the lowest start index represents its cluster.
    """
    if radius is None:
        radius = 1e-6 * interval.scale
    clusters: list[SolveReport] = []
    sizes: list[int] = []
    attempts = []
    for index, t in enumerate(start_parameters(anchors, cfg.n_starts)):
        rep, attempt = _run_start(T, interval, anchors, cfg, index, t)
        attempts.append(attempt)
        if not _accepted(rep):
            continue
        for c, existing in enumerate(clusters):
            if sup_norm(existing.candidate - rep.candidate) <= radius:
                sizes[c] += 1
                break
        else:
            clusters.append(replace(rep, starts_tried=index + 1))
            sizes.append(1)
    return ScanReport(tuple(clusters), tuple(sizes), radius, len(attempts), tuple(attempts))


def solve(
    T: MonotoneOperator,
    interval: OrderInterval,
    cfg: SolverConfig = SolverConfig(),
    n_samples: int = 1000,
) -> tuple[CertificationReport, AnchorPair, SolveReport]:
    """Certify, build anchors and search for the interior fixed point.

    Raises ``ValueError`` if certification fails; anchor failures propagate
    as :class:`AnchorSearchError`.
    """
    cert = certify(T, interval, cfg.strict_margin(interval), n_samples, cfg.seed)
    if not cert.passed:
        raise ValueError("certification failed: " + "; ".join(cert.failures()))
    anchors = find_anchors(T, interval, cfg)
    return cert, anchors, find_interior_fixed_point(T, interval, anchors, cfg)
