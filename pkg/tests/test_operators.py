import numpy as np
import pytest

from orderfix import (
    EvaluationError,
    Grid,
    GridFunction,
    MonotoneOperator,
    OrderInterval,
    StrictMargin,
    assemble,
    catalog,
    certify,
    certify_boundary,
    certify_monotone,
    check_endpoints_fixed,
    leq,
    sup_norm,
    truncate,
)
from orderfix.lattice import clamp_to_interval

G1 = Grid.scalar()
G2 = Grid.trapezoid(0.0, 1.0, 2)


def scalar_op(f, label="T"):
    return MonotoneOperator.from_array_map(f, label=label)


def interval1(a, b, check=True):
    return OrderInterval(G1.constant(a), G1.constant(b), check=check)


SQUARE = scalar_op(np.square, "square")
I1 = interval1(0.25, 2.0)
M1 = StrictMargin.for_interval(I1)


def test_truncate_endpoints_and_interior():
    T_hat = truncate(SQUARE, I1)
    assert T_hat(G1.constant(2.0)) == G1.constant(2.0)
    assert T_hat(G1.constant(0.25)) == G1.constant(0.25)
    assert T_hat(G1.constant(1.0)) == G1.constant(1.0)
    assert T_hat.base is SQUARE


def test_truncate_clamps_raw_values():
    T_hat = truncate(SQUARE, I1)
    assert T_hat(G1.constant(1.5)) == G1.constant(2.0)
    assert T_hat(G1.constant(0.3)) == G1.constant(0.25)


def test_output_grid_checked():
    bad = MonotoneOperator(lambda u: G2.constant(0.0))
    with pytest.raises(ValueError):
        bad(G1.constant(1.0))


def test_monotone_examples():
    assert certify_monotone(SQUARE, I1, 1000, seed=0).ok
    neg = certify_monotone(scalar_op(np.negative), I1, 50, seed=0)
    assert not neg.ok
    u, v = neg.counterexample
    assert leq(u, v) and not leq(-u, -v)
    I2 = OrderInterval(G2.constant(0.25), G2.constant(2.0))
    assert certify_monotone(scalar_op(np.square), I2, 1000, seed=1).ok


def test_monotone_sampling_is_seeded():
    a = certify_monotone(scalar_op(np.sin), interval1(0.0, 6.0), 200, seed=3)
    b = certify_monotone(scalar_op(np.sin), interval1(0.0, 6.0), 200, seed=3)
    assert a == b
    assert not a.ok


def test_monotone_needs_samples():
    with pytest.raises(ValueError):
        certify_monotone(SQUARE, I1, 0)


def test_evaluation_failure_carries_input():
    def broken(v):
        raise RuntimeError("boom")

    with pytest.raises(EvaluationError) as info:
        certify_monotone(scalar_op(broken), I1, 5)
    assert isinstance(info.value.input, GridFunction)


def test_boundary_square():
    chk = certify_boundary(SQUARE, I1, M1)
    assert chk.super_margin == 0.1875
    assert chk.sub_margin == 2.0
    assert chk.interval_order_margin == 1.75
    assert chk.passed


def test_boundary_identity_fails():
    chk = certify_boundary(scalar_op(lambda v: v.copy()), I1, M1)
    assert chk.super_margin == 0.0
    assert not chk.passed


def test_boundary_reversed_roles_fails():
    I = interval1(2.0, 0.25, check=False)
    chk = certify_boundary(SQUARE, I, StrictMargin.for_interval(I))
    assert chk.interval_order_margin < 0
    assert not chk.passed


def test_endpoints_fixed_examples():
    assert check_endpoints_fixed(truncate(SQUARE, I1), I1)
    shift = scalar_op(lambda v: v + 1.0)
    T_hat = truncate(shift, I1)
    assert T_hat(G1.constant(0.25)) == G1.constant(1.25)
    assert not check_endpoints_fixed(T_hat, I1)
    const = truncate(scalar_op(lambda v: np.ones_like(v)), I1)
    assert not check_endpoints_fixed(const, I1)


def test_certify_combines_checks():
    rep = certify(SQUARE, I1)
    assert rep.passed and rep.monotone_ok and rep.endpoints_fixed_by_truncation
    assert rep.normality_constant == 1.0
    assert rep.strict_margin == pytest.approx(1.75e-8)
    d = rep.to_dict()
    assert d["passed"] and d["monotone_counterexample"] is None
    bad = certify(scalar_op(np.sqrt), I1)
    assert not bad.passed and bad.super_margin < 0
    assert any("super_margin" in f for f in bad.failures())


CERTIFIED = [inst for inst in catalog() if inst.name in ("C1", "C2", "C3", "C4", "C6")]


@pytest.mark.parametrize("inst", CERTIFIED, ids=lambda i: i.name)
def test_certified_implies_endpoints_fixed(inst):
    T = assemble(inst)
    rep = certify(T, inst.interval)
    assert rep.passed
    assert rep.endpoints_fixed_by_truncation


@pytest.mark.parametrize("inst", CERTIFIED, ids=lambda i: i.name)
def test_truncation_identity_inside_interval(inst):
    T = assemble(inst)
    T_hat = truncate(T, inst.interval)
    rng = np.random.default_rng(11)
    lo, hi = inst.interval.lo.values, inst.interval.hi.values
    hits = 0
    for _ in range(300):
        u = GridFunction(inst.grid, lo + rng.random(lo.size) * (hi - lo))
        Tu = T(u)
        if inst.interval.contains(Tu):
            hits += 1
            assert T_hat(u) == Tu
        else:
            assert T_hat(u) == clamp_to_interval(Tu, inst.interval)
    assert hits > 0


@pytest.mark.parametrize("inst", CERTIFIED, ids=lambda i: i.name)
def test_truncation_continuity_probe(inst):
    """Perturbations of size h move the truncated image by at most L * h."""
    T = assemble(inst)
    I = inst.interval
    T_hat = truncate(T, I)
    lo, hi = I.lo.values, I.hi.values
    # Lipschitz bound: ||A||_inf * max |f'| over the value range
    s = np.linspace(*I.value_bounds, 2001)
    fprime = np.max(np.abs(np.gradient(T.f(s), s)))
    L = float(np.max(np.abs(T.matrix).sum(axis=1))) * fprime * 1.01
    rng = np.random.default_rng(5)
    for h in (1e-2, 1e-4, 1e-6):
        worst = 0.0
        for _ in range(50):
            u = GridFunction(inst.grid, lo + rng.random(lo.size) * (hi - lo))
            delta = (2 * rng.random(lo.size) - 1) * h
            v = clamp_to_interval(u + GridFunction(inst.grid, delta), I)
            worst = max(worst, sup_norm(T_hat(v) - T_hat(u)))
        assert worst <= L * h
