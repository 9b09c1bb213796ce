"""Exit criteria for the package, one marker per criterion.

Run ``pytest tests/test_acceptance.py`` to get the PASS/FAIL summary lines.
"""

import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from orderfix import (
    Classification,
    Grid,
    GridFunction,
    KernelSpec,
    NonlinearitySpec,
    OrderInterval,
    ProblemInstance,
    SolverConfig,
    assemble,
    certify,
    find_anchors,
    find_interior_fixed_point,
    get_instance,
    inf2,
    leq,
    lt,
    monotone_iterate,
    normality_constant,
    strictly_less,
    sup2,
    sup_norm,
    truncate,
)
from orderfix.cli import main

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"
CFG = SolverConfig()
LEMMA_INSTANCES = ["C1", "C2", "C3", "C4"]


def criterion(number, title):
    return pytest.mark.criterion(number, title)


# ---------------------------------------------------------------- 1

C1_TITLE = "lattice axioms, 10000 cases per law, exact, < 5 s"


@pytest.fixture(scope="module")
def lattice_cases():
    rng = np.random.default_rng(20240101)
    n = 8
    grid = Grid.trapezoid(0.0, 1.0, n)
    scales = 10.0 ** rng.integers(-3, 4, size=(10000, 3, 1))
    data = rng.normal(size=(10000, 3, n)) * scales
    # force ties in some components
    ties = rng.random((10000, n)) < 0.1
    data[:, 1][ties] = data[:, 0][ties]
    return grid, data


@criterion(1, C1_TITLE)
def test_lattice_axioms(lattice_cases):
    grid, data = lattice_cases
    t0 = time.perf_counter()
    failures = {k: 0 for k in ("comm", "assoc", "idem", "absorb", "transl")}
    for xs, ys, zs in data:
        x, y, z = GridFunction(grid, xs), GridFunction(grid, ys), GridFunction(grid, zs)
        s, i = sup2(x, y), inf2(x, y)
        failures["comm"] += not (s == sup2(y, x) and i == inf2(y, x))
        failures["assoc"] += not (
            sup2(s, z) == sup2(x, sup2(y, z)) and inf2(i, z) == inf2(x, inf2(y, z))
        )
        failures["idem"] += not (sup2(x, x) == x and inf2(x, x) == x)
        failures["absorb"] += not (inf2(x, s) == x and sup2(x, i) == x)
        failures["transl"] += not (sup2(x + 3.0, y + 3.0) == s + 3.0)
    elapsed = time.perf_counter() - t0
    assert failures == {k: 0 for k in failures}
    assert elapsed < 5.0


@criterion(1, C1_TITLE)
def test_least_upper_bound_sampled(lattice_cases):
    grid, data = lattice_cases
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    bad = 0
    for xs, ys, _ in data:
        s = sup2(GridFunction(grid, xs), GridFunction(grid, ys)).values
        # upper bounds built without sup2: pick the larger entry, add a
        # nonnegative increment that vanishes in about a third of the slots
        top = np.where(xs >= ys, xs, ys)
        inc = rng.exponential(size=(100, xs.size)) * (rng.random((100, xs.size)) > 0.3)
        Z = top + inc
        assert np.all(Z >= xs) and np.all(Z >= ys)
        bad += int(np.any(s > Z))
        bad += int(not (np.all(s >= xs) and np.all(s >= ys)))
    elapsed = time.perf_counter() - t0
    assert bad == 0
    assert elapsed < 5.0


@criterion(1, C1_TITLE)
def test_normality_constant_one(lattice_cases):
    grid, data = lattice_cases
    rng = np.random.default_rng(5)
    N = normality_constant()
    assert N == 1.0
    bad = 0
    for ys, _, _ in data:
        y = np.abs(ys)
        x = y * rng.random(y.size)
        gx, gy = GridFunction(grid, x), GridFunction(grid, y)
        assert leq(grid.constant(0.0), gx) and leq(gx, gy)
        bad += sup_norm(gx) > N * sup_norm(gy)
    assert bad == 0


# ---------------------------------------------------------------- 2


@criterion(2, "truncated operator maps into the interval, is monotone, fixes the endpoints; < 10 s")
def test_lemma1_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    for name in LEMMA_INSTANCES:
        inst = get_instance(name)
        I = inst.interval
        T_hat = truncate(assemble(inst), I)
        lo, hi = I.lo.values, I.hi.values
        for _ in range(1000):
            u = GridFunction(inst.grid, lo + rng.random(lo.size) * (hi - lo))
            assert I.contains(u)
            assert I.contains(T_hat(u)), name
        for _ in range(500):
            u = lo + rng.random(lo.size) * (hi - lo)
            v = np.minimum(u + rng.random(lo.size) * (hi - u), hi)
            gu, gv = GridFunction(inst.grid, u), GridFunction(inst.grid, v)
            assert leq(gu, gv)
            assert leq(T_hat(gu), T_hat(gv)), name
        assert T_hat(I.lo) == I.lo, name
        assert T_hat(I.hi) == I.hi, name
    assert time.perf_counter() - t0 < 10.0


# ---------------------------------------------------------------- 3


@criterion(3, "anchor chain on C1-C4; on C1 t_minus < 3/7 < t_plus; < 5 s")
@pytest.mark.parametrize("name", LEMMA_INSTANCES)
def test_anchor_chain(name):
    t0 = time.perf_counter()
    inst = get_instance(name)
    I = inst.interval
    T = assemble(inst)
    a = find_anchors(T, I, CFG)
    m = CFG.strict_margin(I)
    T_hat = truncate(T, I)
    assert strictly_less(I.lo, a.p_minus, m)
    assert strictly_less(a.p_minus, a.p_plus, m)
    assert strictly_less(a.p_plus, I.hi, m)
    assert lt(T_hat(a.p_minus), a.p_minus)
    assert lt(a.p_plus, T_hat(a.p_plus))
    if name == "C1":
        assert a.t_minus < 3 / 7 < a.t_plus
    assert time.perf_counter() - t0 < 5.0


# ---------------------------------------------------------------- 4


def _solve(name):
    inst = get_instance(name)
    T = assemble(inst)
    t0 = time.perf_counter()
    cert = certify(T, inst.interval, CFG.strict_margin(inst.interval), 1000, CFG.seed)
    assert cert.passed
    anchors = find_anchors(T, inst.interval, CFG)
    rep = find_interior_fixed_point(T, inst.interval, anchors, CFG)
    return rep, time.perf_counter() - t0


@criterion(4, "interior fixed point on C1-C4 at the stated tolerances; each < 10 s")
@pytest.mark.parametrize(
    "name, value_tol, res_tol",
    [("C1", 1e-8, 1e-10), ("C2", 1e-6, None), ("C3", 1e-8, None), ("C4", None, 1e-8)],
)
def test_end_to_end(name, value_tol, res_tol):
    rep, elapsed = _solve(name)
    assert rep.classification is Classification.INTERIOR
    assert rep.within_interval and rep.exclusion_lo and rep.exclusion_hi
    if value_tol is not None:
        assert sup_norm(rep.candidate - 1.0) <= value_tol
    if res_tol is not None:
        assert rep.residual_sup <= res_tol
    assert elapsed < 10.0


# ---------------------------------------------------------------- 5


@criterion(5, "monotone iteration from the anchors collapses onto the clamp endpoints (C1)")
def test_spurious_fixed_points():
    inst = get_instance("C1")
    I = inst.interval
    T = assemble(inst)
    a = find_anchors(T, I, CFG)
    T_hat = truncate(T, I)
    down = monotone_iterate(T_hat, a.p_minus, I, CFG)
    up = monotone_iterate(T_hat, a.p_plus, I, CFG)
    assert down.classification is Classification.COLLAPSE_LO
    assert up.classification is Classification.COLLAPSE_HI
    # fixed by the truncation, not by T
    for rep, end in ((down, I.lo), (up, I.hi)):
        assert T_hat(end) == end
        assert rep.residual_sup > 0.1


# ---------------------------------------------------------------- 6


def _quadrature_error(n):
    g = Grid.trapezoid(0.0, 1.0, n)
    I = OrderInterval(g.constant(0.25), g.constant(2.0))
    inst = ProblemInstance("q", g, KernelSpec.exponential_decay(1.0), NonlinearitySpec.power(2.0), I)
    u = 0.25 + 1.75 * g.points**2
    out = assemble(inst)(GridFunction(g, u)).values
    exact = np.array(
        [
            quad(
                lambda y: np.exp(-abs(x - y)) * (0.25 + 1.75 * y**2) ** 2,
                0.0,
                1.0,
                points=[x],
                epsabs=1e-14,
                epsrel=1e-14,
            )[0]
            for x in g.points
        ]
    )
    return np.max(np.abs(out - exact))


@criterion(6, "trapezoid error ratio 101 -> 201 points in [3.5, 4.5]")
def test_quadrature_order():
    ratio = _quadrature_error(101) / _quadrature_error(201)
    assert 3.5 <= ratio <= 4.5


# ---------------------------------------------------------------- 7


@pytest.fixture
def problem(tmp_path):
    def copy(name):
        dst = tmp_path / f"{name}.toml"
        shutil.copy(PROBLEMS / f"{name}.toml", dst)
        return str(dst)

    return copy


@criterion(7, "negative controls exit 1 with correctly signed margins")
def test_negative_controls(problem, capsys):
    import json

    assert main(["certify", problem("C5")]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["certification"]["super_margin"] < 0
    assert rep["certification"]["sub_margin"] < 0
    assert rep["certification"]["interval_order_margin"] > 0

    assert main(["anchors", problem("identity")]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["certification"]["super_margin"] == 0.0
    assert rep["certification"]["sub_margin"] == 0.0
    assert "anchor search failed" in rep["anchors"]["error"]

    assert main(["solve", problem("C5")]) == 1
    assert main(["solve", problem("identity")]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------- 8


@criterion(8, "repeated solve runs with seed 0 give byte-identical reports")
@pytest.mark.parametrize("name", ["C1", "C4"])
def test_determinism(problem, name):
    path = problem(name)

    def once():
        res = subprocess.run(
            [sys.executable, "-m", "orderfix", "solve", path, "--seed", "0"],
            capture_output=True,
            check=False,
        )
        assert res.returncode == 0, res.stderr.decode()
        csv = Path(path).with_name(f"{name}.solution.csv").read_bytes()
        return res.stdout, csv

    first, second = once(), once()
    assert first[0] == second[0]
    assert first[1] == second[1]
