from pathlib import Path

import numpy as np
import pytest

from orderfix import assemble, catalog
from orderfix.problemfile import (
    ProblemFileError,
    dump_problem,
    dumps_report,
    load_problem,
    read_values_csv,
    write_values_csv,
)

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"

BASE = """\
[meta]
label = "square"

[grid]
n_points = 1
domain = [0.0, 0.0]

[kernel]
kind = "constant"
c = 1.0

[nonlinearity]
kind = "power"
q = 2.0

[interval]
u_minus = 0.25
u_plus = 2.0
"""


def write(tmp_path, text, name="p.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_basic(tmp_path):
    inst, solver = load_problem(write(tmp_path, BASE))
    assert inst.label == "square" and inst.name == "p"
    assert inst.grid.size == 1
    assert inst.interval.lo.values.tolist() == [0.25]
    assert solver == {}


def test_solver_section(tmp_path):
    text = BASE + "\n[solver]\nn_starts = 4\ntol_res = 1e-12\nseed = 3\n"
    _, solver = load_problem(write(tmp_path, text))
    assert solver == {"n_starts": 4, "tol_res": 1e-12, "seed": 3}


@pytest.mark.parametrize(
    "text, key",
    [
        (BASE.replace("c = 1.0", "c = 1.0\nbogus = 2"), "kernel.bogus"),
        (BASE + "\n[extra]\nx = 1\n", "extra"),
        (BASE.replace("q = 2.0", "q = 2.0\nalpha = 1.0"), "nonlinearity.alpha"),
        (BASE.replace("c = 1.0", "alpha = 1.0"), "kernel.alpha"),
        (BASE.replace("u_plus = 2.0\n", ""), "interval.u_plus"),
        (BASE.replace("n_points = 1", "n_points = 1.5"), "grid.n_points"),
        (BASE.replace("u_plus = 2.0", "u_plus = nan"), "interval.u_plus"),
        (BASE.replace("u_plus = 2.0", "u_plus = inf"), "interval.u_plus"),
        (BASE.replace('kind = "power"', 'kind = "sine"'), "nonlinearity.kind"),
        (BASE + "\n[solver]\nwarp = 9\n", "solver.warp"),
    ],
)
def test_rejections_name_the_key(tmp_path, text, key):
    with pytest.raises(ProblemFileError) as info:
        load_problem(write(tmp_path, text))
    assert info.value.key == key
    assert key in str(info.value)


def test_syntax_error_reports_line(tmp_path):
    with pytest.raises(ProblemFileError, match="line"):
        load_problem(write(tmp_path, BASE.replace("q = 2.0", "q = = 2.0")))


def test_missing_file(tmp_path):
    with pytest.raises(ProblemFileError):
        load_problem(tmp_path / "nope.toml")


def test_misordered_endpoints_load(tmp_path):
    text = BASE.replace("u_minus = 0.25", "u_minus = 3.0")
    inst, _ = load_problem(write(tmp_path, text))
    assert not inst.interval.is_ordered


def test_csv_endpoints_and_kernel(tmp_path):
    (tmp_path / "lo.csv").write_text("x,u\n0,0.25\n0.5,0.3\n1,0.25\n")
    (tmp_path / "K.csv").write_text("1,0.5,0.25\n0.5,1,0.5\n0.25,0.5,1\n")
    text = """\
[grid]
n_points = 3
domain = [0.0, 1.0]
[kernel]
kind = "table"
csv = "K.csv"
scale = 0.5
[nonlinearity]
kind = "affine_power"
a = 0.0
b = 1.0
q = 2.0
[interval]
u_minus = "lo.csv"
u_plus = 2.0
"""
    inst, _ = load_problem(write(tmp_path, text))
    assert inst.interval.lo.values.tolist() == [0.25, 0.3, 0.25]
    T = assemble(inst)
    assert T.matrix[0, 1] == pytest.approx(0.5 * 0.5 * 0.5)


def test_csv_wrong_length(tmp_path):
    (tmp_path / "lo.csv").write_text("0.25\n0.3\n")
    text = BASE.replace("u_minus = 0.25", 'u_minus = "lo.csv"')
    with pytest.raises(ProblemFileError, match="interval.u_minus"):
        load_problem(write(tmp_path, text))


def test_values_csv_roundtrip(tmp_path):
    inst = catalog()[3]
    u = inst.interval.lo + 0.123456789012345678
    write_values_csv(tmp_path / "u.csv", u)
    back = read_values_csv(tmp_path / "u.csv")
    assert np.array_equal(back[:, 1], u.values)
    assert np.array_equal(back[:, 0], inst.grid.points)


@pytest.mark.parametrize("inst", catalog(), ids=lambda i: i.name)
def test_dump_roundtrip(tmp_path, inst):
    p = write(tmp_path, dump_problem(inst), f"{inst.name}.toml")
    back, _ = load_problem(p)
    assert back.name == inst.name and back.label == inst.label
    assert back.scale == inst.scale
    assert np.array_equal(assemble(back).matrix, assemble(inst).matrix)
    u = inst.interval.hi
    assert assemble(back)(u) == assemble(inst)(u)


@pytest.mark.parametrize("inst", catalog(), ids=lambda i: i.name)
def test_shipped_files_match_catalog(inst):
    back, _ = load_problem(PROBLEMS / f"{inst.name}.toml")
    assert back.scale == inst.scale
    assert back.interval.lo == inst.interval.lo and back.interval.hi == inst.interval.hi
    assert np.array_equal(assemble(back).matrix, assemble(inst).matrix)


def test_report_format():
    text = dumps_report({"b": 0.1, "a": [1, 2.5], "c": {"z": True, "y": None}, "d": "x"})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "0.10000000000000001" in text
    assert "[1, 2.5]" in text
    assert "true" in text and "null" in text
    import json

    assert json.loads(text)["b"] == 0.1
