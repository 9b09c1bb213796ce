"""Problem files (TOML), per-point CSV values and deterministic JSON reports.

A problem file has the sections ``[meta]``, ``[grid]``, ``[kernel]``,
``[nonlinearity]``, ``[interval]`` and optionally ``[solver]``::

    [meta]
    label = "scalar square map"

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
    u_plus = 2.0        # a number, or the path of a per-point CSV file

Relative paths are resolved against the problem file's directory.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .hammerstein import KernelSpec, NonlinearitySpec, ProblemInstance
from .lattice import Grid, GridFunction, OrderInterval

__all__ = [
    "ProblemFileError",
    "SOLVER_KEYS",
    "load_problem",
    "parse_problem",
    "dump_problem",
    "read_values_csv",
    "write_values_csv",
    "dumps_report",
]

KERNEL_PARAMS = {
    "constant": ("c",),
    "separable": ("g",),
    "exponential_decay": ("alpha",),
    "table": ("matrix", "csv"),
}
NONLINEARITY_PARAMS = {
    "power": ("q",),
    "affine_power": ("a", "b", "q"),
    "table": ("u", "f"),
}
SOLVER_KEYS = (
    "tol_res",
    "tol_step",
    "max_iter",
    "damping",
    "n_starts",
    "relative_margin",
    "seed",
    "fd_step",
    "newton_max_iter",
    "n_samples",
)
SECTIONS = {
    "meta": ("label", "name"),
    "grid": ("n_points", "domain"),
    "kernel": ("kind", "scale", "c", "g", "alpha", "matrix", "csv"),
    "nonlinearity": ("kind", "q", "a", "b", "u", "f"),
    "interval": ("u_minus", "u_plus"),
    "solver": SOLVER_KEYS,
}
REQUIRED = {
    "grid": ("n_points", "domain"),
    "kernel": ("kind",),
    "nonlinearity": ("kind",),
    "interval": ("u_minus", "u_plus"),
}


class ProblemFileError(ValueError):
    """Malformed problem file; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFileError(f"expected a number, got {value!r}", key)
    value = float(value)
    if not math.isfinite(value):
        raise ProblemFileError("value must be finite", key)
    return value


def _integer(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFileError(f"expected an integer, got {value!r}", key)
    return value


def _numbers(value: Any, key: str) -> np.ndarray:
    if not isinstance(value, list):
        raise ProblemFileError("expected an array of numbers", key)
    return np.array([_number(v, f"{key}[{i}]") for i, v in enumerate(value)])


def read_values_csv(path) -> np.ndarray:
    """Values from a per-point CSV: the last column of every numeric row.

    A non-numeric first row is taken as a header and skipped.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ProblemFileError(f"{path}: line {lineno}: non-numeric entry")
    return np.array(rows, dtype=float)


def write_values_csv(path, u: GridFunction) -> None:
    buf = io.StringIO()
    buf.write("x,u\n")
    for x, v in zip(u.grid.points, u.values):
        buf.write(f"{float(x):.17g},{float(v):.17g}\n")
    Path(path).write_text(buf.getvalue())


def _resolve(base: Optional[Path], name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() or base is None else base / p


def _endpoint(value: Any, key: str, grid: Grid, base: Optional[Path]) -> GridFunction:
    if isinstance(value, str):
        table = read_values_csv(_resolve(base, value))
        vals = table[:, -1] if table.ndim == 2 and table.size else table.reshape(-1)
        if vals.size != grid.size:
            raise ProblemFileError(f"CSV has {vals.size} values, grid has {grid.size}", key)
        try:
            return GridFunction(grid, vals)
        except ValueError as exc:
            raise ProblemFileError(str(exc), key) from None
    return grid.constant(_number(value, key))


def parse_problem(
    doc: dict, base: Optional[Path] = None, name: str = "problem"
) -> tuple[ProblemInstance, dict]:
    """Build a :class:`ProblemInstance` and the ``[solver]`` overrides from a
    parsed TOML document."""
    for section, body in doc.items():
        if section not in SECTIONS:
            raise ProblemFileError("unknown section", section)
        if not isinstance(body, dict):
            raise ProblemFileError("expected a table", section)
        for key in body:
            if key not in SECTIONS[section]:
                raise ProblemFileError("unknown key", f"{section}.{key}")
    for section, keys in REQUIRED.items():
        for key in keys:
            if key not in doc.get(section, {}):
                raise ProblemFileError("missing required key", f"{section}.{key}")

    meta = doc.get("meta", {})
    g = doc["grid"]
    n = _integer(g["n_points"], "grid.n_points")
    domain = _numbers(g["domain"], "grid.domain")
    if domain.size != 2:
        raise ProblemFileError("expected [a, b]", "grid.domain")
    try:
        grid = Grid.trapezoid(domain[0], domain[1], n)
    except ValueError as exc:
        raise ProblemFileError(str(exc), "grid") from None

    k = doc["kernel"]
    kind = k["kind"]
    if kind not in KERNEL_PARAMS:
        raise ProblemFileError(f"unknown kernel kind {kind!r}", "kernel.kind")
    _only(k, "kernel", ("kind", "scale") + KERNEL_PARAMS[kind])
    scale = _number(k.get("scale", 1.0), "kernel.scale")
    if kind == "constant":
        kernel = KernelSpec.constant(_number(k.get("c", 1.0), "kernel.c"))
    elif kind == "separable":
        kernel = KernelSpec.separable(_numbers(_need(k, "g", "kernel"), "kernel.g"))
    elif kind == "exponential_decay":
        kernel = KernelSpec.exponential_decay(_number(k.get("alpha", 1.0), "kernel.alpha"))
    else:
        if "csv" in k:
            if not isinstance(k["csv"], str):
                raise ProblemFileError("expected a path", "kernel.csv")
            matrix = read_values_csv(_resolve(base, k["csv"]))
        elif "matrix" in k:
            rows = k["matrix"]
            if not isinstance(rows, list):
                raise ProblemFileError("expected an array of rows", "kernel.matrix")
            matrix = np.array([_numbers(r, f"kernel.matrix[{i}]") for i, r in enumerate(rows)])
        else:
            raise ProblemFileError("table kernel needs 'csv' or 'matrix'", "kernel")
        kernel = KernelSpec.table(matrix)

    f = doc["nonlinearity"]
    fkind = f["kind"]
    if fkind not in NONLINEARITY_PARAMS:
        raise ProblemFileError(f"unknown nonlinearity kind {fkind!r}", "nonlinearity.kind")
    _only(f, "nonlinearity", ("kind",) + NONLINEARITY_PARAMS[fkind])
    try:
        if fkind == "power":
            nonlin = NonlinearitySpec.power(_number(_need(f, "q", "nonlinearity"), "nonlinearity.q"))
        elif fkind == "affine_power":
            nonlin = NonlinearitySpec.affine_power(
                *(_number(_need(f, p, "nonlinearity"), f"nonlinearity.{p}") for p in "abq")
            )
        else:
            nonlin = NonlinearitySpec.table(
                _numbers(_need(f, "u", "nonlinearity"), "nonlinearity.u"),
                _numbers(_need(f, "f", "nonlinearity"), "nonlinearity.f"),
            )
    except ProblemFileError:
        raise
    except ValueError as exc:
        raise ProblemFileError(str(exc), "nonlinearity") from None

    iv = doc["interval"]
    lo = _endpoint(iv["u_minus"], "interval.u_minus", grid, base)
    hi = _endpoint(iv["u_plus"], "interval.u_plus", grid, base)
    # misordered endpoints are a certification failure, not an input error
    interval = OrderInterval.unchecked(lo, hi)

    solver = {}
    for key, value in doc.get("solver", {}).items():
        if key in ("max_iter", "n_starts", "seed", "newton_max_iter", "n_samples"):
            solver[key] = _integer(value, f"solver.{key}")
        else:
            solver[key] = _number(value, f"solver.{key}")

    label = meta.get("label", name)
    if not isinstance(label, str):
        raise ProblemFileError("expected a string", "meta.label")
    inst = ProblemInstance(
        name=str(meta.get("name", name)),
        grid=grid,
        kernel=kernel,
        nonlinearity=nonlin,
        interval=interval,
        scale=scale,
        label=label,
    )
    return inst, solver


def _need(table: dict, key: str, section: str):
    if key not in table:
        raise ProblemFileError("missing required key", f"{section}.{key}")
    return table[key]


def _only(table: dict, section: str, allowed: tuple) -> None:
    for key in table:
        if key not in allowed:
            raise ProblemFileError(
                f"not a parameter of kind {table['kind']!r}", f"{section}.{key}"
            )


def load_problem(path) -> tuple[ProblemInstance, dict]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{path}: {exc}") from None
    return parse_problem(doc, base=path.parent, name=path.stem)


def _toml_value(v) -> str:
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {type(v).__name__} to TOML")


def dump_problem(inst: ProblemInstance, solver: Optional[dict] = None) -> str:
    """TOML text that :func:`load_problem` turns back into ``inst``.

    Only constant interval endpoints and trapezoidal grids are supported.
    """
    lo, hi = inst.interval.lo.values, inst.interval.hi.values
    if np.ptp(lo) != 0 or np.ptp(hi) != 0:
        raise ValueError("dump_problem writes constant endpoints only")
    sections = {
        "meta": {"name": inst.name, "label": inst.label},
        "grid": {"n_points": inst.grid.size, "domain": [inst.grid.a, inst.grid.b]},
        "kernel": {"kind": inst.kernel.kind, "scale": inst.scale},
        "nonlinearity": {"kind": inst.nonlinearity.kind},
        "interval": {"u_minus": float(lo[0]), "u_plus": float(hi[0])},
    }
    for key, value in inst.kernel.params.items():
        if callable(value):
            value = value(inst.grid.points)
        if isinstance(value, np.ndarray) and value.ndim == 2:
            value = [list(row) for row in value]
        sections["kernel"][key] = value
    for key, value in inst.nonlinearity.params.items():
        sections["nonlinearity"][key] = value
    if solver:
        sections["solver"] = dict(solver)
    lines = []
    for name, body in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in body.items())
        lines.append("")
    return "\n".join(lines)


def _json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return format(x, ".17g")
        return '"nan"' if math.isnan(x) else ('"inf"' if x > 0 else '"-inf"')
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{_json(str(k), indent, level)}: {_json(obj[k], indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_json(x, indent, level + 1) for x in obj) + "]"
        items = [f"{pad}{_json(x, indent, level + 1)}" for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    return _json(obj, indent, 0) + "\n"
