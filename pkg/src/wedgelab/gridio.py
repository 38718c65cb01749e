"""Deterministic CSV/JSON serialization for scan grids and records.

Two formats only.  CSV carries grids and surface point sets (header row,
row-major cells); JSON carries records (fixed points, bifurcation points,
spectra, orbit results).  Floats are always written with 17 significant
digits, '.' decimal separator and '\\n' line endings, so a rerun with the
same inputs produces byte-identical files and every file re-parses to the
bit-identical values.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np

from .odelab import OdeScanGrid
from .orbits import AttractorClass, ScanGrid
from .resonance import SurfaceSample

__all__ = [
    "format_float",
    "to_jsonable",
    "dump_json",
    "load_json",
    "write_map_grid",
    "write_ode_grid",
    "write_surfaces",
    "write_points",
    "read_grid_csv",
    "ParsedGrid",
]


def format_float(v: float) -> str:
    """17 significant digits; round-trips any finite double exactly."""
    return format(float(v), ".17g")


# -- JSON ---------------------------------------------------------------------
#
# json.dumps formats floats with repr (shortest round-trip), which is
# deterministic but not the fixed 17-digit convention used in the CSV
# writers.  A small recursive emitter keeps both formats on one rule and
# handles complex numbers, enums, dataclasses and numpy scalars in one
# place.  NaN/Infinity use the Python json tokens so load_json can read
# them back.


def _emit(v: Any, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if v is None:
        out.append("null")
    elif isinstance(v, bool):
        out.append("true" if v else "false")
    elif isinstance(v, (int, np.integer)):
        out.append(str(int(v)))
    elif isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            out.append("NaN")
        elif math.isinf(x):
            out.append("Infinity" if x > 0 else "-Infinity")
        else:
            out.append(format_float(x))
    elif isinstance(v, (complex, np.complexfloating)):
        z = complex(v)
        out.append('{"re": ')
        _emit(z.real, out, indent)
        out.append(', "im": ')
        _emit(z.imag, out, indent)
        out.append("}")
    elif isinstance(v, Enum):
        _emit(v.value, out, indent)
    elif isinstance(v, str):
        out.append(json.dumps(v))
    elif dataclasses.is_dataclass(v) and not isinstance(v, type):
        _emit(
            {f.name: getattr(v, f.name) for f in dataclasses.fields(v)},
            out,
            indent,
        )
    elif isinstance(v, np.ndarray):
        _emit(v.tolist(), out, indent)
    elif isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        items = list(v.items())
        for k, (key, val) in enumerate(items):
            out.append(pad + "  " + json.dumps(str(key)) + ": ")
            _emit(val, out, indent + 1)
            out.append(",\n" if k + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(v, (list, tuple)):
        if not v:
            out.append("[]")
            return
        out.append("[\n")
        for k, item in enumerate(v):
            out.append(pad + "  ")
            _emit(item, out, indent + 1)
            out.append(",\n" if k + 1 < len(v) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(v).__name__}: {v!r}")


def to_jsonable(v: Any) -> str:
    """Serialize a record tree to a JSON string (no trailing newline)."""
    out: list[str] = []
    _emit(v, out, 0)
    return "".join(out)


def dump_json(v: Any, path_or_file) -> None:
    text = to_jsonable(v) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="\n") as fh:
            fh.write(text)


def load_json(path_or_file) -> Any:
    if hasattr(path_or_file, "read"):
        return json.loads(path_or_file.read())
    with open(path_or_file) as fh:
        return json.load(fh)


# -- CSV grids ----------------------------------------------------------------
#
# Shared schema i,j,param1,param2,class,lyap...,rotation,flags; the header
# names the two swept parameters.  Map grids carry two exponents and a
# rotation number, flow grids four exponents and an empty rotation (the
# scan does not measure one).  Flags are ';'-joined inside the last field.


def _join_flags(flags: Sequence[str]) -> str:
    for f in flags:
        if "," in f or ";" in f or "\n" in f:
            raise ValueError(f"flag not CSV-safe: {f!r}")
    return ";".join(flags)


def _write_text(path_or_file, text: str) -> None:
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="\n") as fh:
            fh.write(text)


def write_map_grid(grid: ScanGrid, path_or_file) -> None:
    """Row-major CSV of a two-parameter map scan.

    The class column holds the AttractorClass value string, empty for a
    cell whose worker failed (the failure reason stays in flags).
    """
    a0, a1 = grid.axes
    v0, v1 = a0.values(), a1.values()
    buf = io.StringIO()
    buf.write(f"i,j,{a0.name},{a1.name},class,lyap1,lyap2,rotation,flags\n")
    for i in range(a0.count):
        for j in range(a1.count):
            cls = grid.classes[i][j]
            buf.write(
                f"{i},{j},{format_float(v0[i])},{format_float(v1[j])},"
                f"{'' if cls is None else cls.value},"
                f"{format_float(grid.le1[i, j])},{format_float(grid.le2[i, j])},"
                f"{format_float(grid.rotation[i, j])},"
                f"{_join_flags(grid.flags[i][j])}\n"
            )
    _write_text(path_or_file, buf.getvalue())


def write_ode_grid(grid: OdeScanGrid, path_or_file) -> None:
    """Row-major CSV of a (tau1, tau2) flow scan; class is the count of
    non-negative exponents, -1 for a failed cell."""
    a0, a1 = grid.axes
    v0, v1 = a0.values(), a1.values()
    buf = io.StringIO()
    buf.write(
        f"i,j,{a0.name},{a1.name},class,lyap1,lyap2,lyap3,lyap4,rotation,flags\n"
    )
    for i in range(a0.count):
        for j in range(a1.count):
            les = ",".join(format_float(grid.exponents[i, j, k]) for k in range(4))
            buf.write(
                f"{i},{j},{format_float(v0[i])},{format_float(v1[j])},"
                f"{int(grid.classes[i, j])},{les},,"
                f"{_join_flags(grid.flags[i][j])}\n"
            )
    _write_text(path_or_file, buf.getvalue())


def write_surfaces(samples: Iterable[SurfaceSample], path_or_file) -> None:
    buf = io.StringIO()
    buf.write("label,branch,ell,A,lam,omega,residual\n")
    for s in samples:
        buf.write(
            f"{s.label.value},{s.branch},{s.ell},{format_float(s.A)},"
            f"{format_float(s.lam)},{format_float(s.omega)},"
            f"{format_float(s.residual)}\n"
        )
    _write_text(path_or_file, buf.getvalue())


def write_points(points: np.ndarray, path_or_file) -> None:
    """CSV of an (N, 2) point sequence (manifold traces)."""
    pts = np.asarray(points, dtype=float)
    buf = io.StringIO()
    buf.write("index,x,y\n")
    for k in range(pts.shape[0]):
        buf.write(f"{k},{format_float(pts[k, 0])},{format_float(pts[k, 1])}\n")
    _write_text(path_or_file, buf.getvalue())


@dataclasses.dataclass(frozen=True)
class ParsedGrid:
    """Re-parsed CSV grid; arrays match the writer's inputs bit for bit."""

    names: tuple[str, str]
    shape: tuple[int, int]
    param1: np.ndarray
    param2: np.ndarray
    classes: list[list[Any]]  # str or None (map), int (flow)
    exponents: np.ndarray  # (n0, n1, 2) or (n0, n1, 4)
    rotation: np.ndarray | None
    flags: list[list[tuple[str, ...]]]


def read_grid_csv(path_or_file) -> ParsedGrid:
    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().split("\n")
    else:
        with open(path_or_file, newline="") as fh:
            lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = lines[0].split(",")
    if header[:2] != ["i", "j"] or header[4] != "class":
        raise ValueError(f"unrecognized grid header: {lines[0]!r}")
    n_lyap = sum(1 for h in header if h.startswith("lyap"))
    names = (header[2], header[3])
    flow = n_lyap == 4

    rows = [line.split(",", maxsplit=9 + n_lyap - 2) for line in lines[1:]]
    n0 = max(int(r[0]) for r in rows) + 1
    n1 = max(int(r[1]) for r in rows) + 1
    if len(rows) != n0 * n1:
        raise ValueError(f"expected {n0 * n1} cells, found {len(rows)}")
    param1 = np.full(n0, np.nan)
    param2 = np.full(n1, np.nan)
    classes: list[list[Any]] = [[None] * n1 for _ in range(n0)]
    exponents = np.full((n0, n1, n_lyap), np.nan)
    rotation = np.full((n0, n1), np.nan)
    flags: list[list[tuple[str, ...]]] = [[()] * n1 for _ in range(n0)]
    for r in rows:
        i, j = int(r[0]), int(r[1])
        param1[i] = float(r[2])
        param2[j] = float(r[3])
        classes[i][j] = int(r[4]) if flow else (r[4] or None)
        for k in range(n_lyap):
            exponents[i, j, k] = float(r[5 + k])
        rot = r[5 + n_lyap]
        rotation[i, j] = float(rot) if rot else np.nan
        raw = r[6 + n_lyap]
        flags[i][j] = tuple(raw.split(";")) if raw else ()
    return ParsedGrid(
        names=names,
        shape=(n0, n1),
        param1=param1,
        param2=param2,
        classes=classes,
        exponents=exponents,
        rotation=None if flow else rotation,
        flags=flags,
    )
