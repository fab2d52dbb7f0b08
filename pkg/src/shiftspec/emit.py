"""Deterministic output formats: CSV, JSON, PGM.

All floating-point output uses 17 significant digits so that re-reading a
file reproduces the computed values exactly.  Row order is fixed (row-major
over base cells, y ascending then x ascending), so identical inputs give
byte-identical files regardless of worker count.  Non-finite values are
emitted as the strings "inf"/"-inf"/"nan" in JSON (JSON has no literal for
them) and as those literals in CSV, which float() parses back.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math

import numpy as np

from .oracle import OracleReport
from .spectrum import CLASS_NAMES, BoundaryPolyline, RegionGrid

__all__ = [
    "fmt17",
    "json_ready",
    "dump_json",
    "grid_to_csv",
    "grid_from_csv",
    "grid_to_obj",
    "grid_to_pgm",
    "boundary_to_obj",
    "report_to_obj",
    "eigenvalues_to_csv",
    "sigma_grid_to_csv",
]

GRID_CSV_HEADER = "re,im,class,r_plus,r_minus,margin"
_PGM_SHADE = {0: 0, 1: 255, 2: 128}  # outside, inside, boundary


def fmt17(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def json_ready(obj):
    """Recursively convert to JSON-safe structures (see module docstring)."""
    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [json_ready(float(obj.real)), json_ready(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dump_json(obj) -> str:
    return json.dumps(json_ready(obj), indent=2, sort_keys=True) + "\n"


def grid_to_csv(grid: RegionGrid) -> str:
    out = io.StringIO()
    out.write(GRID_CSV_HEADER + "\n")
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            c = grid.cell_center(ix, iy)
            out.write(",".join((
                fmt17(c.real),
                fmt17(c.imag),
                CLASS_NAMES[grid.base_class[iy, ix]],
                fmt17(grid.center_r_plus[iy, ix]),
                fmt17(grid.center_r_minus[iy, ix]),
                fmt17(grid.center_margin[iy, ix]),
            )) + "\n")
    return out.getvalue()


def grid_from_csv(text: str) -> dict:
    """Re-read a grid CSV: centers, class codes and the numeric columns."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if ",".join(header) != GRID_CSV_HEADER:
        raise ValueError(f"unexpected grid CSV header {header}")
    centers, classes, r_plus, r_minus, margin = [], [], [], [], []
    for row in reader:
        centers.append(complex(float(row[0]), float(row[1])))
        classes.append(CLASS_NAMES.index(row[2]))
        r_plus.append(float(row[3]))
        r_minus.append(float(row[4]))
        margin.append(float(row[5]))
    return {
        "centers": np.array(centers),
        "classes": np.array(classes, dtype=np.int8),
        "r_plus": np.array(r_plus),
        "r_minus": np.array(r_minus),
        "margin": np.array(margin),
    }


def grid_to_obj(grid: RegionGrid) -> dict:
    return {
        "box": [grid.x0, grid.x1, grid.y0, grid.y1],
        "resolution": [grid.nx, grid.ny],
        "k_max": grid.k_max,
        "eps": grid.eps,
        "max_depth": grid.max_depth,
        "invertible_shift": grid.invertible,
        "classes": [[CLASS_NAMES[grid.base_class[iy, ix]] for ix in range(grid.nx)]
                    for iy in range(grid.ny)],
        "depth": [[int(grid.depth[iy, ix]) for ix in range(grid.nx)]
                  for iy in range(grid.ny)],
        "class_counts": grid.class_counts(),
        "area_estimate": grid.area_estimate(),
    }


def grid_to_pgm(grid: RegionGrid) -> bytes:
    """Binary PGM, one byte per base cell, top image row = largest y."""
    header = f"P5\n{grid.nx} {grid.ny}\n255\n".encode("ascii")
    body = bytearray()
    for iy in range(grid.ny - 1, -1, -1):
        body.extend(_PGM_SHADE[int(c)] for c in grid.base_class[iy])
    return header + bytes(body)


def boundary_to_obj(polyline: BoundaryPolyline) -> dict:
    return {
        "components": [
            {"closed": comp.closed,
             "vertices": [[v.real, v.imag] for v in comp.vertices]}
            for comp in polyline.components
        ]
    }


def report_to_obj(report: OracleReport) -> dict:
    return dataclasses.asdict(report)


def eigenvalues_to_csv(eigs) -> str:
    out = io.StringIO()
    out.write("re,im\n")
    for ev in eigs:
        out.write(f"{fmt17(ev.real)},{fmt17(ev.imag)}\n")
    return out.getvalue()


def sigma_grid_to_csv(xs, ys, smin) -> str:
    out = io.StringIO()
    out.write("re,im,sigma_min\n")
    for iy in range(len(ys)):
        for ix in range(len(xs)):
            out.write(f"{fmt17(xs[ix])},{fmt17(ys[iy])},{fmt17(smin[iy, ix])}\n")
    return out.getvalue()
