"""Plain-text serialization: CSV tables, density CSV + JSON sidecars.

Floats are written with 17 significant digits so that files round-trip
exactly and identical inputs give byte-identical output.  Every writer goes
through :func:`atomic_write` (temp file + rename).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .fields import DensityField, Grid3, SPINS


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _clean(obj):
    """Make numpy scalars/arrays JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    return obj


def atomic_write(path, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps_json(obj))


def write_table(path, columns: list, rows) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return atomic_write(path, buf.getvalue())


def read_table(path) -> tuple:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# grid fields


def _field_rows(grid: Grid3, values: np.ndarray, spin: int | None):
    x, y, z = grid.mesh()
    cols = [a.ravel(order="F") for a in (x, y, z, values)]
    if spin is None:
        return np.column_stack(cols)
    return np.column_stack(cols + [np.full(grid.size, float(spin))])


def write_grid_field(path, grid: Grid3, values: np.ndarray, meta: dict | None = None) -> tuple:
    """Write ``x,y,z,value[,spin]`` rows (x fastest) plus ``<path>.json`` grid metadata.

    ``values`` may carry a leading spin axis of length 2 (s = -1, +1).
    """
    path = Path(path)
    values = np.asarray(values, dtype=float)
    spin = values.ndim == 4
    if spin:
        blocks = [_field_rows(grid, values[i], s) for i, s in enumerate(SPINS)]
        data = np.vstack(blocks)
        header = "x,y,z,value,spin"
    else:
        data = _field_rows(grid, values, None)
        header = "x,y,z,value"
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in data:
        buf.write(",".join("%.17g" % v if i < 4 else "%d" % v for i, v in enumerate(row)) + "\n")
    atomic_write(path, buf.getvalue())
    sidecar = {"grid": grid.to_dict(), "order": "x-fastest", "spin_resolved": spin, "columns": header.split(",")}
    if meta:
        sidecar.update(meta)
    side = write_json(sidecar_path(path), sidecar)
    return path, side


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def read_grid_field(path) -> tuple:
    """Inverse of :func:`write_grid_field`; returns ``(grid, values, sidecar)``."""
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text())
    grid = Grid3(tuple(meta["grid"]["extent"]), tuple(meta["grid"]["points"]))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = grid.size
    if meta.get("spin_resolved"):
        values = np.stack([data[i * n:(i + 1) * n, 3].reshape(grid.shape, order="F") for i in range(2)])
    else:
        values = data[:, 3].reshape(grid.shape, order="F")
    return grid, values, meta


def write_density(path, rho: DensityField, meta: dict | None = None) -> tuple:
    return write_grid_field(path, rho.grid, rho.values, meta)


def read_density(path) -> DensityField:
    grid, values, _ = read_grid_field(path)
    return DensityField(grid, values)
