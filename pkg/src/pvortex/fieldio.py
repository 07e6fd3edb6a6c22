"""Field snapshot files and CSV export.

Snapshot layout (all little-endian):

    magic   6 bytes  b"S1F2D\\0"
    version u16      currently 1
    nx, ny  i32, i32
    h       f64
    topology u8      0 torus, 1 rectangle, 2 disk
    kind     u8      0 constrained, 1 relaxed
    origin  2 x f64
    has_mask u8      1 only for disk grids
    mask    nx*ny i8 (row-major in i) when has_mask
    payload nx*ny*2 f64, row-major in i, (u1, u2) pairs
"""

from __future__ import annotations

import struct

import numpy as np

from .lattice import (CONSTRAINED, DISK, RECTANGLE, RELAXED, TORUS, Grid2D,
                      S1Field)

_MAGIC = b"S1F2D\x00"
_VERSION = 1
_TOPO_CODE = {TORUS: 0, RECTANGLE: 1, DISK: 2}
_TOPO_NAME = {v: k for k, v in _TOPO_CODE.items()}
_KIND_CODE = {CONSTRAINED: 0, RELAXED: 1}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}

_HEADER = struct.Struct("<6sHiidBBddB")


def save_snapshot(path, grid: Grid2D, u: S1Field) -> None:
    has_mask = 1 if grid.topology == DISK else 0
    header = _HEADER.pack(_MAGIC, _VERSION, grid.nx, grid.ny, grid.h,
                          _TOPO_CODE[grid.topology], _KIND_CODE[u.kind],
                          grid.origin[0], grid.origin[1], has_mask)
    with open(path, "wb") as f:
        f.write(header)
        if has_mask:
            f.write(grid.mask.astype("<i1").tobytes(order="C"))
        f.write(u.values.astype("<f8").tobytes(order="C"))


def load_snapshot(path) -> tuple[Grid2D, S1Field]:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        magic, version, nx, ny, h, topo, kind, ox, oy, has_mask = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError("not a field snapshot file")
        if version != _VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        mask = None
        if has_mask:
            mask = np.frombuffer(f.read(nx * ny), dtype="<i1").reshape(nx, ny).copy()
        raw = np.frombuffer(f.read(nx * ny * 2 * 8), dtype="<f8")
    values = raw.reshape(nx, ny, 2).copy()
    grid = Grid2D(nx, ny, h, topology=_TOPO_NAME[topo], origin=(ox, oy), mask=mask)
    return grid, S1Field(values, _KIND_NAME[kind])


def export_csv(path, grid: Grid2D, u: S1Field) -> None:
    """Rows of x, y, u1, u2 in node order (i outer, j inner)."""
    xs, ys = grid.node_xy()
    with open(path, "w") as f:
        f.write("x,y,u1,u2\n")
        for i in range(grid.nx):
            for j in range(grid.ny):
                f.write(f"{xs[i, 0]!r},{ys[0, j]!r},"
                        f"{u.values[i, j, 0]!r},{u.values[i, j, 1]!r}\n")
