"""Staggered 2D lattice for circle-valued fields.

Layout conventions used throughout the package:

* nodes carry field values, arrays are indexed ``[i, j]`` with
  ``x = origin[0] + i*h`` and ``y = origin[1] + j*h``;
* edges carry 1-form coefficients: ``ax[i, j]`` sits on the edge from
  node ``(i, j)`` to ``(i+1, j)``, ``ay[i, j]`` on the edge to ``(i, j+1)``;
* cells (plaquettes) carry densities; cell ``(i, j)`` has its lower-left
  corner at node ``(i, j)`` and its center at the node position plus
  ``(h/2, h/2)``.

On the torus every row of nodes/edges/cells has length ``nx`` (periodic
wrap); on bounded grids edge arrays lose one entry in their own direction
and the cell array is ``(nx-1, ny-1)``.  Masked (disk) grids keep the full
rectangular arrays and flag nodes as exterior / boundary / interior; only
cells whose four corners are non-exterior enter any sum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

TORUS = "torus"
RECTANGLE = "rectangle"
DISK = "disk"

# node mask codes
EXTERIOR = 0
BOUNDARY = 1
INTERIOR = 2

RELAXED = "relaxed"
CONSTRAINED = "constrained"

# modulus below which a wrapped phase difference is meaningless
DEGENERATE_MODULUS = 1e-8


class DomainError(ValueError):
    """A geometric request (ball, contour, ...) leaves the active domain."""


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    h: float
    topology: str = RECTANGLE
    origin: tuple[float, float] = (0.0, 0.0)
    mask: NDArray | None = None  # int8 node codes, disk topology only

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"grid must be at least 8x8, got {self.nx}x{self.ny}")
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.topology not in (TORUS, RECTANGLE, DISK):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.topology == DISK:
            if self.mask is None:
                raise ValueError("disk topology requires a node mask")
            if self.mask.shape != (self.nx, self.ny):
                raise ValueError("mask shape does not match grid")
        elif self.mask is not None:
            raise ValueError("only disk grids carry a mask")

    @property
    def periodic(self) -> bool:
        return self.topology == TORUS

    @property
    def span(self) -> tuple[float, float]:
        if self.periodic:
            return (self.nx * self.h, self.ny * self.h)
        return ((self.nx - 1) * self.h, (self.ny - 1) * self.h)

    @property
    def cell_shape(self) -> tuple[int, int]:
        if self.periodic:
            return (self.nx, self.ny)
        return (self.nx - 1, self.ny - 1)

    def node_xy(self) -> tuple[NDArray, NDArray]:
        """Node coordinates as broadcastable (nx,1), (1,ny) arrays."""
        x = self.origin[0] + self.h * np.arange(self.nx)
        y = self.origin[1] + self.h * np.arange(self.ny)
        return x[:, None], y[None, :]

    def cell_centers(self) -> tuple[NDArray, NDArray]:
        ncx, ncy = self.cell_shape
        x = self.origin[0] + self.h * (np.arange(ncx) + 0.5)
        y = self.origin[1] + self.h * (np.arange(ncy) + 0.5)
        return x[:, None], y[None, :]

    def node_mask(self) -> NDArray:
        """Int8 code per node (EXTERIOR / BOUNDARY / INTERIOR)."""
        if self.topology == DISK:
            return self.mask
        m = np.full((self.nx, self.ny), INTERIOR, dtype=np.int8)
        if self.topology == RECTANGLE:
            m[0, :] = m[-1, :] = BOUNDARY
            m[:, 0] = m[:, -1] = BOUNDARY
        return m

    def active_cells(self) -> NDArray:
        """Boolean per cell: all four corner nodes are non-exterior."""
        if self.topology != DISK:
            return np.ones(self.cell_shape, dtype=bool)
        ok = self.mask > EXTERIOR
        return ok[:-1, :-1] & ok[1:, :-1] & ok[1:, 1:] & ok[:-1, 1:]

    def free_nodes(self) -> NDArray:
        """Boolean per node: value is a degree of freedom in Dirichlet solves."""
        return self.node_mask() == INTERIOR

    def cell_distances(self, center: tuple[float, float]) -> NDArray:
        """Distance from every cell center to ``center`` (min-image on torus)."""
        cx, cy = self.cell_centers()
        dx = cx - center[0]
        dy = cy - center[1]
        if self.periodic:
            sx, sy = self.span
            dx = dx - sx * np.round(dx / sx)
            dy = dy - sy * np.round(dy / sy)
        return np.hypot(dx, dy)


def torus_grid(nx: int, ny: int | None = None, length: float = 1.0) -> Grid2D:
    """Flat torus of circumference ``length`` in x; h = length/nx."""
    ny = nx if ny is None else ny
    h = length / nx
    return Grid2D(nx, ny, h, topology=TORUS)


def rect_grid(nx: int, ny: int | None = None, h: float | None = None,
              centered: bool = True) -> Grid2D:
    """Rectangle grid; ``centered`` puts the midpoint of the node set at 0.

    With even nx the coordinate axes then pass between nodes, so the
    origin-centered singular fields used in tests never hit a node.
    """
    ny = nx if ny is None else ny
    h = 1.0 / nx if h is None else h
    if centered:
        origin = (-(nx - 1) * h / 2.0, -(ny - 1) * h / 2.0)
    else:
        origin = (0.0, 0.0)
    return Grid2D(nx, ny, h, topology=RECTANGLE, origin=origin)


def disk_grid(n: int, radius: float = 0.46, h: float | None = None) -> Grid2D:
    """Disk of given radius masked out of a centered n x n node square.

    Interior nodes satisfy |x| <= radius; boundary nodes are the exterior
    nodes 4-adjacent to an interior one and carry Dirichlet data.
    """
    h = 1.0 / n if h is None else h
    if radius > (n - 1) * h / 2.0:
        raise ValueError("disk does not fit inside the node square")
    origin = (-(n - 1) * h / 2.0, -(n - 1) * h / 2.0)
    x = origin[0] + h * np.arange(n)
    inside = np.hypot(x[:, None], x[None, :]) <= radius
    mask = np.where(inside, INTERIOR, EXTERIOR).astype(np.int8)
    near = np.zeros_like(inside)
    near[:-1, :] |= inside[1:, :]
    near[1:, :] |= inside[:-1, :]
    near[:, :-1] |= inside[:, 1:]
    near[:, 1:] |= inside[:, :-1]
    mask[near & ~inside] = BOUNDARY
    return Grid2D(n, n, h, topology=DISK, origin=origin, mask=mask)


@dataclass
class S1Field:
    """Node field with values in R^2, shape (nx, ny, 2).

    kind is "constrained" (unit modulus, currents are wrapped phase
    differences) or "relaxed" (free modulus, currents use Im(conj(a) b)).
    """
    values: NDArray
    kind: str = CONSTRAINED

    def __post_init__(self):
        if self.kind not in (RELAXED, CONSTRAINED):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.values.ndim != 3 or self.values.shape[2] != 2:
            raise ValueError("field values must have shape (nx, ny, 2)")

    def modulus(self) -> NDArray:
        return np.hypot(self.values[..., 0], self.values[..., 1])

    def copy(self) -> "S1Field":
        return S1Field(self.values.copy(), self.kind)


def field_from_complex(w: NDArray, kind: str = CONSTRAINED) -> S1Field:
    return S1Field(np.stack([w.real, w.imag], axis=-1), kind)


def field_from_phase(phi: NDArray) -> S1Field:
    return S1Field(np.stack([np.cos(phi), np.sin(phi)], axis=-1), CONSTRAINED)


@dataclass
class OneForm2D:
    """Edge 1-form; ax on x-edges, ay on y-edges (shapes set by topology)."""
    ax: NDArray
    ay: NDArray

    def __add__(self, other: "OneForm2D") -> "OneForm2D":
        return OneForm2D(self.ax + other.ax, self.ay + other.ay)

    def __sub__(self, other: "OneForm2D") -> "OneForm2D":
        return OneForm2D(self.ax - other.ax, self.ay - other.ay)


@dataclass(frozen=True)
class Vortex:
    position: tuple[float, float]
    winding: int


@dataclass
class VortexSet:
    vortices: list[Vortex] = field(default_factory=list)
    cluster_radius: float = 0.0

    def __len__(self):
        return len(self.vortices)

    def __iter__(self):
        return iter(self.vortices)

    def total_winding(self) -> int:
        return sum(v.winding for v in self.vortices)

    def positions(self) -> NDArray:
        return np.array([v.position for v in self.vortices]).reshape(-1, 2)


def _shift(a: NDArray, axis: int) -> NDArray:
    """a advanced one step along axis with periodic wrap."""
    return np.roll(a, -1, axis=axis)


def node_diffs(grid: Grid2D, f: NDArray) -> tuple[NDArray, NDArray]:
    """Forward differences f(head) - f(tail) on x- and y-edges (not / h)."""
    if grid.periodic:
        return _shift(f, 0) - f, _shift(f, 1) - f
    return f[1:, :] - f[:-1, :], f[:, 1:] - f[:, :-1]


def grad_scalar(grid: Grid2D, f: NDArray) -> OneForm2D:
    """Discrete gradient of a node scalar as an edge 1-form."""
    dx, dy = node_diffs(grid, f)
    return OneForm2D(dx / grid.h, dy / grid.h)


def wrapped_diffs(grid: Grid2D, u: S1Field) -> tuple[NDArray, NDArray]:
    """Wrapped phase increment arg(conj(u_tail) u_head) per edge, in (-pi, pi]."""
    v = u.values

    def against(head_a, head_b, tail_a, tail_b):
        cross = tail_a * head_b - tail_b * head_a
        dot = tail_a * head_a + tail_b * head_b
        return np.arctan2(cross, dot)

    a, b = v[..., 0], v[..., 1]
    if grid.periodic:
        wx = against(_shift(a, 0), _shift(b, 0), a, b)
        wy = against(_shift(a, 1), _shift(b, 1), a, b)
    else:
        wx = against(a[1:, :], b[1:, :], a[:-1, :], b[:-1, :])
        wy = against(a[:, 1:], b[:, 1:], a[:, :-1], b[:, :-1])
    return wx, wy


def current(grid: Grid2D, u: S1Field) -> OneForm2D:
    """Edge current of a circle-valued field.

    Constrained fields use the wrapped phase difference per unit length,
    which is gauge invariant and makes plaquette windings exact integers.
    Relaxed fields use the midpoint form Im(conj(u_a) u_b)/h.
    """
    if u.kind == CONSTRAINED:
        wx, wy = wrapped_diffs(grid, u)
        return OneForm2D(wx / grid.h, wy / grid.h)
    m = u.modulus()
    if np.any(m < DEGENERATE_MODULUS):
        raise ValueError("relaxed current undefined: field modulus below 1e-8")
    v = u.values
    a, b = v[..., 0], v[..., 1]
    if grid.periodic:
        jx = a * _shift(b, 0) - b * _shift(a, 0)
        jy = a * _shift(b, 1) - b * _shift(a, 1)
    else:
        jx = a[:-1, :] * b[1:, :] - b[:-1, :] * a[1:, :]
        jy = a[:, :-1] * b[:, 1:] - b[:, :-1] * a[:, 1:]
    return OneForm2D(jx / grid.h, jy / grid.h)


def plaquette_sums(grid: Grid2D, u: S1Field) -> NDArray:
    """Counterclockwise sum of wrapped phase increments per cell."""
    wx, wy = wrapped_diffs(grid, u)
    if grid.periodic:
        return wx + _shift(wy, 0) - _shift(wx, 1) - wy
    return wx[:, :-1] + wy[1:, :] - wx[:, 1:] - wy[:-1, :]


def winding_field(grid: Grid2D, u: S1Field) -> NDArray:
    """Integer winding per cell; zero outside the active region."""
    if u.kind != CONSTRAINED:
        raise ValueError("winding requires a constrained field")
    s = plaquette_sums(grid, u) / (2.0 * np.pi)
    k = np.rint(s).astype(np.int64)
    active = grid.active_cells()
    if not np.allclose(np.where(active, s - k, 0.0), 0.0, atol=1e-6):
        raise ValueError("plaquette sums are not integer multiples of 2 pi")
    k[~active] = 0
    return k


def winding(grid: Grid2D, u: S1Field, cell: tuple[int, int]) -> int:
    return int(winding_field(grid, u)[cell])


def detect_vortices(grid: Grid2D, u: S1Field, cluster_radius: float | None = None) -> VortexSet:
    """Cluster nonzero plaquette windings into vortices.

    Cells closer than cluster_radius (single linkage) form one vortex whose
    position is the |winding|-weighted centroid.  Clusters whose windings
    cancel exactly are dropped with a warning: they are dipoles below the
    clustering resolution, not vortices.
    """
    if cluster_radius is None:
        cluster_radius = 6.0 * grid.h
    k = winding_field(grid, u)
    idx = np.argwhere(k != 0)
    if len(idx) == 0:
        return VortexSet([], cluster_radius)
    cx, cy = grid.cell_centers()
    pos = np.stack([cx[idx[:, 0], 0], cy[0, idx[:, 1]]], axis=1)
    w = k[idx[:, 0], idx[:, 1]].astype(float)

    d = pos[:, None, :] - pos[None, :, :]
    if grid.periodic:
        sx, sy = grid.span
        d[..., 0] -= sx * np.round(d[..., 0] / sx)
        d[..., 1] -= sy * np.round(d[..., 1] / sy)
    dist = np.hypot(d[..., 0], d[..., 1])

    n = len(idx)
    labels = -np.ones(n, dtype=int)
    nlab = 0
    for i in range(n):
        if labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = nlab
        while stack:
            t = stack.pop()
            for s in np.nonzero(dist[t] <= cluster_radius)[0]:
                if labels[s] < 0:
                    labels[s] = nlab
                    stack.append(s)
        nlab += 1

    vortices = []
    for lab in range(nlab):
        sel = labels == lab
        wl = w[sel]
        total = int(round(wl.sum()))
        if total == 0:
            warnings.warn("dropping zero-net winding cluster (unresolved dipole)")
            continue
        anchor = pos[sel][0]
        rel = pos[sel] - anchor
        if grid.periodic:
            sx, sy = grid.span
            rel[:, 0] -= sx * np.round(rel[:, 0] / sx)
            rel[:, 1] -= sy * np.round(rel[:, 1] / sy)
        weight = np.abs(wl) / np.abs(wl).sum()
        p = anchor + (weight[:, None] * rel).sum(axis=0)
        vortices.append(Vortex((float(p[0]), float(p[1])), total))

    # positions closer than the clustering scale are merged late; warn, remerge
    changed = True
    while changed and len(vortices) > 1:
        changed = False
        for i in range(len(vortices)):
            for j in range(i + 1, len(vortices)):
                pi = np.array(vortices[i].position)
                pj = np.array(vortices[j].position)
                dd = pi - pj
                if grid.periodic:
                    sx, sy = grid.span
                    dd[0] -= sx * np.round(dd[0] / sx)
                    dd[1] -= sy * np.round(dd[1] / sy)
                if np.hypot(*dd) <= cluster_radius:
                    warnings.warn("merging vortex clusters closer than cluster radius")
                    wsum = vortices[i].winding + vortices[j].winding
                    mid = pi - dd / 2.0
                    merged = Vortex((float(mid[0]), float(mid[1])), wsum)
                    rest = [v for t, v in enumerate(vortices) if t not in (i, j)]
                    vortices = rest + ([merged] if wsum != 0 else [])
                    changed = True
                    break
            if changed:
                break
    return VortexSet(vortices, cluster_radius)


def boundary_contour(grid: Grid2D) -> NDArray:
    """Outer lattice loop of the active-cell region, counterclockwise.

    Returns node indices, shape (L, 2); the loop closes implicitly.  Built
    by chaining directed cell edges that touch exactly one active cell, so
    the sum of plaquette windings over the region telescopes to the wrapped
    phase sum along this contour.
    """
    if grid.periodic:
        raise DomainError("a torus has no boundary contour")
    active = grid.active_cells()
    ncx, ncy = active.shape
    pad = np.zeros((ncx + 2, ncy + 2), dtype=bool)
    pad[1:-1, 1:-1] = active
    step = {}
    for i in range(ncx):
        for j in range(ncy):
            if not active[i, j]:
                continue
            if not pad[i + 1, j]:      # cell below inactive: bottom edge
                step[(i, j)] = (i + 1, j)
            if not pad[i + 2, j + 1]:  # right
                step[(i + 1, j)] = (i + 1, j + 1)
            if not pad[i + 1, j + 2]:  # top
                step[(i + 1, j + 1)] = (i, j + 1)
            if not pad[i, j + 1]:      # left
                step[(i, j + 1)] = (i, j)
    if not step:
        raise DomainError("no active cells")
    start = min(step)
    loop = [start]
    node = step[start]
    while node != start:
        loop.append(node)
        node = step[node]
    if len(loop) != len(step):
        raise DomainError("active region boundary is not a single loop")
    return np.array(loop, dtype=int)


def boundary_degree(grid: Grid2D, u: S1Field, contour: NDArray | None = None) -> int:
    """Winding of the field along a closed node loop (default: outer boundary)."""
    if u.kind != CONSTRAINED:
        raise ValueError("boundary degree requires a constrained field")
    if contour is None:
        contour = boundary_contour(grid)
    v = u.values[contour[:, 0], contour[:, 1]]
    nxt = np.roll(v, -1, axis=0)
    cross = v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0]
    dot = v[:, 0] * nxt[:, 0] + v[:, 1] * nxt[:, 1]
    total = np.arctan2(cross, dot).sum() / (2.0 * np.pi)
    k = int(np.rint(total))
    if abs(total - k) > 1e-6:
        raise ValueError("contour phase sum is not an integer multiple of 2 pi")
    return k


def ball_cells(grid: Grid2D, center: tuple[float, float], r: float) -> NDArray:
    """Boolean cell selector for B_r(center); errors if the ball exits the domain."""
    if r <= 0:
        raise DomainError("ball radius must be positive")
    if grid.periodic:
        sx, sy = grid.span
        if 2.0 * r >= min(sx, sy):
            raise DomainError("ball does not embed in the torus")
    dist = grid.cell_distances(center)
    sel = dist <= r
    active = grid.active_cells()
    if np.any(sel & ~active):
        raise DomainError("ball exits the active domain")
    if not grid.periodic:
        # the ball must also stay inside the covered rectangle
        x0 = grid.origin[0] + grid.h / 2.0
        y0 = grid.origin[1] + grid.h / 2.0
        ncx, ncy = grid.cell_shape
        x1 = x0 + (ncx - 1) * grid.h
        y1 = y0 + (ncy - 1) * grid.h
        if (center[0] - r < x0 - grid.h or center[0] + r > x1 + grid.h
                or center[1] - r < y0 - grid.h or center[1] + r > y1 + grid.h):
            raise DomainError("ball exits the covered rectangle")
    return sel


def ball_integral(grid: Grid2D, f_cells: NDArray, center: tuple[float, float], r: float) -> float:
    """Midpoint-rule integral of a cell density over B_r(center).

    A cell contributes h^2 f exactly when its center lies in the ball.
    """
    sel = ball_cells(grid, center, r)
    return float(grid.h ** 2 * f_cells[sel].sum())


def cell_average_of_edge_squares(grid: Grid2D, ex2: NDArray, ey2: NDArray) -> NDArray:
    """Average of the two x-edge and two y-edge squares surrounding each cell."""
    if grid.periodic:
        return 0.5 * (ex2 + _shift(ex2, 1)) + 0.5 * (ey2 + _shift(ey2, 0))
    return 0.5 * (ex2[:, :-1] + ex2[:, 1:]) + 0.5 * (ey2[:-1, :] + ey2[1:, :])


def cell_gradsq(grid: Grid2D, u: S1Field) -> NDArray:
    """|du|^2 per cell.

    Constrained fields: squared wrapped edge currents, averaged per cell.
    Relaxed fields: squared raw difference quotients of both components.
    Inactive cells are zeroed.
    """
    if u.kind == CONSTRAINED:
        wx, wy = wrapped_diffs(grid, u)
        ex2 = (wx / grid.h) ** 2
        ey2 = (wy / grid.h) ** 2
    else:
        dx, dy = node_diffs(grid, u.values)
        ex2 = (dx[..., 0] ** 2 + dx[..., 1] ** 2) / grid.h ** 2
        ey2 = (dy[..., 0] ** 2 + dy[..., 1] ** 2) / grid.h ** 2
    q = cell_average_of_edge_squares(grid, ex2, ey2)
    if grid.topology == DISK:
        q = np.where(grid.active_cells(), q, 0.0)
    return q


def cell_current(grid: Grid2D, u: S1Field) -> tuple[NDArray, NDArray]:
    """Cell-centered current vector (component means of surrounding edges)."""
    j = current(grid, u)
    if grid.periodic:
        jx = 0.5 * (j.ax + _shift(j.ax, 1))
        jy = 0.5 * (j.ay + _shift(j.ay, 0))
    else:
        jx = 0.5 * (j.ax[:, :-1] + j.ax[:, 1:])
        jy = 0.5 * (j.ay[:-1, :] + j.ay[1:, :])
    if grid.topology == DISK:
        active = grid.active_cells()
        jx = np.where(active, jx, 0.0)
        jy = np.where(active, jy, 0.0)
    return jx, jy
