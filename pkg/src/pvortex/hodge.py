"""Discrete Hodge splitting of edge currents on the flat torus.

j = d phi + rot psi + h with phi a node potential, psi a cell potential and
h a constant 1-form (the harmonic representatives on the torus are the
constants).  div, curl and rot are exact adjoints of the forward-difference
calculus in lattice.py, so the three parts reconstruct j and are pairwise
L2-orthogonal to machine precision; both Poisson problems are solved by
Fourier diagonalization of the 5-point Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .lattice import (Grid2D, OneForm2D, S1Field, _shift,
                      cell_average_of_edge_squares, cell_gradsq, current,
                      field_from_phase, grad_scalar, winding_field)
from .energy import mu_density
from .solver import poisson_periodic


@dataclass
class HodgeParts:
    phi: NDArray            # node potential of the exact part
    psi: NDArray            # cell potential of the coexact part
    hconst: tuple[float, float]
    exact: OneForm2D        # d phi
    coexact: OneForm2D      # rot psi
    residual: float         # relative reconstruction error


def divergence(grid: Grid2D, j: OneForm2D) -> NDArray:
    """Adjoint of -grad_scalar: backward differences at nodes."""
    if not grid.periodic:
        raise ValueError("hodge splitting is defined on the torus")
    return ((j.ax - np.roll(j.ax, 1, axis=0))
            + (j.ay - np.roll(j.ay, 1, axis=1))) / grid.h


def curl(grid: Grid2D, j: OneForm2D) -> NDArray:
    """Counterclockwise plaquette circulation per cell area."""
    return ((j.ax - _shift(j.ax, 1)) + (_shift(j.ay, 0) - j.ay)) / grid.h


def rot(grid: Grid2D, psi: NDArray) -> OneForm2D:
    """Rotated gradient of a cell potential; curl(rot psi) = Lap psi,
    div(rot psi) = 0 identically."""
    ax = (np.roll(psi, 1, axis=1) - psi) / grid.h
    ay = (psi - np.roll(psi, 1, axis=0)) / grid.h
    return OneForm2D(ax, ay)


def form_inner(grid: Grid2D, a: OneForm2D, b: OneForm2D) -> float:
    return float(grid.h ** 2 * ((a.ax * b.ax).sum() + (a.ay * b.ay).sum()))


def form_l2(grid: Grid2D, a: OneForm2D) -> float:
    return float(np.sqrt(form_inner(grid, a, a)))


def form_lq_norm(grid: Grid2D, a: OneForm2D, q: float) -> float:
    """L^q norm via the cell-averaged squared magnitude."""
    mag2 = cell_average_of_edge_squares(grid, a.ax ** 2, a.ay ** 2)
    return float((grid.h ** 2 * (mag2 ** (q / 2.0)).sum()) ** (1.0 / q))


def hodge_decompose(grid: Grid2D, j: OneForm2D) -> HodgeParts:
    if not grid.periodic:
        raise ValueError("hodge splitting is defined on the torus")
    phi = poisson_periodic(grid, divergence(grid, j))
    psi = poisson_periodic(grid, curl(grid, j))
    exact = grad_scalar(grid, phi)
    coexact = rot(grid, psi)
    hx = float(np.mean(j.ax - exact.ax - coexact.ax))
    hy = float(np.mean(j.ay - exact.ay - coexact.ay))
    rx = j.ax - exact.ax - coexact.ax - hx
    ry = j.ay - exact.ay - coexact.ay - hy
    scale = max(form_l2(grid, j), 1e-300)
    residual = form_l2(grid, OneForm2D(rx, ry)) / scale
    return HodgeParts(phi, psi, (hx, hy), exact, coexact, residual)


def scaling_bound(p: float) -> float:
    """Shape function (2-p)^{1-1/p} |log(2-p)| for the exact-part norm."""
    return (2.0 - p) ** (1.0 - 1.0 / p) * abs(np.log(2.0 - p))


@dataclass
class ScalingRow:
    p: float
    exact_norm: float
    bound: float
    ratio: float
    coexact_norm: float
    harmonic_norm: float
    residual: float


@dataclass
class ScalingTable:
    q: float
    rows: list[ScalingRow]

    def ratio_band(self) -> float:
        ratios = [r.ratio for r in self.rows]
        return max(ratios) / min(ratios)


def exact_part_scaling(grid: Grid2D, sweep: list[tuple[float, S1Field]],
                       q: float = 1.4) -> ScalingTable:
    """Exact-part norms of converged solutions against the (2-p) bound shape.

    sweep holds (p, field) pairs; fewer than three p-values cannot exhibit
    a scaling trend and raise.
    """
    if len(sweep) < 3:
        raise ValueError("insufficient data: need at least 3 p-values")
    rows = []
    for p, u in sweep:
        parts = hodge_decompose(grid, current(grid, u))
        b = scaling_bound(p)
        en = form_lq_norm(grid, parts.exact, q)
        rows.append(ScalingRow(
            p=p, exact_norm=en, bound=b, ratio=en / b,
            coexact_norm=form_lq_norm(grid, parts.coexact, q),
            harmonic_norm=float(np.hypot(*parts.hconst)),
            residual=parts.residual))
    return ScalingTable(q, rows)


@dataclass
class DiffuseRow:
    p: float
    m: int
    mass: float
    mass_exact: float
    mass_quadratic: float        # (2-p) int |du|^2, the |hbar|^2-shaped mass
    mass_quadratic_exact: float  # (2-p) (2 pi m / L)^2 |T|
    hbar_sq: float               # (2-p)^{2/p} (2 pi m / L)^2, limiting density
    n_vortices: int


def diffuse_winding_mode(p: float) -> int:
    """Winding count m_p = max(1, round((2 pi)^{-1} (2-p)^{-1/p}))."""
    return max(1, int(np.rint((2.0 - p) ** (-1.0 / p) / (2.0 * np.pi))))


def diffuse_measure_table(grid: Grid2D, p_list) -> list[DiffuseRow]:
    """Pure winding fields exp(2 pi i m x / L): all energy in the harmonic
    part and no vortices.  Constant currents carry no discretization error,
    so two lattice masses are closed-form exact: the p-mass
    (2-p) int |du|^p = (2-p) (2 pi m / L)^p |T| and the quadratic mass
    (2-p) int |du|^2 = (2-p) (2 pi m / L)^2 |T| (the shape of the limiting
    |hbar|^2 dv diffuse measure)."""
    if not grid.periodic:
        raise ValueError("the diffuse regime lives on the torus")
    sx, sy = grid.span
    xs, _ = grid.node_xy()
    rows = []
    for p in p_list:
        m = diffuse_winding_mode(p)
        freq = 2.0 * np.pi * m / sx
        u = field_from_phase(freq * np.broadcast_to(xs, (grid.nx, grid.ny)))
        gradsq = cell_gradsq(grid, u)
        mass = float(grid.h ** 2 * mu_density(grid, u, p).sum())
        mass_quad = float((2.0 - p) * grid.h ** 2 * gradsq.sum())
        k = winding_field(grid, u)
        rows.append(DiffuseRow(
            p=p, m=m,
            mass=mass,
            mass_exact=(2.0 - p) * freq ** p * sx * sy,
            mass_quadratic=mass_quad,
            mass_quadratic_exact=(2.0 - p) * freq ** 2 * sx * sy,
            hbar_sq=(2.0 - p) ** (2.0 / p) * freq ** 2,
            n_vortices=int((k != 0).sum())))
    return rows
