"""Regularized p-energy and its relaxation with a modulus penalty.

The cell energy is (delta_reg^2 + |du|^2_cell)^{p/2} with |du|^2_cell the
average of the four surrounding squared edge differences.  The symmetric
stencil makes the analytic gradient the exact transpose of the discrete
operators, which the finite-difference consistency tests pin down to 1e-5.

The penalty lambda((|u|-1)^2) is linear up to delta_n^2, constant 4 delta_n^2
from 4 delta_n^2 on, and a monotone C^1 cubic blend in between, so it sees
only the squared distance to the unit circle and saturates far from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .lattice import (CONSTRAINED, DISK, RELAXED, Grid2D, S1Field,
                      cell_average_of_edge_squares, cell_gradsq, node_diffs,
                      wrapped_diffs)


class DegenerateCellError(ValueError):
    """p < 2 with delta_reg = 0 hit a zero-gradient cell."""


@dataclass(frozen=True)
class PenaltyProfile:
    """Clamped distance-square profile; delta_n <= 1/4 keeps the circle
    the unique zero set of the induced potential."""
    delta_n: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.delta_n <= 0.25:
            raise ValueError("delta_n must lie in (0, 1/4]")

    def value(self, t: NDArray) -> NDArray:
        a = self.delta_n ** 2
        t = np.asarray(t, dtype=float)
        s = np.clip((t - a) / (3.0 * a), 0.0, 1.0)
        blend = a * (-3.0 * s ** 3 + 3.0 * s ** 2 + 3.0 * s + 1.0)
        return np.where(t <= a, t, blend)

    def deriv(self, t: NDArray) -> NDArray:
        a = self.delta_n ** 2
        t = np.asarray(t, dtype=float)
        s = np.clip((t - a) / (3.0 * a), 0.0, 1.0)
        blend = (1.0 - s) * (1.0 + 3.0 * s)
        return np.where(t <= a, 1.0, blend)


@dataclass(frozen=True)
class EnergyParams:
    p: float
    eps_penalty: float = math.inf  # inf disables the penalty
    delta_reg: float = 0.0
    penalty: PenaltyProfile = field(default_factory=PenaltyProfile)

    def __post_init__(self):
        if not 1.0 < self.p <= 2.0:
            raise ValueError(f"p must lie in (1, 2], got {self.p}")
        if not self.eps_penalty > 0.0:
            raise ValueError("eps_penalty must be positive")
        if self.delta_reg < 0.0:
            raise ValueError("delta_reg must be nonnegative")

    @property
    def penalty_weight(self) -> float:
        if math.isinf(self.eps_penalty):
            return 0.0
        return self.eps_penalty ** (-self.p)


def _regularized_cell_density(grid: Grid2D, u: S1Field, p: float,
                              delta_reg: float) -> NDArray:
    q = cell_gradsq(grid, u)
    s = delta_reg ** 2 + q
    dens = s ** (p / 2.0)
    if grid.topology == DISK:
        dens = np.where(grid.active_cells(), dens, 0.0)
    return dens


def p_energy(grid: Grid2D, u: S1Field, p: float, delta_reg: float = 0.0) -> float:
    """h^2 sum over active cells of (delta_reg^2 + |du|^2)^{p/2}."""
    return float(grid.h ** 2 * _regularized_cell_density(grid, u, p, delta_reg).sum())


def mu_density(grid: Grid2D, u: S1Field, p: float) -> NDArray:
    """Normalized energy density (2-p) |du|^p per cell."""
    return (2.0 - p) * _regularized_cell_density(grid, u, p, 0.0)


def _active_node_weights(grid: Grid2D) -> NDArray | None:
    if grid.topology == DISK:
        return grid.mask > 0
    return None


def gl_energy(grid: Grid2D, u: S1Field, params: EnergyParams) -> float:
    """p-energy plus eps^{-p} integral of the modulus penalty."""
    e = p_energy(grid, u, params.p, params.delta_reg)
    w = params.penalty_weight
    if w == 0.0:
        return e
    m = u.modulus()
    t = (m - 1.0) ** 2
    lam = params.penalty.value(t)
    sel = _active_node_weights(grid)
    if sel is not None:
        lam = np.where(sel, lam, 0.0)
    return e + float(w * grid.h ** 2 * lam.sum())


def _edge_coefficients(grid: Grid2D, s: NDArray, p: float,
                       active: NDArray | None) -> tuple[NDArray, NDArray]:
    """Sum of cell weights (p/2) s^{(p-2)/2} over the cells adjacent to
    each edge.  s is delta^2 + q per cell; inactive cells contribute 0."""
    if p == 2.0:
        w = np.ones_like(s)
    else:
        w = (p / 2.0) * s ** ((p - 2.0) / 2.0)
    if active is not None:
        w = np.where(active, w, 0.0)
    if grid.periodic:
        kx = w + np.roll(w, 1, axis=1)   # cells above and below the x-edge
        ky = w + np.roll(w, 1, axis=0)
        return kx, ky
    nx, ny = grid.nx, grid.ny
    kx = np.zeros((nx - 1, ny))
    kx[:, 1:] += w
    kx[:, :-1] += w
    ky = np.zeros((nx, ny - 1))
    ky[1:, :] += w
    ky[:-1, :] += w
    return kx, ky


def gl_gradient(grid: Grid2D, u: S1Field, params: EnergyParams) -> NDArray:
    """Exact gradient of gl_energy with respect to every node value.

    Exterior nodes of masked grids get zero; Dirichlet masking is the
    solver's job.  Raises DegenerateCellError when p < 2, delta_reg = 0
    and some active cell has no gradient, since the cell weight blows up.
    """
    if u.kind != RELAXED:
        raise ValueError("gl_gradient differentiates relaxed fields")
    p, delta = params.p, params.delta_reg
    v = u.values
    dx, dy = node_diffs(grid, v)
    ex2 = (dx[..., 0] ** 2 + dx[..., 1] ** 2) / grid.h ** 2
    ey2 = (dy[..., 0] ** 2 + dy[..., 1] ** 2) / grid.h ** 2
    q = cell_average_of_edge_squares(grid, ex2, ey2)
    active = grid.active_cells() if grid.topology == DISK else None
    s = delta ** 2 + q
    if p < 2.0 and delta == 0.0:
        zero = s == 0.0
        if active is not None:
            zero = zero & active
        if np.any(zero):
            raise DegenerateCellError(
                "zero-gradient cell with delta_reg = 0 makes the p-weight singular")
    kx, ky = _edge_coefficients(grid, s, p, active)
    gx = kx[..., None] * dx
    gy = ky[..., None] * dy

    grad = np.zeros_like(v)
    if grid.periodic:
        grad -= gx
        grad += np.roll(gx, 1, axis=0)
        grad -= gy
        grad += np.roll(gy, 1, axis=1)
    else:
        grad[:-1, :] -= gx
        grad[1:, :] += gx
        grad[:, :-1] -= gy
        grad[:, 1:] += gy

    w = params.penalty_weight
    if w != 0.0:
        m = np.hypot(v[..., 0], v[..., 1])
        t = (m - 1.0) ** 2
        lp = params.penalty.deriv(t)
        safe = np.where(m > 0.0, m, 1.0)
        coef = w * grid.h ** 2 * lp * 2.0 * (m - 1.0) / safe
        coef = np.where(m > 0.0, coef, 0.0)
        sel = _active_node_weights(grid)
        if sel is not None:
            coef = np.where(sel, coef, 0.0)
        grad = grad + coef[..., None] * v

    if grid.topology == DISK:
        grad[grid.mask == 0] = 0.0
    return grad


def phase_energy(grid: Grid2D, base_wx: NDArray, base_wy: NDArray,
                 theta: NDArray, p: float, delta_reg: float,
                 active: NDArray | None) -> float:
    """p-energy of exp(i theta) u0 given u0's wrapped edge increments."""
    dtx, dty = node_diffs(grid, theta)
    wx = _wrap(base_wx + dtx)
    wy = _wrap(base_wy + dty)
    q = cell_average_of_edge_squares(grid, wx ** 2, wy ** 2) / grid.h ** 2
    s = delta_reg ** 2 + q
    dens = s ** (p / 2.0)
    if active is not None:
        dens = np.where(active, dens, 0.0)
    return float(grid.h ** 2 * dens.sum())


def phase_gradient(grid: Grid2D, base_wx: NDArray, base_wy: NDArray,
                   theta: NDArray, p: float, delta_reg: float,
                   active: NDArray | None) -> NDArray:
    """Gradient of phase_energy in theta (defined a.e.; the wrap is flat)."""
    dtx, dty = node_diffs(grid, theta)
    wx = _wrap(base_wx + dtx)
    wy = _wrap(base_wy + dty)
    q = cell_average_of_edge_squares(grid, wx ** 2, wy ** 2) / grid.h ** 2
    s = delta_reg ** 2 + q
    if p < 2.0 and delta_reg == 0.0 and np.any((s == 0.0) if active is None else (s == 0.0) & active):
        raise DegenerateCellError(
            "zero-gradient cell with delta_reg = 0 makes the p-weight singular")
    kx, ky = _edge_coefficients(grid, s, p, active)
    gx = kx * wx
    gy = ky * wy
    grad = np.zeros_like(theta)
    if grid.periodic:
        grad -= gx
        grad += np.roll(gx, 1, axis=0)
        grad -= gy
        grad += np.roll(gy, 1, axis=1)
    else:
        grad[:-1, :] -= gx
        grad[1:, :] += gx
        grad[:, :-1] -= gy
        grad[:, 1:] += gy
    return grad


def _wrap(a: NDArray) -> NDArray:
    return np.remainder(a + np.pi, 2.0 * np.pi) - np.pi


def base_wrapped_increments(grid: Grid2D, u: S1Field) -> tuple[NDArray, NDArray]:
    if u.kind != CONSTRAINED:
        raise ValueError("phase descent starts from a constrained field")
    return wrapped_diffs(grid, u)
