"""Sweep-out family over the unit disk of parameters and its energy surface.

Each parameter y with |y| < 1 names the unit map

    v_y(z) = (z + y/(1-|y|)) / |z + y/(1-|y|)|,

a single vortex pushed to z* = -y/(1-|y|); for |y| = 1 the map is the
constant y, so the family is continuous up to the boundary and equals the
identity there in the sense that its value does not depend on z.  Sampling
v_y on a fixed node set gives a finite model of the min-max class: the max
of the energy surface upper-bounds the min-max level from above, and the
sample with the smallest mean modulus witnesses the obstruction that keeps
the level away from zero.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .energy import EnergyParams, gl_energy
from .lattice import CONSTRAINED, Grid2D, S1Field


class SingularSampleError(ValueError):
    """A requested sample point sits on the family's vortex."""


def family_map(grid: Grid2D, y: tuple[float, float]) -> S1Field:
    """Sample v_y on the grid nodes (constant y when |y| = 1)."""
    ynorm = float(np.hypot(*y))
    if ynorm > 1.0 + 1e-12:
        raise ValueError("family parameter must lie in the closed unit disk")
    nx, ny_ = grid.nx, grid.ny
    if ynorm >= 1.0 - 1e-14:
        vals = np.empty((nx, ny_, 2))
        vals[..., 0] = y[0]
        vals[..., 1] = y[1]
        return S1Field(vals, CONSTRAINED)
    xs, ys = grid.node_xy()
    c = 1.0 / (1.0 - ynorm)
    wx = np.broadcast_to(xs, (nx, ny_)) + c * y[0]
    wy = np.broadcast_to(ys, (nx, ny_)) + c * y[1]
    r = np.hypot(wx, wy)
    if np.any(r < 1e-12):
        raise SingularSampleError("family vortex lands on a lattice node")
    return S1Field(np.stack([wx / r, wy / r], axis=-1), CONSTRAINED)


def vortex_of(y: tuple[float, float]) -> tuple[float, float]:
    """Location of the single vortex of v_y (meaningless for |y| = 1)."""
    c = 1.0 / (1.0 - float(np.hypot(*y)))
    return (-c * y[0], -c * y[1])


def polar_parameter_grid(n_radii: int = 32, n_angles: int = 32) -> NDArray:
    """Polar samples of the closed parameter disk, boundary circle included.

    Radius zero is kept once; returns shape (N, 2).
    """
    ys = [(0.0, 0.0)]
    for k in range(1, n_radii):
        rho = k / (n_radii - 1)
        for l in range(n_angles):
            a = 2.0 * np.pi * l / n_angles
            ys.append((rho * np.cos(a), rho * np.sin(a)))
    return np.array(ys)


@dataclass
class FamilySurface:
    p: float
    ys: NDArray           # (N, 2) parameter samples
    energies: NDArray     # (N,)
    means: NDArray        # (N, 2) node averages of the sampled maps
    angle_step: float

    def max_index(self) -> int:
        return int(np.argmax(self.energies))

    def witness_index(self) -> int:
        return int(np.argmin(np.hypot(self.means[:, 0], self.means[:, 1])))

    def max_energy(self) -> float:
        return float(self.energies[self.max_index()])


def family_energy_surface(grid: Grid2D, params: EnergyParams,
                          n_radii: int = 32, n_angles: int = 32,
                          threads: int = 1) -> FamilySurface:
    """Penalized energy of every sampled family member on the parameter grid.

    The samples are unit maps, so the penalty term contributes exactly zero
    and the surface records plain p-energies; running them through the
    penalized functional keeps the bookkeeping identical to solver output.
    If a sample would put its vortex exactly on a node the whole parameter
    grid is rotated half an angular step (with a warning) so the surface
    stays well defined.
    """
    ys = polar_parameter_grid(n_radii, n_angles)
    try:
        _probe_singularities(grid, ys)
    except SingularSampleError:
        warnings.warn("family vortex hit a node; rotating the parameter grid half a step")
        half = np.pi / n_angles
        rotation = np.array([[np.cos(half), -np.sin(half)],
                             [np.sin(half), np.cos(half)]])
        ys = ys @ rotation.T

    active = grid.node_mask() > 0

    def evaluate(y):
        u = family_map(grid, (float(y[0]), float(y[1])))
        e = gl_energy(grid, u, params)
        mean = u.values[active].mean(axis=0)
        return e, mean

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(evaluate, ys))
    else:
        out = [evaluate(y) for y in ys]
    energies = np.array([e for e, _ in out])
    means = np.array([m for _, m in out])
    return FamilySurface(params.p, ys, energies, means, 2.0 * np.pi / n_angles)


def _probe_singularities(grid: Grid2D, ys: NDArray) -> None:
    xs, yy = grid.node_xy()
    for y in ys:
        ynorm = float(np.hypot(*y))
        if ynorm >= 1.0 - 1e-14:
            continue
        vx, vy = vortex_of((float(y[0]), float(y[1])))
        # cheap proximity test against the node lattice
        fi = (vx - grid.origin[0]) / grid.h
        fj = (vy - grid.origin[1]) / grid.h
        if (abs(fi - np.rint(fi)) < 1e-9 and abs(fj - np.rint(fj)) < 1e-9
                and 0 <= np.rint(fi) < grid.nx and 0 <= np.rint(fj) < grid.ny):
            raise SingularSampleError("vortex on node")


@dataclass
class WitnessReport:
    y: tuple[float, float]
    mean_norm: float
    energy: float
    angle_step: float


def mean_zero_witness(surface: FamilySurface) -> WitnessReport:
    """Sample of smallest mean modulus; its positive energy is the measured
    lower-bound witness for the min-max level."""
    i = surface.witness_index()
    mean_norm = float(np.hypot(*surface.means[i]))
    energy = float(surface.energies[i])
    if not energy > 0.0:
        raise ValueError("witness sample has zero energy; family degenerate")
    return WitnessReport(
        y=(float(surface.ys[i, 0]), float(surface.ys[i, 1])),
        mean_norm=mean_norm, energy=energy, angle_step=surface.angle_step)
