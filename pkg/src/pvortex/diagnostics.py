"""Integral diagnostics certifying stationarity, density bounds, quantization.

All diagnostics work on constrained fields through wrapped edge currents;
the solver's relaxed iterates must be projected first.  Ball and annulus
integrals use the midpoint cell rule of lattice.ball_integral throughout,
so closed-form comparisons inherit only O(h) quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
from numpy.typing import NDArray

from .lattice import (DISK, Grid2D, S1Field, VortexSet, ball_cells,
                      ball_integral, cell_current, cell_gradsq, DomainError,
                      field_from_complex, winding_field)
from .energy import mu_density


def energy_density(grid: Grid2D, u: S1Field, center, r: float, p: float) -> float:
    """Scale-normalized ball energy r^{p-2} * integral over B_r of |du|^p.

    Monotone in r for stationary fields; r must resolve at least 5 cells.
    """
    if r < 5.0 * grid.h:
        raise DomainError("density radius must be at least 5 h")
    dens = cell_gradsq(grid, u) ** (p / 2.0)
    return r ** (p - 2.0) * ball_integral(grid, dens, center, r)


@dataclass
class DensityProfile:
    radii: NDArray
    values: NDArray
    max_violation: float  # largest relative drop between consecutive radii


def density_profile(grid: Grid2D, u: S1Field, center, radii, p: float) -> DensityProfile:
    radii = np.asarray(sorted(radii), dtype=float)
    vals = np.array([energy_density(grid, u, center, r, p) for r in radii])
    drops = np.maximum(vals[:-1] - vals[1:], 0.0)
    viol = float((drops / vals[1:]).max()) if len(vals) > 1 else 0.0
    return DensityProfile(radii, vals, viol)


@dataclass
class PohozaevReport:
    lhs: float
    rhs: float
    residual: float
    relative: float


def pohozaev_residual(grid: Grid2D, u: S1Field, center, r1: float, r2: float,
                      p: float, n_radii: int = 32) -> PohozaevReport:
    """Both sides of the stationarity identity on the annulus (r1, r2).

    Left: trapezoid in r of the normalized disk energies (2-p) E_p(D_r).
    Right: annulus integral of |z - a| (|du|^p - p |du|^{p-2} |du(omega)|^2)
    with omega the unit radial direction.
    """
    if not 0.0 < r1 < r2:
        raise DomainError("need 0 < r1 < r2")
    dens_q = cell_gradsq(grid, u)
    dens_p = dens_q ** (p / 2.0)
    radii = np.linspace(r1, r2, n_radii)
    disk_e = np.array([(2.0 - p) * ball_integral(grid, dens_p, center, r)
                       for r in radii])
    lhs = float(np.trapezoid(disk_e, radii))

    inner = ball_cells(grid, center, r1)
    outer = ball_cells(grid, center, r2)
    sel = outer & ~inner
    cx, cy = grid.cell_centers()
    dx = (cx - center[0]) + np.zeros_like(dens_q)
    dy = (cy - center[1]) + np.zeros_like(dens_q)
    d = np.hypot(dx, dy)
    jx, jy = cell_current(grid, u)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = (jx * dx + jy * dy) / d
        weight = np.where(dens_q > 0.0, dens_q ** ((p - 2.0) / 2.0), 0.0)
    integrand = d * (dens_p - p * weight * radial ** 2)
    rhs = float(grid.h ** 2 * integrand[sel].sum())
    residual = abs(lhs - rhs)
    return PohozaevReport(lhs, rhs, residual, residual / abs(rhs))


def _bump(t: NDArray) -> NDArray:
    return np.where(np.abs(t) < 1.0, (1.0 - t ** 2) ** 3, 0.0)


def _bump_deriv(t: NDArray) -> NDArray:
    return np.where(np.abs(t) < 1.0, -6.0 * t * (1.0 - t ** 2) ** 2, 0.0)


def default_bump_layout(grid: Grid2D) -> tuple[list, float]:
    """3x3 tensor bump centers and width fitting inside the active region."""
    if grid.topology == DISK:
        xs, ys = grid.node_xy()
        r = np.hypot(np.broadcast_to(xs, (grid.nx, grid.ny)),
                     np.broadcast_to(ys, (grid.nx, grid.ny)))
        rho = float(r[grid.mask == 2].max())
        c0, w = 0.4 * rho, 0.25 * rho
        base = (0.0, 0.0)
    else:
        sx, sy = grid.span
        rho = 0.5 * min(sx, sy)
        c0, w = 0.4 * rho, 0.25 * rho
        base = (grid.origin[0] + 0.5 * (grid.nx - (0 if not grid.periodic else 1) - 1) * grid.h,
                grid.origin[1] + 0.5 * (grid.ny - (0 if not grid.periodic else 1) - 1) * grid.h)
    centers = [(base[0] + i * c0, base[1] + j * c0)
               for i in (-1, 0, 1) for j in (-1, 0, 1)]
    return centers, w


def stationarity_residual(grid: Grid2D, u: S1Field, p: float,
                          centers=None, width: float | None = None) -> float:
    """Largest normalized inner-variation integral over a family of test fields.

    For every tensor-product bump X = b(x) b(y) e_d the discrete integral of
    |du|^p div X - p |du|^{p-2} <du x du, grad X> is formed at cell centers
    and normalized by sup|X| E_p(u).  Stationary fields drive this to O(h).
    """
    if centers is None or width is None:
        dcenters, dwidth = default_bump_layout(grid)
        centers = dcenters if centers is None else centers
        width = dwidth if width is None else width
    dens_q = cell_gradsq(grid, u)
    dens_p = dens_q ** (p / 2.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        wgt = np.where(dens_q > 0.0, dens_q ** ((p - 2.0) / 2.0), 0.0)
    jx, jy = cell_current(grid, u)
    cx, cy = grid.cell_centers()
    total = float(grid.h ** 2 * dens_p.sum())
    worst = 0.0
    for (ax, ay) in centers:
        tx = (cx - ax) / width + np.zeros_like(dens_q)
        ty = (cy - ay) / width + np.zeros_like(dens_q)
        bx, by = _bump(tx), _bump(ty)
        dbx, dby = _bump_deriv(tx) / width, _bump_deriv(ty) / width
        gx, gy = dbx * by, bx * dby   # gradient of the bump profile
        for d in (0, 1):
            jd = jx if d == 0 else jy
            divx = gx if d == 0 else gy
            val = dens_p * divx - p * wgt * jd * (jx * gx + jy * gy)
            integral = float(grid.h ** 2 * val.sum())
            worst = max(worst, abs(integral) / total)
    return worst


@dataclass
class QuantizationEntry:
    position: tuple[float, float]
    winding: int
    mu_ball: float
    nearest_multiple: int
    dist_to_lattice: float   # distance to 2 pi Z
    predicted: float         # 2 pi winding^2
    dist_to_predicted: float


@dataclass
class QuantizationReport:
    r_ref: float
    entries: list[QuantizationEntry]


def quantization_report(grid: Grid2D, u: S1Field, p: float,
                        vortices: VortexSet, r_ref: float) -> QuantizationReport:
    """Mass of the normalized energy measure in reference balls around vortices."""
    pos = vortices.positions()
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            d = pos[i] - pos[j]
            if grid.periodic:
                sx, sy = grid.span
                d[0] -= sx * np.round(d[0] / sx)
                d[1] -= sy * np.round(d[1] / sy)
            if np.hypot(*d) <= 2.0 * r_ref:
                raise DomainError("reference balls overlap; shrink r_ref")
    mu = mu_density(grid, u, p)
    entries = []
    for v in vortices:
        mass = ball_integral(grid, mu, v.position, r_ref)
        nearest = int(np.rint(mass / (2.0 * np.pi)))
        predicted = 2.0 * np.pi * v.winding ** 2
        entries.append(QuantizationEntry(
            position=v.position, winding=v.winding, mu_ball=mass,
            nearest_multiple=nearest,
            dist_to_lattice=abs(mass - 2.0 * np.pi * nearest),
            predicted=predicted,
            dist_to_predicted=abs(mass - predicted)))
    return QuantizationReport(r_ref, entries)


def density_constant(n: int, p: float) -> float:
    """Dimensional constant c(n, p): volume of the unit (n-2)-ball weighted
    by (1 - |y|^2)^{(2-p)/2}; equals 1 in the plane by convention."""
    if not 1.0 < p <= 2.0:
        raise ValueError("p must lie in (1, 2]")
    if n == 2:
        return 1.0
    if n < 2 or n > 6:
        raise ValueError("density constant supported for 2 <= n <= 6")
    m = n - 2
    omega = math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)
    val, err = scipy.integrate.quad(
        lambda s: s ** (m - 1) * (1.0 - s * s) ** ((2.0 - p) / 2.0),
        0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    if err > 1e-8:
        raise RuntimeError("quadrature failed to reach the requested tolerance")
    return m * omega * val


def vortex_field(grid: Grid2D, kappa: int, center=(0.0, 0.0)) -> S1Field:
    """(z/|z|)^kappa around center; the center must avoid all nodes."""
    xs, ys = grid.node_xy()
    z = (xs - center[0]) + 1j * (ys - center[1])
    r = np.abs(z)
    if np.any(r == 0.0):
        raise ValueError("vortex center must not coincide with a lattice node")
    w = (z / r) ** kappa
    return field_from_complex(np.broadcast_to(w, (grid.nx, grid.ny)).copy())


def vortex_energy_exact(kappa: int, p: float, r: float, R: float) -> float:
    """p-energy of the unit vortex of degree kappa on the annulus r < |z| < R."""
    if kappa == 0:
        return 0.0
    return 2.0 * np.pi * abs(kappa) ** p * (R ** (2.0 - p) - r ** (2.0 - p)) / (2.0 - p)


def annulus_energy(grid: Grid2D, u: S1Field, center, r: float, R: float, p: float) -> float:
    """Lattice p-energy restricted to cells with centers in the annulus."""
    dens = cell_gradsq(grid, u) ** (p / 2.0)
    return (ball_integral(grid, dens, center, R)
            - ball_integral(grid, dens, center, r))


def gradient_bound_ratio(grid: Grid2D, u: S1Field, center, r: float, p: float) -> float:
    """sup_{B_r} |du|^p r^2 / ||du||_{L^p(B_2r)}^p, the interior gradient
    bound in scale-invariant form.  Errors out if B_2r contains a vortex."""
    k = winding_field(grid, u)
    outer = ball_cells(grid, center, 2.0 * r)
    if np.any(k[outer] != 0):
        raise DomainError("gradient bound ratio undefined across a vortex")
    dens_q = cell_gradsq(grid, u)
    inner = ball_cells(grid, center, r)
    sup_p = float(dens_q[inner].max()) ** (p / 2.0)
    denom = float(grid.h ** 2 * (dens_q[outer] ** (p / 2.0)).sum())
    return sup_p * r ** 2 / denom


def reference_radius(grid: Grid2D, vortices: VortexSet, fraction: float = 0.25) -> float:
    """Quarter of the smallest scale around the vortices: the minimal
    pairwise separation or distance to the domain edge."""
    pos = vortices.positions()
    scales = []
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            d = pos[i] - pos[j]
            if grid.periodic:
                sx, sy = grid.span
                d[0] -= sx * np.round(d[0] / sx)
                d[1] -= sy * np.round(d[1] / sy)
            scales.append(np.hypot(*d))
    if grid.topology == DISK:
        xs, ys = grid.node_xy()
        rr = np.hypot(np.broadcast_to(xs, (grid.nx, grid.ny)),
                      np.broadcast_to(ys, (grid.nx, grid.ny)))
        radius = float(rr[grid.mask == 2].max())
        for q in pos:
            scales.append(radius - float(np.hypot(*q)))
    elif grid.periodic:
        scales.append(0.5 * min(grid.span))
    if not scales:
        raise ValueError("no scale available: empty vortex set on a bounded grid")
    return fraction * min(scales)
