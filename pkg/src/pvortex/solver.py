"""Energy minimization by Barzilai-Borwein descent with Armijo backtracking.

Two routes share the driver:

* relaxed fields descend on both components of gl_energy, boundary nodes
  (Dirichlet) held bit-identical to the initial trace;
* constrained fields descend on a phase offset, u = exp(i theta) u0, which
  keeps the modulus exactly 1 and minimizes within the gauge orbit of u0.

Accepted steps never increase the energy; the BB steplength only seeds the
backtracking line search.  Stationarity of the produced fields is certified
afterwards by the diagnostics, not assumed from the iteration count.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from numpy.typing import NDArray

from . import fieldio
from .energy import (EnergyParams, base_wrapped_increments, gl_energy,
                     gl_gradient, phase_energy, phase_gradient)
from .lattice import (CONSTRAINED, DISK, INTERIOR, RELAXED, Grid2D, S1Field,
                      boundary_contour, field_from_phase)


class DivergenceError(RuntimeError):
    """NaN appeared in the energy during descent."""


class ProjectionError(RuntimeError):
    """Too much of the field sits near zero modulus to project."""


@dataclass(frozen=True)
class SolveConfig:
    grad_tol: float = 1e-5      # relative to the initial gradient norm
    max_iters: int = 4000
    armijo_c: float = 1e-4
    max_backtracks: int = 60
    checkpoint_dir: str | None = None
    seed: int = 0


@dataclass
class SolveReport:
    converged: bool
    stalled: bool
    iterations: int
    initial_energy: float
    final_energy: float
    initial_grad_norm: float
    final_grad_norm: float
    energy_history: NDArray
    grad_history: NDArray
    wall_time: float  # informational; never serialized into experiment outputs
    params: EnergyParams | None = None

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "stalled": self.stalled,
            "iterations": self.iterations,
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "initial_grad_norm": self.initial_grad_norm,
            "final_grad_norm": self.final_grad_norm,
        }


def _bb_descent(x0: NDArray, fun, grad, cfg: SolveConfig):
    x = x0.copy()
    e = fun(x)
    if not np.isfinite(e):
        raise DivergenceError("initial energy is not finite")
    g = grad(x)
    gn0 = float(np.linalg.norm(g))
    energies = [e]
    gnorms = [gn0]
    if gn0 == 0.0:
        return x, True, False, energies, gnorms

    # probe step to estimate a curvature scale for the first steplength
    t = 1e-7 / max(gn0, 1.0)
    gp = grad(x - t * g)
    curv = np.linalg.norm(gp - g) / (t * gn0)
    alpha = 1.0 / max(curv, 1e-30)

    prev_x = None
    prev_g = None
    converged = False
    stalled = False
    it = 0
    use_bb1 = True
    for it in range(1, cfg.max_iters + 1):
        gn = float(np.linalg.norm(g))
        if gn <= cfg.grad_tol * gn0:
            converged = True
            break
        if prev_x is not None:
            dx = x - prev_x
            dg = g - prev_g
            sy = float(dx @ dg)
            if sy > 1e-300:
                alpha = float(dx @ dx) / sy if use_bb1 else sy / max(float(dg @ dg), 1e-300)
                use_bb1 = not use_bb1
            else:
                alpha = 2.0 * alpha
        alpha = float(np.clip(alpha, 1e-17, 1e17))

        step = alpha
        accepted = False
        gsq = gn * gn
        for _ in range(cfg.max_backtracks):
            xt = x - step * g
            et = fun(xt)
            if np.isnan(et):
                raise DivergenceError("energy became NaN during line search")
            if et <= e - cfg.armijo_c * step * gsq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            stalled = True
            break
        prev_x, prev_g = x, g
        x, e = xt, et
        g = grad(x)
        # accepted steps never increase the energy
        assert e <= energies[-1] + 1e-12 * (1.0 + abs(energies[-1]))
        energies.append(e)
        gnorms.append(float(np.linalg.norm(g)))
    else:
        it = cfg.max_iters
    if not converged and not stalled:
        converged = gnorms[-1] <= cfg.grad_tol * gn0
    return x, converged, stalled, energies, gnorms


def _free_mask(grid: Grid2D) -> NDArray:
    if grid.periodic:
        return np.ones((grid.nx, grid.ny), dtype=bool)
    return grid.free_nodes()


def minimize(grid: Grid2D, u0: S1Field, params: EnergyParams,
             cfg: SolveConfig | None = None) -> tuple[S1Field, SolveReport]:
    """Descend gl_energy (relaxed u0) or the gauge p-energy (constrained u0).

    Non-free nodes keep their initial values bit-identical.
    """
    cfg = cfg or SolveConfig()
    t0 = time.perf_counter()
    free = _free_mask(grid)
    active = grid.active_cells() if grid.topology == DISK else None

    if u0.kind == RELAXED:
        full = u0.values.copy()
        fmask = np.repeat(free[:, :, None], 2, axis=2)

        def fun(x):
            full[fmask] = x
            return gl_energy(grid, S1Field(full, RELAXED), params)

        def grad(x):
            full[fmask] = x
            g = gl_gradient(grid, S1Field(full, RELAXED), params)
            return g[fmask]

        x0 = full[fmask].copy()
        x, converged, stalled, energies, gnorms = _bb_descent(x0, fun, grad, cfg)
        full[fmask] = x
        out = S1Field(full, RELAXED)
    else:
        bwx, bwy = base_wrapped_increments(grid, u0)
        theta_full = np.zeros((grid.nx, grid.ny))

        def fun(x):
            theta_full[free] = x
            return phase_energy(grid, bwx, bwy, theta_full, params.p,
                                params.delta_reg, active)

        def grad(x):
            theta_full[free] = x
            g = phase_gradient(grid, bwx, bwy, theta_full, params.p,
                               params.delta_reg, active)
            return g[free]

        x0 = np.zeros(int(free.sum()))
        x, converged, stalled, energies, gnorms = _bb_descent(x0, fun, grad, cfg)
        theta_full[free] = x
        out = rotate_field(u0, theta_full)

    report = SolveReport(
        converged=converged, stalled=stalled, iterations=len(energies) - 1,
        initial_energy=energies[0], final_energy=energies[-1],
        initial_grad_norm=gnorms[0], final_grad_norm=gnorms[-1],
        energy_history=np.array(energies), grad_history=np.array(gnorms),
        wall_time=time.perf_counter() - t0, params=params)
    return out, report


def rotate_field(u: S1Field, theta: NDArray) -> S1Field:
    c, s = np.cos(theta), np.sin(theta)
    a, b = u.values[..., 0], u.values[..., 1]
    return S1Field(np.stack([c * a - s * b, s * a + c * b], axis=-1), u.kind)


def validate_schedule(stages: list[EnergyParams]) -> None:
    """p must march toward 2 and delta_reg must tighten within each p."""
    for a, b in zip(stages, stages[1:]):
        if b.p < a.p:
            raise ValueError("continuation schedule must not decrease p")
        if b.p == a.p and b.delta_reg > a.delta_reg:
            raise ValueError("continuation schedule must not loosen delta_reg at fixed p")


@dataclass
class StageResult:
    params: EnergyParams
    field: S1Field
    report: SolveReport


def continuation_sweep(grid: Grid2D, u0: S1Field, stages: list[EnergyParams],
                       cfg: SolveConfig | None = None) -> list[StageResult]:
    """Warm-started sweep through (p, delta_reg, eps) stages.

    With a checkpoint directory, completed stages are reloaded instead of
    re-solved when their snapshot is present.
    """
    cfg = cfg or SolveConfig()
    validate_schedule(stages)
    results: list[StageResult] = []
    u = u0
    start = 0
    if cfg.checkpoint_dir:
        start, u = _resume(grid, u0, stages, cfg.checkpoint_dir)
        for k in range(start):
            _, saved = _load_stage(grid, cfg.checkpoint_dir, k)
            results.append(StageResult(stages[k], saved, _resumed_report(stages[k])))
    for k in range(start, len(stages)):
        u, report = minimize(grid, u, stages[k], cfg)
        results.append(StageResult(stages[k], u, report))
        if cfg.checkpoint_dir:
            _save_stage(grid, cfg.checkpoint_dir, k, u, stages[k])
    return results


def _stage_tag(params: EnergyParams) -> dict:
    return {"p": params.p, "delta_reg": params.delta_reg,
            "eps_penalty": params.eps_penalty}


def _save_stage(grid, outdir, k, u, params):
    os.makedirs(outdir, exist_ok=True)
    fieldio.save_snapshot(os.path.join(outdir, f"stage_{k:03d}.s1f"), grid, u)
    state = {"completed": k, "params": _stage_tag(params)}
    with open(os.path.join(outdir, f"stage_{k:03d}.json"), "w") as f:
        json.dump(state, f, sort_keys=True)


def _load_stage(grid, outdir, k):
    path = os.path.join(outdir, f"stage_{k:03d}.s1f")
    saved_grid, u = fieldio.load_snapshot(path)
    if (saved_grid.nx, saved_grid.ny) != (grid.nx, grid.ny):
        raise ValueError("checkpoint grid does not match")
    return saved_grid, u


def _resume(grid, u0, stages, outdir):
    u = u0
    done = 0
    for k in range(len(stages)):
        meta = os.path.join(outdir, f"stage_{k:03d}.json")
        snap = os.path.join(outdir, f"stage_{k:03d}.s1f")
        if not (os.path.exists(meta) and os.path.exists(snap)):
            break
        with open(meta) as f:
            state = json.load(f)
        if state.get("params") != _stage_tag(stages[k]):
            break
        _, u = _load_stage(grid, outdir, k)
        done = k + 1
    return done, u


def _resumed_report(params) -> SolveReport:
    return SolveReport(converged=True, stalled=False, iterations=0,
                       initial_energy=float("nan"), final_energy=float("nan"),
                       initial_grad_norm=float("nan"), final_grad_norm=float("nan"),
                       energy_history=np.array([]), grad_history=np.array([]),
                       wall_time=0.0, params=params)


def project_unit(grid: Grid2D, u: S1Field, threshold: float = 0.1):
    """Radial projection to the circle.

    Returns the constrained field and a per-node flag array marking core
    nodes (modulus below threshold) to exclude from pointwise diagnostics.
    Fails when more than 5 percent of the active nodes are flagged.
    """
    m = u.modulus()
    active = grid.node_mask() > 0
    flags = (m < threshold) & active
    frac = flags.sum() / active.sum()
    if frac > 0.05:
        raise ProjectionError(
            f"{100 * frac:.1f} percent of active nodes below modulus {threshold}")
    safe = np.where(m > 0.0, m, 1.0)
    vals = u.values / safe[..., None]
    vals[m == 0.0] = (1.0, 0.0)
    if grid.topology == DISK:
        vals[grid.mask == 0] = (1.0, 0.0)
    return S1Field(vals, CONSTRAINED), flags


def default_stages(p_list, h: float, eps: float | None = None,
                   delta_scale: tuple[float, ...] = (1e-1, 1e-2, 1e-3)) -> list[EnergyParams]:
    """Continuation schedule: for each p, tighten delta_reg through
    delta_scale / h.  The 1/h factor keeps the regularization strength
    fixed relative to the O(1/h) core gradients, so the first stage is a
    nearly quadratic problem at every resolution."""
    eps = h if eps is None else eps
    stages = []
    for p in sorted(p_list):
        for d in delta_scale:
            stages.append(EnergyParams(p=p, eps_penalty=eps, delta_reg=d / h))
    return stages


# ---------------------------------------------------------------- initializers

def disk_boundary_data(grid: Grid2D, degree: int) -> S1Field:
    """exp(i k angle) sampled at every node (only the boundary trace is used)."""
    xs, ys = grid.node_xy()
    theta = np.arctan2(np.broadcast_to(ys, (grid.nx, grid.ny)),
                       np.broadcast_to(xs, (grid.nx, grid.ny)))
    return field_from_phase(degree * theta)


def vortex_positions(degree: int, ring_radius: float) -> list[tuple[float, float]]:
    """Single vortex at the center; k >= 2 equally spaced on the ring."""
    if degree == 1:
        return [(0.0, 0.0)]
    return [(ring_radius * np.cos(2 * np.pi * j / degree),
             ring_radius * np.sin(2 * np.pi * j / degree))
            for j in range(degree)]


def _product_vortex(grid: Grid2D, positions) -> NDArray:
    xs, ys = grid.node_xy()
    z = xs + 1j * ys
    w = np.ones((grid.nx, grid.ny), dtype=complex)
    for (ax, ay) in positions:
        zz = z - (ax + 1j * ay)
        r = np.abs(zz)
        if np.any(r == 0.0):
            raise ValueError("vortex position must not coincide with a node")
        w = w * (zz / r)
    return w


def harmonic_extension(grid: Grid2D, boundary_values: NDArray) -> NDArray:
    """Solve the 5-point Laplace equation on interior nodes with Dirichlet
    data read from boundary_values at non-interior active nodes."""
    mask = grid.node_mask()
    interior = mask == INTERIOR
    n = int(interior.sum())
    index = -np.ones(mask.shape, dtype=int)
    index[interior] = np.arange(n)
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    ii, jj = np.nonzero(interior)
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ni, nj = ii + di, jj + dj
        if grid.periodic:
            ni %= grid.nx
            nj %= grid.ny
        else:
            keep = (ni >= 0) & (ni < grid.nx) & (nj >= 0) & (nj < grid.ny)
            if not keep.all():
                raise ValueError("interior node touches the array edge")
        neigh_int = interior[ni, nj]
        rows.extend(index[ii[neigh_int], jj[neigh_int]])
        cols.extend(index[ni[neigh_int], nj[neigh_int]])
        vals.extend([-1.0] * int(neigh_int.sum()))
        bsel = ~neigh_int
        np.add.at(rhs, index[ii[bsel], jj[bsel]], boundary_values[ni[bsel], nj[bsel]])
    rows.extend(range(n))
    cols.extend(range(n))
    vals.extend([4.0] * n)
    lap = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    sol = scipy.sparse.linalg.spsolve(lap, rhs)
    out = boundary_values.astype(float).copy()
    out[interior] = sol
    return out


def disk_degree_init(grid: Grid2D, degree: int, kind: str = RELAXED,
                     ring_fraction: float = 0.5) -> S1Field:
    """Product of |degree| unit vortices times a harmonic phase correction.

    The correction extends the wrapped boundary mismatch between the target
    trace exp(i k angle) and the product map, so the initial field already
    matches the Dirichlet data and carries the right vortex count; descent
    then only has to settle positions and core profiles.
    """
    if grid.topology != DISK:
        raise ValueError("degree initialization targets disk grids")
    if degree < 1:
        raise ValueError("degree must be a positive integer")
    radius = _disk_radius(grid)
    w = _product_vortex(grid, vortex_positions(degree, ring_fraction * radius))
    g = disk_boundary_data(grid, degree)
    gc = g.values[..., 0] + 1j * g.values[..., 1]

    contour = boundary_contour(grid)
    mism = gc * np.conj(w)
    alpha = np.angle(mism[contour[:, 0], contour[:, 1]])
    beta = np.empty_like(alpha)
    beta[0] = alpha[0]
    d = np.diff(alpha)
    d = np.remainder(d + np.pi, 2.0 * np.pi) - np.pi
    beta[1:] = alpha[0] + np.cumsum(d)

    bvals = np.zeros((grid.nx, grid.ny))
    bvals[contour[:, 0], contour[:, 1]] = beta
    phi = harmonic_extension(grid, bvals)

    vals = np.stack([(w * np.exp(1j * phi)).real, (w * np.exp(1j * phi)).imag], axis=-1)
    bnd = grid.mask == 1
    vals[bnd] = g.values[bnd]        # Dirichlet trace, exact
    vals[grid.mask == 0] = (1.0, 0.0)
    return S1Field(vals, kind)


def _disk_radius(grid: Grid2D) -> float:
    xs, ys = grid.node_xy()
    r = np.hypot(np.broadcast_to(xs, (grid.nx, grid.ny)),
                 np.broadcast_to(ys, (grid.nx, grid.ny)))
    return float(r[grid.mask == INTERIOR].max())


def torus_vortex_field(grid: Grid2D, charges, circulation: tuple[int, int] = (0, 0)) -> S1Field:
    """Constrained periodic field with prescribed plaquette windings.

    charges: list of ((x, y), k) with zero total charge.  The current is
    built as the rotated gradient of a spectral solution of the cell
    Laplacian, its torus circulations snapped to exact multiples of 2 pi
    (shifted by ``circulation``), and then integrated into a phase.
    """
    if not grid.periodic:
        raise ValueError("vortex pair construction lives on the torus")
    if sum(k for _, k in charges) != 0:
        raise ValueError("total charge on the torus must vanish")
    h = grid.h
    curl = np.zeros(grid.cell_shape)
    cx, cy = grid.cell_centers()
    for (px, py), k in charges:
        i = int(np.argmin(np.abs(cx[:, 0] - px)))
        j = int(np.argmin(np.abs(cy[0, :] - py)))
        curl[i, j] += 2.0 * np.pi * k / h ** 2
    psi = poisson_periodic(grid, curl)
    jx = (np.roll(psi, 1, axis=1) - psi) / h
    jy = (psi - np.roll(psi, 1, axis=0)) / h
    sx, sy = grid.span
    c0 = h * jx[:, 0].sum()
    jx = jx + (2.0 * np.pi * (np.rint(c0 / (2.0 * np.pi)) + circulation[0]) - c0) / sx
    d0 = h * jy[0, :].sum()
    jy = jy + (2.0 * np.pi * (np.rint(d0 / (2.0 * np.pi)) + circulation[1]) - d0) / sy

    phase = np.zeros((grid.nx, grid.ny))
    phase[1:, 0] = h * np.cumsum(jx[:-1, 0])
    phase[:, 1:] = phase[:, [0]] + h * np.cumsum(jy[:, :-1], axis=1)
    return field_from_phase(phase)


def poisson_periodic(grid: Grid2D, rhs: NDArray) -> NDArray:
    """Zero-mean spectral solution of the 5-point Laplacian on the torus."""
    nx, ny = rhs.shape
    h = grid.h
    kx = 2.0 * np.cos(2.0 * np.pi * np.arange(nx) / nx) - 2.0
    ky = 2.0 * np.cos(2.0 * np.pi * np.arange(ny) / ny) - 2.0
    lam = (kx[:, None] + ky[None, :]) / h ** 2
    lam[0, 0] = 1.0
    rhat = np.fft.fft2(rhs)
    rhat[0, 0] = 0.0
    return np.real(np.fft.ifft2(rhat / lam))


def upsample_field(grid_c: Grid2D, u: S1Field, grid_f: Grid2D) -> S1Field:
    """Bilinear warm-start transfer onto a finer grid (componentwise)."""
    xs, ys = grid_f.node_xy()
    fi = (np.broadcast_to(xs, (grid_f.nx, grid_f.ny)) - grid_c.origin[0]) / grid_c.h
    fj = (np.broadcast_to(ys, (grid_f.nx, grid_f.ny)) - grid_c.origin[1]) / grid_c.h
    if grid_c.periodic:
        i0 = np.floor(fi).astype(int)
        j0 = np.floor(fj).astype(int)
        ti = fi - i0
        tj = fj - j0
        i0 %= grid_c.nx
        j0 %= grid_c.ny
        i1 = (i0 + 1) % grid_c.nx
        j1 = (j0 + 1) % grid_c.ny
    else:
        fi = np.clip(fi, 0.0, grid_c.nx - 1.0)
        fj = np.clip(fj, 0.0, grid_c.ny - 1.0)
        i0 = np.clip(np.floor(fi).astype(int), 0, grid_c.nx - 2)
        j0 = np.clip(np.floor(fj).astype(int), 0, grid_c.ny - 2)
        ti = fi - i0
        tj = fj - j0
        i1 = i0 + 1
        j1 = j0 + 1
    v = u.values
    out = ((1 - ti) * (1 - tj))[..., None] * v[i0, j0] \
        + (ti * (1 - tj))[..., None] * v[i1, j0] \
        + ((1 - ti) * tj)[..., None] * v[i0, j1] \
        + (ti * tj)[..., None] * v[i1, j1]
    if u.kind == CONSTRAINED:
        m = np.hypot(out[..., 0], out[..., 1])
        out = out / np.where(m > 0, m, 1.0)[..., None]
    return S1Field(out, u.kind)
