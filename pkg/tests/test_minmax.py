"""Sweep-out family sampling, its energy surface, and the witness report."""

import math

import numpy as np
import pytest

from pvortex import (
    EnergyParams,
    detect_vortices,
    family_energy_surface,
    family_map,
    mean_zero_witness,
    polar_parameter_grid,
    rect_grid,
    vortex_of,
)
from pvortex.diagnostics import vortex_field
from pvortex.energy import gl_energy
from pvortex.minmax import FamilySurface, SingularSampleError


def test_family_map_center_is_unit_vortex():
    g = rect_grid(64, 64, 1.0 / 63)
    u = family_map(g, (0.0, 0.0))
    ref = vortex_field(g, 1)
    assert np.allclose(u.values, ref.values, atol=1e-14)
    vs = detect_vortices(g, u)
    assert len(vs) == 1
    (v,) = vs
    assert v.winding == 1
    assert math.hypot(*v.position) <= 2 * g.h


def test_family_map_boundary_is_constant():
    g = rect_grid(32, 32, 1.0 / 31)
    for a in (0.0, 1.2, 3.9):
        y = (math.cos(a), math.sin(a))
        u = family_map(g, y)
        assert np.allclose(u.values[..., 0], y[0])
        assert np.allclose(u.values[..., 1], y[1])
        assert gl_energy(g, u, EnergyParams(p=1.7)) == 0.0


def test_family_map_rejects_outside_disk():
    g = rect_grid(16, 16, 0.1)
    with pytest.raises(ValueError):
        family_map(g, (1.1, 0.0))


def test_family_map_singular_on_node():
    # odd n puts a node exactly at the origin, where v_0 keeps its vortex
    g = rect_grid(17, 17, 0.1)
    with pytest.raises(SingularSampleError):
        family_map(g, (0.0, 0.0))


def test_vortex_of_positions():
    assert vortex_of((0.0, 0.0)) == (0.0, 0.0)
    vx, vy = vortex_of((0.5, 0.0))
    assert vx == pytest.approx(-1.0)
    assert vy == 0.0


def test_polar_parameter_grid_shape():
    ys = polar_parameter_grid(n_radii=5, n_angles=8)
    assert ys.shape == (1 + 4 * 8, 2)
    r = np.hypot(ys[:, 0], ys[:, 1])
    assert r[0] == 0.0
    assert np.isclose(r[1:], np.repeat([0.25, 0.5, 0.75, 1.0], 8)).all()


def test_surface_boundary_rows_are_exact():
    g = rect_grid(24, 24, 1.0 / 23)
    surf = family_energy_surface(g, EnergyParams(p=1.5), n_radii=3, n_angles=6)
    r = np.hypot(surf.ys[:, 0], surf.ys[:, 1])
    edge = np.isclose(r, 1.0)
    assert edge.sum() == 6
    # constant samples: zero energy, mean equal to the parameter itself
    assert np.all(surf.energies[edge] == 0.0)
    assert np.allclose(surf.means[edge], surf.ys[edge], atol=1e-14)
    assert surf.angle_step == pytest.approx(2 * math.pi / 6)


def test_surface_quarter_turn_equivariance():
    """Rotating y by 90 degrees rotates v_y rigidly; the square centered
    grid maps onto itself, so sampled energies repeat along each ring."""
    g = rect_grid(32, 32, 1.0 / 31)
    n_radii, n_angles = 3, 8
    surf = family_energy_surface(g, EnergyParams(p=1.7),
                                 n_radii=n_radii, n_angles=n_angles)
    shift = n_angles // 4
    for k in range(1, n_radii):
        base = 1 + (k - 1) * n_angles
        ring = surf.energies[base:base + n_angles]
        assert np.allclose(ring, np.roll(ring, shift), rtol=1e-10)


def test_surface_rotates_on_singular_ring_sample():
    """x-nodes include +1 but no node sits at the origin, so the rho = 0.5
    sample at angle pi is the only one whose vortex hits the lattice; the
    surface must rotate the whole parameter grid half a step and carry on."""
    g = rect_grid(12, 9, 2.0 / 11)
    with pytest.warns(UserWarning, match="rotating"):
        surf = family_energy_surface(g, EnergyParams(p=1.7),
                                     n_radii=3, n_angles=4)
    assert np.isfinite(surf.energies).all()
    # first ring sample now sits at angle pi/4 instead of 0
    assert surf.ys[1, 0] == pytest.approx(0.5 * math.cos(math.pi / 4))
    assert surf.ys[1, 1] == pytest.approx(0.5 * math.sin(math.pi / 4))


def test_witness_is_center_on_symmetric_grid():
    g = rect_grid(64, 64, 1.0 / 63)
    surf = family_energy_surface(g, EnergyParams(p=1.5), n_radii=4, n_angles=8)
    rep = mean_zero_witness(surf)
    assert rep.y == (0.0, 0.0)
    assert rep.mean_norm <= 1e-13
    assert rep.energy > 0.0
    assert rep.angle_step == pytest.approx(2 * math.pi / 8)


def test_witness_rejects_degenerate_surface():
    surf = FamilySurface(
        p=1.5,
        ys=np.array([[0.0, 0.0]]),
        energies=np.array([0.0]),
        means=np.array([[0.0, 0.0]]),
        angle_step=1.0)
    with pytest.raises(ValueError):
        mean_zero_witness(surf)


def test_weighted_max_band_small_grid():
    """(2-p) max E_p stays within a mild band across p on a coarse grid."""
    g = rect_grid(64, 64, 1.0 / 63)
    weighted = []
    for p in (1.5, 1.9):
        surf = family_energy_surface(g, EnergyParams(p=p, eps_penalty=g.h),
                                     n_radii=8, n_angles=8)
        weighted.append((2.0 - p) * surf.max_energy())
    band = max(weighted) / min(weighted)
    assert band <= 2.0
