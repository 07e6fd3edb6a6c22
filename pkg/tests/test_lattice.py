"""Grid layout, winding arithmetic and degree bookkeeping."""
import numpy as np
import pytest

from pvortex.lattice import (CONSTRAINED, DomainError, OneForm2D, S1Field,
                             ball_cells, ball_integral, boundary_degree,
                             current, detect_vortices, disk_grid,
                             field_from_phase, grad_scalar, plaquette_sums,
                             rect_grid, torus_grid, winding, winding_field)
from pvortex.diagnostics import vortex_field


def test_grid_constructors():
    t = torus_grid(16, 16, 1.0)
    assert t.periodic and t.h == pytest.approx(1.0 / 16)
    assert t.cell_shape == (16, 16)
    r = rect_grid(9, 17, 0.1)
    assert r.span == pytest.approx((0.8, 1.6))
    assert r.cell_shape == (8, 16)
    d = disk_grid(64)
    assert d.topology == "disk"
    # mask symmetric under the square's reflections
    m = d.mask
    assert (m == m[::-1, :]).all() and (m == m[:, ::-1]).all()
    assert (m == m.T).all()


def test_grid_validation():
    with pytest.raises(ValueError):
        torus_grid(4)
    with pytest.raises(ValueError):
        rect_grid(16, 16, -0.1)


def test_field_from_phase_is_unit():
    g = torus_grid(12)
    rng = np.random.default_rng(0)
    u = field_from_phase(rng.normal(size=(g.nx, g.ny)))
    assert u.kind == CONSTRAINED
    norms = np.hypot(u.values[..., 0], u.values[..., 1])
    assert np.allclose(norms, 1.0, atol=1e-14)


def test_exact_vortex_winding():
    g = rect_grid(64, 64, 1.0 / 63)
    cx, cy = g.cell_centers()
    for kappa in (1, 2, -1, 3):
        u = vortex_field(g, kappa)
        k = winding_field(g, u)
        assert k.sum() == kappa
        # support stays within a couple of cells of the core; for |kappa| >= 2
        # the wrapped differences hit the +-pi knife edge on a symmetric grid
        # and the charge splits over neighboring plaquettes
        nz = np.argwhere(k != 0)
        for i, j in nz:
            assert np.hypot(cx[i, 0], cy[0, j]) <= 2 * g.h
        if abs(kappa) == 1:
            assert len(nz) == 1


def test_winding_away_from_core_is_zero():
    g = rect_grid(32, 32, 0.05, centered=True)
    u = vortex_field(g, 1)
    assert winding(g, u, (2, 2)) == 0
    assert winding(g, u, (28, 3)) == 0


def test_smooth_lifting_has_no_winding():
    g = torus_grid(24)
    xs, ys = g.node_xy()
    phi = 0.3 * np.sin(2 * np.pi * xs) * np.cos(2 * np.pi * ys)
    u = field_from_phase(np.broadcast_to(phi, (g.nx, g.ny)).copy())
    assert (winding_field(g, u) == 0).all()
    # the current of a small smooth lifting is exactly its gradient
    j = current(g, u)
    dphi = grad_scalar(g, phi * np.ones((g.nx, g.ny)))
    assert np.allclose(j.ax, dphi.ax, atol=1e-12)
    assert np.allclose(j.ay, dphi.ay, atol=1e-12)


def test_grad_scalar_is_curl_free():
    g = torus_grid(16)
    rng = np.random.default_rng(3)
    f = rng.normal(size=(g.nx, g.ny))
    d = grad_scalar(g, f)
    # discrete curl: plaquette circulation of the edge form
    circ = (d.ax + np.roll(d.ay, -1, axis=0) - np.roll(d.ax, -1, axis=1)
            - d.ay)
    assert np.abs(circ).max() < 1e-12


def test_current_gauge_invariance():
    g = torus_grid(20)
    rng = np.random.default_rng(5)
    phi = rng.normal(size=(g.nx, g.ny))
    u = field_from_phase(phi)
    v = field_from_phase(phi + 1.234)   # global rotation
    ju, jv = current(g, u), current(g, v)
    assert np.allclose(ju.ax, jv.ax, atol=1e-12)
    assert np.allclose(ju.ay, jv.ay, atol=1e-12)


def test_degree_conservation_property():
    """Sum of interior windings equals the boundary degree, exactly,
    for arbitrary constrained fields."""
    g = disk_grid(48)
    xs, ys = g.node_xy()
    x = np.broadcast_to(xs, (g.nx, g.ny))
    y = np.broadcast_to(ys, (g.nx, g.ny))
    rng = np.random.default_rng(11)
    for trial in range(20):
        k = int(rng.integers(-3, 4))
        bump = rng.normal(scale=0.8) * np.sin(
            2 * np.pi * (rng.normal(scale=0.5) + x * rng.integers(1, 4)))
        phi = k * np.arctan2(y, x + 1e-9) + bump
        u = field_from_phase(phi)
        try:
            total = int(winding_field(g, u).sum())
        except ValueError:
            continue    # a plaquette straddled the branch cut degenerately
        assert total == boundary_degree(g, u)


def test_plaquette_sums_quantized():
    g = rect_grid(40, 40, 0.02, centered=True)
    u = vortex_field(g, 2)
    s = plaquette_sums(g, u) / (2 * np.pi)
    assert np.allclose(s, np.rint(s), atol=1e-9)


def test_detect_vortices_positions():
    g = rect_grid(64, 64, 1.0 / 63, centered=True)
    u = vortex_field(g, 1, center=(0.1037, -0.2111))
    vs = detect_vortices(g, u)
    assert len(vs) == 1
    v = vs.vortices[0]
    assert v.winding == 1
    assert abs(v.position[0] - 0.1037) <= g.h
    assert abs(v.position[1] + 0.2111) <= g.h


def test_ball_integral_measures_area():
    g = disk_grid(128)
    ones = np.ones(g.cell_shape)
    r = 0.3
    area = ball_integral(g, ones, (0.0, 0.0), r)
    assert area == pytest.approx(np.pi * r * r, rel=2 * g.h)


def test_ball_leaving_domain_raises():
    g = disk_grid(64)
    with pytest.raises(DomainError):
        ball_cells(g, (0.3, 0.0), 0.3)
    t = torus_grid(16)
    with pytest.raises(DomainError):
        ball_cells(t, (0.5, 0.5), 0.6)


def test_boundary_degree_matches_trace():
    g = disk_grid(48)
    for k in (1, 2, 3):
        u = vortex_field(g, k)
        assert boundary_degree(g, u) == k


def test_oneform_arithmetic():
    a = OneForm2D(np.ones((4, 4)), np.zeros((4, 4)))
    b = OneForm2D(np.zeros((4, 4)), 2 * np.ones((4, 4)))
    c = a + b
    assert c.ax[0, 0] == 1.0 and c.ay[0, 0] == 2.0
    d = c - a
    assert d.ax[0, 0] == 0.0 and d.ay[0, 0] == 2.0


def test_relaxed_field_rejects_winding():
    g = torus_grid(12)
    u = S1Field(np.ones((12, 12, 2)) * [1.0, 0.0], "relaxed")
    with pytest.raises(ValueError):
        winding_field(g, u)
