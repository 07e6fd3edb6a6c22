"""Energy functionals: closed forms, gradient exactness, penalty behavior."""
import math

import numpy as np
import pytest

from pvortex.energy import (DegenerateCellError, EnergyParams, PenaltyProfile,
                            base_wrapped_increments, gl_energy, gl_gradient,
                            mu_density, p_energy, phase_energy, phase_gradient)
from pvortex.lattice import (RELAXED, S1Field, field_from_phase, rect_grid,
                             torus_grid)
from pvortex.diagnostics import annulus_energy, vortex_field, vortex_energy_exact


def test_energy_params_validation():
    with pytest.raises(ValueError):
        EnergyParams(p=2.5)
    with pytest.raises(ValueError):
        EnergyParams(p=1.0)
    with pytest.raises(ValueError):
        EnergyParams(p=1.5, eps_penalty=0.0)
    with pytest.raises(ValueError):
        EnergyParams(p=1.5, delta_reg=-1e-3)
    assert EnergyParams(p=1.5).penalty_weight == 0.0
    assert EnergyParams(p=1.5, eps_penalty=0.5).penalty_weight == pytest.approx(2 ** 1.5)


def test_penalty_profile_shape():
    prof = PenaltyProfile()
    assert prof.value(np.array(0.0)) == 0.0
    assert prof.deriv(np.array(0.0)) == 1.0
    # quadratic near the circle, saturating far away
    small = prof.value(np.array(1e-3))
    assert small == pytest.approx(1e-3)
    far = prof.value(np.array([1.0, 4.0, 100.0]))
    assert (np.diff(far) >= 0).all()
    assert far[-1] <= 4 * prof.delta_n ** 2 + 1e-12
    with pytest.raises(ValueError):
        PenaltyProfile(delta_n=0.3)


def test_penalty_derivative_matches_fd():
    prof = PenaltyProfile()
    ts = np.linspace(1e-4, 0.5, 40)
    eps = 1e-7
    fd = (prof.value(ts + eps) - prof.value(ts - eps)) / (2 * eps)
    assert np.allclose(prof.deriv(ts), fd, atol=1e-5)


def test_vortex_annulus_energy_closed_form():
    g = rect_grid(128, 128, 2.0 / 127)    # covers the unit annulus
    for kappa, p in ((1, 1.5), (2, 1.9)):
        u = vortex_field(g, kappa)
        num = annulus_energy(g, u, (0.0, 0.0), 0.1, 0.9, p)
        exact = vortex_energy_exact(kappa, p, 0.1, 0.9)
        assert num == pytest.approx(exact, rel=0.02)


def test_p2_reduces_to_dirichlet_energy():
    g = torus_grid(64)
    xs, _ = g.node_xy()
    m = 2
    u = field_from_phase(2 * np.pi * m * np.broadcast_to(xs, (64, 64)).copy())
    # |du|^2 = (2 pi m)^2 on every cell, exactly
    assert p_energy(g, u, 2.0) == pytest.approx((2 * np.pi * m) ** 2, rel=1e-12)


def test_mu_density_totals():
    g = torus_grid(32)
    xs, _ = g.node_xy()
    u = field_from_phase(2 * np.pi * np.broadcast_to(xs, (32, 32)).copy())
    for p in (1.5, 1.9):
        mu = mu_density(g, u, p)
        assert g.h ** 2 * mu.sum() == pytest.approx((2 - p) * p_energy(g, u, p), rel=1e-12)
        # linear phase: density is spatially constant
        assert mu.std() <= 1e-9 * mu.mean()


def test_gl_energy_penalty_vanishes_on_unit_fields():
    g = torus_grid(24)
    rng = np.random.default_rng(7)
    phi = rng.normal(size=(24, 24))
    u = field_from_phase(phi)
    relaxed = S1Field(u.values.copy(), RELAXED)
    with_pen = gl_energy(g, relaxed, EnergyParams(p=1.7, eps_penalty=0.05))
    without = gl_energy(g, relaxed, EnergyParams(p=1.7))
    assert with_pen == without
    # shrinking the modulus turns the penalty on
    shrunk = S1Field(0.9 * u.values, RELAXED)
    assert gl_energy(g, shrunk, EnergyParams(p=1.7, eps_penalty=0.05)) > \
        gl_energy(g, shrunk, EnergyParams(p=1.7))


def test_gl_gradient_matches_central_differences():
    g = torus_grid(16)
    rng = np.random.default_rng(42)
    vals = np.stack([1.0 + 0.1 * rng.normal(size=(16, 16)),
                     0.1 * rng.normal(size=(16, 16))], axis=-1)
    u = S1Field(vals, RELAXED)
    params = EnergyParams(p=1.6, eps_penalty=0.1, delta_reg=0.05)
    grad = gl_gradient(g, u, params)
    step = 1e-6
    for (i, j, c) in ((0, 0, 0), (5, 11, 1), (12, 3, 0), (8, 8, 1)):
        vp = vals.copy(); vp[i, j, c] += step
        vm = vals.copy(); vm[i, j, c] -= step
        fd = (gl_energy(g, S1Field(vp, RELAXED), params)
              - gl_energy(g, S1Field(vm, RELAXED), params)) / (2 * step)
        assert grad[i, j, c] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_gradient_rejects_constrained_fields():
    g = torus_grid(16)
    u = field_from_phase(np.zeros((16, 16)))
    with pytest.raises(ValueError):
        gl_gradient(g, u, EnergyParams(p=1.5))


def test_degenerate_cell_guard():
    g = torus_grid(16)
    u = S1Field(np.broadcast_to([1.0, 0.0], (16, 16, 2)).copy(), RELAXED)
    with pytest.raises(DegenerateCellError):
        gl_gradient(g, u, EnergyParams(p=1.5, delta_reg=0.0))
    # regularization or p = 2 clears the guard
    gl_gradient(g, u, EnergyParams(p=1.5, delta_reg=1e-3))
    gl_gradient(g, u, EnergyParams(p=2.0, delta_reg=0.0))


def test_constant_field_has_zero_energy():
    g = torus_grid(16)
    u = field_from_phase(np.zeros((16, 16)))
    assert p_energy(g, u, 1.5) == 0.0
    assert p_energy(g, u, 2.0) == 0.0


def test_phase_route_consistency():
    """Energy and gradient of the wrapped-phase parametrization agree with
    the field functional at the base point."""
    g = torus_grid(24)
    rng = np.random.default_rng(9)
    u = field_from_phase(rng.normal(size=(24, 24)))
    wx, wy = base_wrapped_increments(g, u)
    p, delta = 1.7, 0.02
    theta0 = np.zeros((24, 24))
    e0 = phase_energy(g, wx, wy, theta0, p, delta, None)
    assert e0 == pytest.approx(p_energy(g, u, p, delta), rel=1e-12)

    grad = phase_gradient(g, wx, wy, theta0, p, delta, None)
    step = 1e-6
    for (i, j) in ((0, 0), (7, 13), (20, 5)):
        tp = theta0.copy(); tp[i, j] += step
        tm = theta0.copy(); tm[i, j] -= step
        fd = (phase_energy(g, wx, wy, tp, p, delta, None)
              - phase_energy(g, wx, wy, tm, p, delta, None)) / (2 * step)
        assert grad[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_p_energy_monotone_in_delta():
    g = torus_grid(16)
    xs, _ = g.node_xy()
    u = field_from_phase(2 * np.pi * np.broadcast_to(xs, (16, 16)).copy())
    es = [p_energy(g, u, 1.5, d) for d in (0.0, 0.5, 1.0)]
    assert es[0] < es[1] < es[2]
