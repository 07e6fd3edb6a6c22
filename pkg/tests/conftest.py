"""Shared fixtures: converged solves are expensive, so every solve-backed
fixture is session-scoped and computed lazily on first request.

The acceptance tests append one line per criterion to ACCEPTANCE_LINES;
the terminal-summary hook prints them after the run so the pass/fail
record is visible regardless of capture settings.
"""
from collections import namedtuple

import numpy as np
import pytest

from pvortex.energy import EnergyParams
from pvortex.lattice import disk_grid, torus_grid
from pvortex.minmax import family_energy_surface
from pvortex.solver import (SolveConfig, continuation_sweep, default_stages,
                            disk_degree_init, project_unit,
                            torus_vortex_field, upsample_field)

ACCEPTANCE_LINES: list[str] = []

SWEEP_P = (1.5, 1.7, 1.9)
PAIR_P = (1.5, 1.7, 1.8, 1.9)

SweepData = namedtuple("SweepData", "grid results finals")
# finals: {p: StageResult at the smallest delta_reg}

Projected = namedtuple("Projected", "grid field vortices")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def _solve_cfg():
    return SolveConfig(grad_tol=1e-5, max_iters=6000)


def _disk_sweep(n: int, k: int, p_list) -> SweepData:
    grid = disk_grid(n)
    u0 = disk_degree_init(grid, k)
    stages = default_stages(list(p_list), grid.h)
    results = continuation_sweep(grid, u0, stages, _solve_cfg())
    finals = {}
    for st in results:
        finals[st.params.p] = st     # later stages overwrite: delta descends
    return SweepData(grid, results, finals)


def _project(grid, field) -> Projected:
    from pvortex.lattice import detect_vortices
    u, _ = project_unit(grid, field)
    return Projected(grid, u, detect_vortices(grid, u))


@pytest.fixture(scope="session")
def disk96_k1():
    """Small converged k=1 solve for unit-scale diagnostics tests."""
    data = _disk_sweep(96, 1, (1.5,))
    return data, _project(data.grid, data.finals[1.5].field)


@pytest.fixture(scope="session")
def disk256_k1():
    return _disk_sweep(256, 1, SWEEP_P)


@pytest.fixture(scope="session")
def disk256_k2():
    return _disk_sweep(256, 2, SWEEP_P)


@pytest.fixture(scope="session")
def disk256_k3():
    return _disk_sweep(256, 3, SWEEP_P)


@pytest.fixture(scope="session")
def disk512_k1(disk256_k1):
    """Half-h refinements of the k=1 finals, warm-started per p."""
    g256 = disk256_k1.grid
    g512 = disk_grid(512)
    out = {}
    for p in SWEEP_P:
        u0 = upsample_field(g256, disk256_k1.finals[p].field, g512)
        results = continuation_sweep(g512, u0, default_stages([p], g512.h),
                                     _solve_cfg())
        out[p] = _project(g512, results[-1].field)
    return out


@pytest.fixture(scope="session")
def disk_p13():
    """k=1 solves at p=1.3 on h and h/2 for the Pohozaev refinement check."""
    coarse = _disk_sweep(256, 1, (1.3,))
    g512 = disk_grid(512)
    u0 = upsample_field(coarse.grid, coarse.finals[1.3].field, g512)
    results = continuation_sweep(g512, u0, default_stages([1.3], g512.h),
                                 _solve_cfg())
    return (_project(coarse.grid, coarse.finals[1.3].field),
            _project(g512, results[-1].field))


@pytest.fixture(scope="session")
def torus_pair128():
    """Converged +1/-1 vortex pair sweep on the 128^2 torus."""
    grid = torus_grid(128)
    charges = [((0.25, 0.25), 1), ((0.75, 0.75), -1)]
    u0 = torus_vortex_field(grid, charges)
    stages = default_stages(list(PAIR_P), grid.h)
    results = continuation_sweep(grid, u0, stages, _solve_cfg())
    finals = {}
    for st in results:
        finals[st.params.p] = st
    return SweepData(grid, results, finals)


@pytest.fixture(scope="session")
def minmax128():
    """Family energy surfaces on the 128^2 unit square."""
    from pvortex.lattice import rect_grid
    grid = rect_grid(128, 128, 1.0 / 127)
    out = {}
    for p in SWEEP_P:
        params = EnergyParams(p=p, eps_penalty=grid.h)
        out[p] = family_energy_surface(grid, params, 32, 32)
    return grid, out


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
