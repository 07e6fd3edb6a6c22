"""Lattice laboratory for circle-valued p-harmonic maps near p = 2.

Builds stationary maps from 2D domains to the unit circle by minimizing the
regularized p-energy (optionally relaxed with a modulus penalty), and
measures the concentration structure that emerges as p approaches 2:
energy-density profiles, vortex quantization, the Pohozaev balance,
Hodge components of the current, and min-max energy levels of the standard
sweep-out family.
"""

__version__ = "0.1.0"

from .lattice import (CONSTRAINED, RELAXED, DomainError, Grid2D, OneForm2D,
                      S1Field, Vortex, VortexSet, boundary_degree, current,
                      detect_vortices, disk_grid, field_from_complex,
                      field_from_phase, rect_grid, torus_grid, winding,
                      winding_field)
from .energy import (DegenerateCellError, EnergyParams, PenaltyProfile,
                     gl_energy, gl_gradient, mu_density, p_energy)
from .solver import (DivergenceError, ProjectionError, SolveConfig,
                     SolveReport, StageResult, continuation_sweep,
                     default_stages, disk_degree_init, minimize, project_unit,
                     torus_vortex_field, upsample_field)
from .diagnostics import (DensityProfile, PohozaevReport, QuantizationReport,
                          density_constant, density_profile, energy_density,
                          pohozaev_residual, quantization_report,
                          reference_radius, stationarity_residual,
                          vortex_energy_exact, vortex_field)
from .hodge import (DiffuseRow, HodgeParts, diffuse_measure_table,
                    diffuse_winding_mode, exact_part_scaling, hodge_decompose,
                    scaling_bound)
from .minmax import (FamilySurface, WitnessReport, family_energy_surface,
                     family_map, mean_zero_witness, polar_parameter_grid,
                     vortex_of)
from .fieldio import export_csv, load_snapshot, save_snapshot
from .experiments import (ConfigError, ExperimentConfig, ExperimentError,
                          parse_config, render_config, run_experiment,
                          validate_config)
