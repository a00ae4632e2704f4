"""gridflow: urban traffic fields, curvilinear 1D reduction, and boundary control.

From a road network the package reconstructs continuum direction, density
and speed fields, maps the flow's integral curves to straight lines with a
curvilinear chart, simulates every line with a first-order finite-volume
scheme, and computes the exit-supply control that drives a congested
domain to its maximum-throughput equilibrium.
"""

__version__ = "0.1.0"

from .control import (Bottleneck, ControlPlan, LinePlan, apply_plan, control_law,
                      desired_density_profile, find_bottleneck, nu_bound,
                      plan_for_lines, steady_state_flow)
from .diagnostics import (ConvergenceReport, decay_report, density_error,
                          fit_decay_rate, l2_norm, lyapunov)
from .fields import (ContinuumFields, DirectionField, GridSpec, ScalarField,
                     grid_for_bbox, load_raster, reconstruct_direction,
                     reconstruct_rho_max, reconstruct_v_max, save_raster)
from .godunov import (FdParams, GhostCell, LineState, SuppliedControl, all_fluxes,
                      boundary_fluxes, cfl_dt, demand, greenshields_flux,
                      interface_flux, line_from_path, run, step, supply)
from .network import (Node, RiverSpec, Road, RoadNetwork, generate_manhattan_grid,
                      load_network, save_network)
from .pipeline import SimulationResult, build_lines, run_pipeline
from .scenario import Scenario, benchmark_scenario, load_scenario, small_scenario
from .transform import (CurvilinearAtlas, EtaPath, ScalingFields, chart_potentials,
                        chart_residuals, inflow_boundary, mixed_partial_residual,
                        rescale_line_data, scaling_residuals, solve_scaling_fields,
                        trace_eta_paths)
