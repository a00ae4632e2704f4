"""Straightening the flow: the curvilinear (xi, eta) chart.

The planar model only moves mass along the direction field, so its
integral curves can be relabeled as coordinate lines: xi runs along each
streamline, eta labels the streamline. Two scaling fields alpha and beta
(solutions of small transport PDEs driven by the turning of theta) make
the relabeling an honest coordinate chart with a uniform metric: after
the change of variables, every eta-line is an independent 1D conservation
law.

The script solves the scaling fields for the benchmark network, traces
the eta-paths, reconstructs the chart coordinates on the grid, and plots
everything. It also prints the integrability residuals (how far the
cross-derivatives of the chart are from commuting) and demonstrates the
degenerate case theta == 0 where the chart is exactly the identity.

Run:  python demos/curvilinear_chart.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gridflow import (DirectionField, GridSpec, benchmark_scenario, chart_potentials,
                      chart_residuals, generate_manhattan_grid, grid_for_bbox,
                      reconstruct_direction, solve_scaling_fields, trace_eta_paths)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# --- degenerate case first: straight flow needs no rotation or scaling ---
g0 = GridSpec(40, 40, 0.025, 0.025, (0.0, 0.0))
flat = DirectionField(g0, np.zeros((40, 40)))
sc0 = solve_scaling_fields(flat)
print("theta == 0: max|alpha-1| =", np.abs(sc0.alpha.values - 1).max(),
      " max|beta-1| =", np.abs(sc0.beta.values - 1).max())

# --- the benchmark chart ---
scn = benchmark_scenario()
net = generate_manhattan_grid(scn.rows, scn.cols, scn.side_m, scn.noise_sigma_m,
                              scn.seed, scn.default_speed,
                              fast_rows=scn.fast_rows, fast_cols=scn.fast_cols,
                              fast_speed=scn.fast_speed, river=scn.river)
grid = grid_for_bbox(net.bbox, scn.resolution_m)
theta = reconstruct_direction(net, grid, scn.idw_sensitivity, scn.idw_reg_m)
scaling = solve_scaling_fields(theta)
atlas = trace_eta_paths(theta, scaling, n_paths=40, step=scn.resolution_m / 2)
xi_field, eta_field = chart_potentials(theta, scaling)
rel_xi, rel_eta = chart_residuals(atlas, theta)
print(f"integrability residuals: xi {rel_xi:.2e}, eta {rel_eta:.2e}")

extent = (grid.extent[0], grid.extent[2], grid.extent[1], grid.extent[3])
fig, axes = plt.subplots(2, 2, figsize=(11, 10))

ax = axes[0, 0]
im = ax.imshow(scaling.alpha.values.T, origin="lower", extent=extent, cmap="coolwarm")
fig.colorbar(im, ax=ax, label=r"$\alpha$")
ax.set_title("streamwise metric factor")

ax = axes[0, 1]
im = ax.imshow(scaling.beta.values.T, origin="lower", extent=extent, cmap="coolwarm")
fig.colorbar(im, ax=ax, label=r"$\beta$")
ax.set_title("transverse metric factor")

ax = axes[1, 0]
for p in atlas.paths:
    ax.plot(p.points[:, 0], p.points[:, 1], "-", lw=0.8, color="C0")
ax.set_aspect("equal")
ax.set_title("eta-paths: curved in (x, y) ...")

ax = axes[1, 1]
X, Y = np.meshgrid(grid.x_centers, grid.y_centers, indexing="ij")
cs1 = ax.contour(X, Y, xi_field.values, levels=15, colors="C0", linewidths=0.8)
cs2 = ax.contour(X, Y, eta_field.values, levels=15, colors="C3", linewidths=0.8)
ax.clabel(cs1, inline=True, fontsize=6, fmt=r"$\xi$=%.0f")
ax.clabel(cs2, inline=True, fontsize=6, fmt=r"$\eta$=%.0f")
ax.set_aspect("equal")
ax.set_title("... and the chart coordinates on the grid")

fig.tight_layout()
fig.savefig(OUT / "curvilinear_chart.png", dpi=140)
print(f"figure saved to {OUT / 'curvilinear_chart.png'}")
