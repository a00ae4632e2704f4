"""From a road network to continuum fields.

Builds the 10x10 perturbed Manhattan grid (1 km side, 20 m position
noise, 30 km/h streets with a few 50 km/h arterials, and a river gap
bridged in two places), then reconstructs the three continuum inputs of
the planar flow model:

* theta(x,y): inverse-distance-weighted direction field (speed-weighted),
* rho_max(x,y): jam density from a virtual bumper-to-bumper fleet
  smoothed with 100 m Gaussian kernels,
* v_max(x,y): inverse-distance-weighted speed limits.

Writes manhattan_fields.png showing the network, the direction quiver and
both scalar fields. The river shows up as the horizontal low-capacity
band in the density panel; that dip is what the boundary controller will
have to respect.

Run:  python demos/manhattan_fields.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gridflow import benchmark_scenario, generate_manhattan_grid, grid_for_bbox, \
    reconstruct_direction, reconstruct_rho_max, reconstruct_v_max

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

scn = benchmark_scenario()
net = generate_manhattan_grid(scn.rows, scn.cols, scn.side_m, scn.noise_sigma_m,
                              scn.seed, scn.default_speed,
                              fast_rows=scn.fast_rows, fast_cols=scn.fast_cols,
                              fast_speed=scn.fast_speed, river=scn.river)
grid = grid_for_bbox(net.bbox, scn.resolution_m)
theta = reconstruct_direction(net, grid, scn.idw_sensitivity, scn.idw_reg_m)
rho_max = reconstruct_rho_max(net, grid, scn.vehicle_spacing_m, scn.kernel_sigma_m)
v_max = reconstruct_v_max(net, grid, scn.idw_sensitivity, scn.idw_reg_m)

fig, axes = plt.subplots(2, 2, figsize=(11, 10))

ax = axes[0, 0]
for r in net.roads:
    a, b = net.node(r.from_node), net.node(r.to_node)
    fast = r.speed_limit > scn.default_speed + 1e-9
    ax.plot([a.x, b.x], [a.y, b.y], "-", lw=1.8 if fast else 0.8,
            color="C1" if fast else "0.35")
ax.plot([n.x for n in net.nodes], [n.y for n in net.nodes], "k.", ms=3)
ax.set_title(f"road network ({len(net.roads)} one-way roads; orange = 50 km/h)")
ax.set_aspect("equal")

ax = axes[0, 1]
s = 6  # quiver decimation
X, Y = np.meshgrid(grid.x_centers[::s], grid.y_centers[::s], indexing="ij")
ax.quiver(X, Y, np.cos(theta.theta[::s, ::s]), np.sin(theta.theta[::s, ::s]),
          theta.theta[::s, ::s], cmap="twilight", scale=40)
ax.set_title(r"direction field $\theta(x,y)$ (north-east trend)")
ax.set_aspect("equal")

extent = (grid.extent[0], grid.extent[2], grid.extent[1], grid.extent[3])
ax = axes[1, 0]
im = ax.imshow(rho_max.values.T * 1e3, origin="lower", extent=extent, cmap="magma")
fig.colorbar(im, ax=ax, label=r"$\rho_{max}$ [veh/1000 m$^2$]")
ax.set_title("jam density (note the river band)")

ax = axes[1, 1]
im = ax.imshow(v_max.values.T * 3.6, origin="lower", extent=extent, cmap="viridis")
fig.colorbar(im, ax=ax, label=r"$v_{max}$ [km/h]")
ax.set_title("speed-limit field")

fig.tight_layout()
fig.savefig(OUT / "manhattan_fields.png", dpi=140)
print(f"theta range [{np.degrees(theta.theta.min()):.1f}, "
      f"{np.degrees(theta.theta.max()):.1f}] deg; "
      f"v_max range [{v_max.values.min() * 3.6:.1f}, {v_max.values.max() * 3.6:.1f}] km/h")
print(f"figure saved to {OUT / 'manhattan_fields.png'}")
