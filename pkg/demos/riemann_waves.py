"""Classic Riemann problems on a single flow line.

Two textbook initial states for the parabolic flow-density relation
(v_max = rho_max = 1) exercise the finite-volume solver:

* a dam break (full jam upstream, empty road downstream) that opens into
  a rarefaction fan, and
* the 0.2 / 0.8 density pair, whose fluxes match so the shock stands
  still at x = 0.

The script compares the numerical profiles to the exact solutions and
writes riemann_waves.png next to this file.

Run:  python demos/riemann_waves.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gridflow import FdParams, GhostCell, LineState, SuppliedControl, run

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def make_line(n, profile, d_in, outflow):
    dxi = 2.0 / n
    xi = -1.0 + (np.arange(n) + 0.5) * dxi
    return LineState(eta=0.0, xi=xi, dxi=dxi, fd=FdParams(np.ones(n), np.ones(n)),
                     rho=profile(xi), inflow_demand=d_in, outflow=outflow)


def rarefaction(x, t):
    return np.clip(0.5 * (1.0 - x / t), 0.0, 1.0)


t_end = 0.5
n = 400

dam = make_line(n, lambda x: np.where(x < 0, 1.0, 0.0), 0.0, SuppliedControl(0.0))
dam_final = run(dam, t_end, cfl=0.9)

shock = make_line(n, lambda x: np.where(x < 0, 0.2, 0.8), 0.16, GhostCell())
shock_final = run(shock, t_end, cfl=0.9)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
x = dam.xi
ax1.plot(x, dam_final.rho, "C0.", ms=3, label=f"numerical t={t_end}")
ax1.plot(x, rarefaction(x, t_end), "k-", lw=1, label="exact rarefaction")
ax1.plot(x, dam.rho, "C3:", lw=1, label="initial")
ax1.set_title("dam break 1 → 0")
ax1.set_xlabel("x")
ax1.set_ylabel(r"$\rho$")
ax1.legend()

ax2.plot(x, shock_final.rho, "C0.", ms=3, label=f"numerical t={t_end}")
ax2.plot(x, np.where(x < 0, 0.2, 0.8), "k-", lw=1, label="exact standing shock")
ax2.set_title("standing shock 0.2 / 0.8")
ax2.set_xlabel("x")
ax2.legend()

fig.tight_layout()
fig.savefig(OUT / "riemann_waves.png", dpi=140)
err = np.abs(dam_final.rho - rarefaction(x, t_end)).sum() * dam.dxi
print(f"dam-break L1 error at t={t_end}: {err:.2e}")
print(f"figure saved to {OUT / 'riemann_waves.png'}")
