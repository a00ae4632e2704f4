"""Steady-state analysis and throughput-maximizing boundary control.

With a constant entry demand and exit supply, each line settles to a
space-independent flow equal to the minimum of entry demand, exit supply,
and the smallest capacity along the line (the strongest bottleneck, at
xi_star; ties resolve to the left-most cell). When the entry demand
exceeds the bottleneck capacity, the exit supply is the control variable.

Pinning the exit supply to u = phi_max(xi_star) - epsilon (a hair below
the bottleneck capacity) moves the binding constraint to the exit itself,
so the whole line equilibrates on the congested branch of the FD carrying
flow phi_d = u. The desired density profile is the congested-branch
inverse of the Greenshields flux at phi_d:

    rho_d(xi) = rho_max/2 + sqrt(rho_max^2/4 - (rho_max / v_max) * phi_d)

per cell. At the bottleneck cell the discriminant collapses to
epsilon * rho_max / v_max, so rho_d(xi*) = rho_max/2 + sqrt(eps*rho_max/v_max):
the profile grazes the critical density as epsilon -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import NumericalError, ValidationError
from .godunov import LineState, SuppliedControl, greenshields_flux


class Bottleneck(NamedTuple):
    index: int
    xi: float
    phi_max: float


@dataclass
class LinePlan:
    """Desired equilibrium and control for one line."""

    eta: float
    bottleneck: Bottleneck
    phi_d: float
    u: float
    rho_d: np.ndarray
    epsilon: float
    nu: float

    @property
    def xi_star(self):
        return self.bottleneck.xi


@dataclass
class ControlPlan:
    """Per-line plans for a whole atlas, ordered by eta."""

    plans: list

    def __iter__(self):
        return iter(self.plans)

    def __len__(self):
        return len(self.plans)


def find_bottleneck(line: LineState) -> Bottleneck:
    """Left-most cell of minimal capacity along the line."""
    if line.n_cells < 1:
        raise ValidationError("line has no cells")
    phi = np.broadcast_to(line.fd.phi_max, line.rho.shape)
    i = int(np.argmin(phi))  # argmin takes the first minimum: left-most tie-break
    return Bottleneck(index=i, xi=float(line.xi[i]), phi_max=float(phi[i]))


def steady_state_flow(line: LineState, d_in: float, s_out: float) -> float:
    """min(entry demand, bottleneck capacity, exit supply)."""
    if d_in < 0 or s_out < 0:
        raise ValidationError("boundary demand/supply must be >= 0")
    return float(min(d_in, find_bottleneck(line).phi_max, s_out))


def desired_density_profile(line: LineState, epsilon: float) -> LinePlan:
    """The epsilon-optimal congested equilibrium profile for one line.

    Requires 0 < epsilon < phi_max(xi_star). Every cell's capacity is at
    least the bottleneck's, so the congested-branch discriminant stays
    positive; a negative one would mean the bottleneck search is broken.
    """
    b = find_bottleneck(line)
    if not 0 < epsilon < b.phi_max:
        raise ValidationError(
            f"epsilon must lie in (0, phi_max(xi*)) = (0, {b.phi_max:.6g}), got {epsilon}"
        )
    phi_d = b.phi_max - epsilon
    rho_max = np.broadcast_to(line.fd.rho_max, line.rho.shape)
    v_max = np.broadcast_to(line.fd.v_max, line.rho.shape)
    disc = rho_max**2 / 4.0 - (rho_max / v_max) * phi_d
    if np.any(disc < 0):
        raise NumericalError(
            "negative discriminant in the congested-branch inverse; "
            "a cell's capacity is below the computed bottleneck capacity"
        )
    rho_d = rho_max / 2.0 + np.sqrt(disc)
    return LinePlan(eta=line.eta, bottleneck=b, phi_d=float(phi_d), u=float(phi_d),
                    rho_d=rho_d, epsilon=float(epsilon),
                    nu=nu_bound(line, epsilon))


def control_law(plan: LinePlan) -> float:
    """Exit supply of the line: u = phi_max(xi_star) - epsilon (= phi_d)."""
    return plan.u


def apply_plan(line: LineState, plan: LinePlan) -> LineState:
    """Line with its outflow pinned to the plan's control value."""
    return replace(line, outflow=SuppliedControl(plan.u))


def nu_bound(line: LineState, epsilon: float) -> float:
    """Certified linearized decay rate sqrt(v_max(xi_star) * epsilon).

    Reported next to measured decay slopes, never asserted: the
    certificate holds for the linearized dynamics only.
    """
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    b = find_bottleneck(line)
    v_star = float(np.broadcast_to(line.fd.v_max, line.rho.shape)[b.index])
    return float(np.sqrt(v_star * epsilon))


def plan_for_lines(lines, epsilon: float) -> ControlPlan:
    """Desired profiles and controls for every line of a simulation set."""
    return ControlPlan([desired_density_profile(line, epsilon) for line in lines])


def save_control_plan(plan: ControlPlan, path) -> None:
    """Text table: one line per eta with bottleneck location, flow and control."""
    with open(path, "w") as fh:
        fh.write("# gridflow control plan v1\n")
        fh.write("# eta xi_star phi_d u epsilon\n")
        for p in plan:
            fh.write(f"{float(p.eta)!r} {float(p.xi_star)!r} {float(p.phi_d)!r} "
                     f"{float(p.u)!r} {float(p.epsilon)!r}\n")
