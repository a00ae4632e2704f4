"""First-order finite-volume solver for the 1D flow lines.

Each eta-path carries a scalar conservation law for the rescaled density
rho(xi, t) with the parabolic (Greenshields) flow-density relation

    Phi(rho) = v_max * rho * (1 - rho / rho_max),

maximal flow phi_max = v_max * rho_max / 4 at the critical density
rho_c = rho_max / 2. Interface fluxes use the demand/supply form of the
Godunov flux: min(demand(left), supply(right)), with the demand evaluated
with the left cell's FD parameters and the supply with the right cell's,
which is also how capacity drops between cells act as bottlenecks.

Boundaries: the inflow flux is min(D_in, supply(first cell)). The outflow
is either a ghost cell (free outflow: the outflow copies the interface
flux one cell earlier) or a supplied control min(demand(last cell), S_out).

The explicit update is stable for dt <= dxi / max(v_max); `step` refuses
larger steps instead of clamping.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CflViolationError, ConservationError, ValidationError


@dataclass(frozen=True)
class FdParams:
    """Greenshields fundamental-diagram parameters, scalar or per-cell arrays."""

    v_max: np.ndarray
    rho_max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v_max", np.asarray(self.v_max, dtype=float))
        object.__setattr__(self, "rho_max", np.asarray(self.rho_max, dtype=float))
        if np.any(self.v_max <= 0) or np.any(self.rho_max <= 0):
            raise ValidationError("FD parameters must be strictly positive")

    @property
    def rho_c(self):
        return self.rho_max / 2.0

    @property
    def phi_max(self):
        return self.v_max * self.rho_max / 4.0


@dataclass(frozen=True)
class GhostCell:
    """Free outflow: outflow flux copies the previous interface flux."""


@dataclass(frozen=True)
class SuppliedControl:
    """Controlled outflow: the exit supply is pinned to ``value``."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValidationError(f"supplied outflow must be >= 0, got {self.value}")


@dataclass
class LineState:
    """Discrete state of one flow line: uniform cells along xi."""

    eta: float
    xi: np.ndarray  # cell centers, increasing
    dxi: float
    fd: FdParams  # per-cell arrays
    rho: np.ndarray
    time: float = 0.0
    inflow_demand: float = 0.0
    outflow: object = field(default_factory=GhostCell)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.rho = np.asarray(self.rho, dtype=float)
        n = len(self.xi)
        if self.dxi <= 0:
            raise ValidationError(f"dxi must be positive, got {self.dxi}")
        if np.any(np.diff(self.xi) <= 0):
            raise ValidationError("cells must be ordered by increasing xi")
        if self.rho.shape != (n,) or self.fd.v_max.shape not in ((n,), ()):
            raise ValidationError("rho/FD arrays must match the cell count")
        if np.any(self.rho < 0) or np.any(self.rho > self.fd.rho_max * (1 + 1e-12)):
            raise ValidationError("density outside [0, rho_max]")
        if self.inflow_demand < 0:
            raise ValidationError("inflow demand must be >= 0")

    @property
    def n_cells(self):
        return len(self.xi)

    def vehicle_count(self):
        return float(np.sum(self.rho) * self.dxi)


def _check_range(rho, fd):
    tol = 1e-12 * fd.rho_max + 1e-300
    if np.any(rho < -tol) or np.any(rho > fd.rho_max + tol):
        raise ValidationError("density outside [0, rho_max]")


def greenshields_flux(rho, fd: FdParams):
    """Phi(rho) = v_max * rho * (1 - rho / rho_max)."""
    _check_range(rho, fd)
    return fd.v_max * rho * (1.0 - rho / fd.rho_max)


def demand(rho, fd: FdParams):
    """Nondecreasing envelope of the FD: Phi(rho) below rho_c, phi_max above."""
    _check_range(rho, fd)
    r = np.clip(rho, 0.0, fd.rho_max)
    return np.where(r <= fd.rho_c, fd.v_max * r * (1.0 - r / fd.rho_max), fd.phi_max)


def supply(rho, fd: FdParams):
    """Nonincreasing envelope of the FD: phi_max below rho_c, Phi(rho) above."""
    _check_range(rho, fd)
    r = np.clip(rho, 0.0, fd.rho_max)
    return np.where(r <= fd.rho_c, fd.phi_max, fd.v_max * r * (1.0 - r / fd.rho_max))


def interface_flux(rho_left, fd_left: FdParams, rho_right, fd_right: FdParams):
    """Godunov flux between cells: min(demand(left), supply(right))."""
    return np.minimum(demand(rho_left, fd_left), supply(rho_right, fd_right))


def all_fluxes(state: LineState) -> np.ndarray:
    """All n+1 interface fluxes, index i sitting left of cell i."""
    n = state.n_cells
    d = demand(state.rho, state.fd)
    s = supply(state.rho, state.fd)
    f = np.empty(n + 1)
    f[1:n] = np.minimum(d[:-1], s[1:])
    f[0] = min(state.inflow_demand, s[0] if s.shape else float(s))
    if isinstance(state.outflow, SuppliedControl):
        f[n] = min(d[-1] if d.shape else float(d), state.outflow.value)
    elif isinstance(state.outflow, GhostCell):
        # free outflow: copy the flux entering the last cell
        f[n] = f[n - 1] if n >= 2 else (d[-1] if d.shape else float(d))
    else:
        raise ValidationError(f"unknown outflow spec {state.outflow!r}")
    return f


def boundary_fluxes(state: LineState):
    """(inflow flux, outflow flux) for the current state."""
    f = all_fluxes(state)
    return float(f[0]), float(f[-1])


def cfl_dt(state: LineState, cfl: float = 0.9) -> float:
    """Largest stable time step: cfl * dxi / max wave speed (= v_max at rho=0)."""
    if not 0 < cfl <= 1:
        raise ValidationError(f"cfl must be in (0, 1], got {cfl}")
    return cfl * state.dxi / float(np.max(state.fd.v_max))


def step(state: LineState, dt: float) -> LineState:
    """One conservative explicit update; refuses CFL-violating steps."""
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    limit = cfl_dt(state, 1.0)
    if dt > limit * (1 + 1e-9):
        raise CflViolationError(f"dt {dt:.6g} exceeds CFL bound {limit:.6g}")
    f = all_fluxes(state)
    rho = state.rho - (dt / state.dxi) * np.diff(f)
    tol = 1e-9 * state.fd.rho_max
    if np.any(rho < -tol) or np.any(rho > state.fd.rho_max + tol):
        raise ConservationError(
            f"density left [0, rho_max] beyond round-off at t={state.time:.6g}"
        )
    rho = np.clip(rho, 0.0, state.fd.rho_max)
    return replace(state, rho=rho, time=state.time + dt)


def run(state: LineState, horizon: float, cfl: float = 0.9, observer=None,
        observe_every: int | None = None, observe_times=None,
        freeze_tol: float | None = None) -> LineState:
    """March ``state`` forward by ``horizon`` seconds.

    dt comes from the CFL bound and is clipped so the run lands exactly on
    every requested observation time and on the final time. ``observer``
    is called as observer(time, state); with ``observe_every`` it fires
    every that many steps, with ``observe_times`` (absolute times) exactly
    at those instants.

    ``freeze_tol``: if no density changes more than this in one step the
    state is an (at least numerical) fixed point; the run fast-forwards
    to the end, replaying the frozen state at remaining observation times.
    """
    if horizon < 0:
        raise ValidationError(f"horizon must be >= 0, got {horizon}")
    if horizon == 0:
        return state
    t_end = state.time + horizon
    dt0 = cfl_dt(state, cfl)
    targets = sorted(t for t in (observe_times if observe_times is not None else ())
                     if state.time < t <= t_end + 1e-9 * dt0)
    tiny = 1e-9 * dt0
    k = 0
    while state.time < t_end - tiny:
        dt = min(dt0, t_end - state.time)
        if targets:
            dt = min(dt, targets[0] - state.time)
        new = step(state, dt)
        if freeze_tol is not None and np.max(np.abs(new.rho - state.rho)) <= freeze_tol:
            for t in targets:
                if observer is not None:
                    observer(t, replace(new, time=t))
            return replace(new, time=t_end)
        state = new
        k += 1
        if targets and state.time >= targets[0] - tiny:
            targets.pop(0)
            if observer is not None:
                observer(state.time, state)
        elif observe_every and k % observe_every == 0 and observer is not None:
            observer(state.time, state)
    # float landing can leave a target within tolerance of t_end unfired
    for t in targets:
        if observer is not None:
            observer(t, replace(state, time=t))
    return state


def line_from_path(path, n_cells: int, eta: float | None = None) -> LineState:
    """Resample a rescaled eta-path into ``n_cells`` uniform cells.

    FD parameters are interpolated along the path in xi. Density starts at
    zero and boundary specs at their defaults; callers set initial and
    boundary conditions with dataclasses.replace.
    """
    if n_cells < 1:
        raise ValidationError(f"n_cells must be >= 1, got {n_cells}")
    if path.rho_max_bar is None:
        raise ValidationError("path carries no rescaled data; run rescale_line_data first")
    length = path.xi_max - path.xi_min
    if length <= 0:
        raise ValidationError("path has zero xi extent")
    dxi = length / n_cells
    centers = path.xi_min + (np.arange(n_cells) + 0.5) * dxi
    v = np.interp(centers, path.xi, path.v_max_bar)
    rho_max = np.interp(centers, path.xi, path.rho_max_bar)
    fd = FdParams(v, rho_max)
    return LineState(eta=path.eta if eta is None else eta, xi=centers, dxi=float(dxi),
                     fd=fd, rho=np.zeros(n_cells))
