import numpy as np
import pytest

from gridflow.errors import CflViolationError, ValidationError
from gridflow.godunov import (FdParams, GhostCell, LineState, SuppliedControl,
                              all_fluxes, boundary_fluxes, cfl_dt, demand,
                              greenshields_flux, interface_flux, line_from_path,
                              run, step, supply)
from gridflow.transform import EtaPath

from oracles import rarefaction_cell_averages, shock_front_index, stationary_shock_profile

UNIT_FD = FdParams(1.0, 1.0)


def uniform_line(n, rho, d_in=0.0, outflow=GhostCell(), length=2.0, x0=-1.0):
    dxi = length / n
    xi = x0 + (np.arange(n) + 0.5) * dxi
    fd = FdParams(np.ones(n), np.ones(n))
    if callable(rho):
        rho0 = rho(xi)
    else:
        rho0 = np.full(n, float(rho))
    return LineState(eta=0.0, xi=xi, dxi=dxi, fd=fd, rho=rho0,
                     inflow_demand=d_in, outflow=outflow)


def test_fd_params_derived_quantities():
    fd = FdParams(2.0, 0.5)
    assert fd.rho_c == 0.25
    assert fd.phi_max == 0.25
    with pytest.raises(ValidationError):
        FdParams(-1.0, 1.0)


def test_demand_branch_values():
    assert demand(0.0, UNIT_FD) == 0.0
    assert demand(0.5, UNIT_FD) == 0.25  # continuous at the critical density
    assert demand(1.0, UNIT_FD) == 0.25
    assert supply(0.0, UNIT_FD) == 0.25
    assert supply(0.5, UNIT_FD) == 0.25
    assert supply(1.0, UNIT_FD) == 0.0
    assert greenshields_flux(0.25, UNIT_FD) == pytest.approx(0.1875)


def test_density_domain_checked():
    with pytest.raises(ValidationError):
        demand(1.2, UNIT_FD)
    with pytest.raises(ValidationError):
        supply(-0.1, UNIT_FD)


def test_interface_flux_examples():
    assert interface_flux(1.0, UNIT_FD, 0.0, UNIT_FD) == 0.25
    assert interface_flux(0.0, UNIT_FD, 1.0, UNIT_FD) == 0.0
    assert interface_flux(0.2, UNIT_FD, 0.2, UNIT_FD) == pytest.approx(0.16)


@pytest.mark.parametrize("seed", range(5))
def test_interface_flux_monotone(seed):
    rng = np.random.default_rng(seed)
    rl, rr = rng.uniform(0, 1, 2)
    d = rng.uniform(0, 1 - max(rl, rr))
    f0 = interface_flux(rl, UNIT_FD, rr, UNIT_FD)
    assert interface_flux(min(rl + d, 1.0), UNIT_FD, rr, UNIT_FD) >= f0 - 1e-15
    assert interface_flux(rl, UNIT_FD, min(rr + d, 1.0), UNIT_FD) <= f0 + 1e-15
    assert f0 <= UNIT_FD.phi_max + 1e-15


def test_capacity_drop_acts_as_bottleneck():
    fd = FdParams(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
    state = LineState(eta=0.0, xi=np.array([0.5, 1.5]), dxi=1.0, fd=fd,
                      rho=np.array([0.6, 0.5]), inflow_demand=0.0,
                      outflow=SuppliedControl(1.0))
    f = all_fluxes(state)
    # demand of left cell uses its own FD, supply of right cell its own
    assert f[1] == pytest.approx(min(0.25, 0.125))


def test_jam_with_ghost_cell_is_frozen():
    line = uniform_line(30, 1.0, d_in=0.25, outflow=GhostCell())
    after = step(line, cfl_dt(line, 0.9))
    assert np.array_equal(after.rho, line.rho)


def test_jam_with_supplied_control_drains_last_cell_only():
    line = uniform_line(30, 1.0, d_in=0.25, outflow=SuppliedControl(0.2))
    after = step(line, cfl_dt(line, 0.9))
    assert np.array_equal(after.rho[:-1], line.rho[:-1])
    assert after.rho[-1] < 1.0


def test_empty_line_stays_empty():
    line = uniform_line(20, 0.0, d_in=0.0)
    after = step(line, cfl_dt(line, 0.9))
    assert np.array_equal(after.rho, line.rho)


def test_cfl_violation_raises_not_clamps():
    line = uniform_line(20, 0.3)
    with pytest.raises(CflViolationError):
        step(line, 2.0 * line.dxi)
    with pytest.raises(ValidationError):
        step(line, 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_maximum_principle(seed):
    rng = np.random.default_rng(100 + seed)
    n = 40
    line = uniform_line(n, lambda xi: rng.uniform(0, 1, n),
                        d_in=float(rng.uniform(0, 0.3)),
                        outflow=SuppliedControl(float(rng.uniform(0, 0.3))))
    dt = cfl_dt(line, 0.95)
    for _ in range(200):
        line = step(line, dt)
        assert np.all(line.rho >= 0.0)
        assert np.all(line.rho <= 1.0)


def test_mass_conservation_thousand_steps():
    rng = np.random.default_rng(42)
    n = 50
    line = uniform_line(n, lambda xi: rng.uniform(0, 1, n),
                        d_in=0.21, outflow=SuppliedControl(0.13))
    m0 = line.vehicle_count()
    dt = cfl_dt(line, 0.9)
    boundary_integral = 0.0
    for _ in range(1000):
        f_in, f_out = boundary_fluxes(line)
        boundary_integral += dt * (f_in - f_out)
        line = step(line, dt)
    assert abs(line.vehicle_count() - m0 - boundary_integral) < 1e-10 * max(m0, 1.0)


def test_dam_break_converges_to_rarefaction():
    errs = []
    for n in (100, 200):
        line = uniform_line(n, lambda xi: np.where(xi < 0, 1.0, 0.0),
                            d_in=0.0, outflow=SuppliedControl(0.0))
        fin = run(line, 0.5, cfl=0.9)
        edges = -1.0 + np.arange(n + 1) * (2.0 / n)
        exact = rarefaction_cell_averages(edges, 0.5)
        errs.append(np.sum(np.abs(fin.rho - exact)) * (2.0 / n))
    order = np.log2(errs[0] / errs[1])
    assert 0.6 <= order <= 1.1


def test_stationary_shock_and_front_drift():
    n = 200
    line = uniform_line(n, lambda xi: np.where(xi < 0, 0.2, 0.8),
                        d_in=greenshields_flux(0.2, UNIT_FD), outflow=GhostCell())
    i0 = shock_front_index(line.rho)
    dt = cfl_dt(line, 0.9)
    for _ in range(1000):
        line = step(line, dt)
    edges = -1.0 + np.arange(n + 1) * (2.0 / n)
    exact = stationary_shock_profile(edges)
    assert np.sum(np.abs(line.rho - exact)) * (2.0 / n) < 1e-12
    assert abs(shock_front_index(line.rho) - i0) < 2


def test_run_horizon_zero_is_identity():
    line = uniform_line(10, 0.4)
    assert run(line, 0.0) is line


def test_run_halves_compose_exactly():
    # dxi = 0.25, v_max = 1, cfl = 1 -> dt = 0.25 is binary-exact and
    # divides both half-horizons
    line = uniform_line(8, lambda xi: 0.2 + 0.05 * np.arange(8), d_in=0.1,
                        outflow=SuppliedControl(0.12), length=2.0, x0=0.0)
    once = run(line, 8.0, cfl=1.0)
    half = run(line, 4.0, cfl=1.0)
    twice = run(half, 4.0, cfl=1.0)
    assert np.array_equal(once.rho, twice.rho)
    assert once.time == twice.time == 8.0


def test_run_observer_cadence_and_times():
    line = uniform_line(8, 0.3, d_in=0.1, outflow=SuppliedControl(0.1),
                        length=2.0, x0=0.0)
    seen = []
    run(line, 2.0, cfl=1.0, observer=lambda t, s: seen.append(t), observe_every=2)
    assert len(seen) == 4  # dt = 0.25 -> 8 steps, every 2nd
    seen_t = []
    run(line, 2.0, cfl=1.0, observer=lambda t, s: seen_t.append(t),
        observe_times=[0.5, 1.0, 2.0])
    assert seen_t == [0.5, 1.0, 2.0]


def test_run_freeze_fast_forward_replays_observations():
    line = uniform_line(8, 1.0, d_in=0.25, outflow=GhostCell(), length=2.0, x0=0.0)
    seen = []
    fin = run(line, 100.0, cfl=1.0, observer=lambda t, s: seen.append((t, s.rho.copy())),
              observe_times=np.linspace(10.0, 100.0, 10), freeze_tol=1e-14)
    assert fin.time == 100.0
    assert len(seen) == 10
    assert all(np.array_equal(r, line.rho) for _, r in seen)


def test_line_from_path_resamples_linearly():
    xi = np.linspace(0.0, 100.0, 21)
    pts = np.column_stack([xi, np.zeros_like(xi)])
    path = EtaPath(eta=3.0, points=pts, xi=xi,
                   rho_max_bar=0.01 + 0.001 * xi, v_max_bar=10.0 + 0.1 * xi,
                   phi_max_bar=(10.0 + 0.1 * xi) * (0.01 + 0.001 * xi) / 4)
    line = line_from_path(path, 10)
    assert line.n_cells == 10
    assert line.dxi == pytest.approx(10.0)
    centers = 5.0 + 10.0 * np.arange(10)
    assert np.allclose(line.xi, centers)
    assert np.allclose(line.fd.v_max, 10.0 + 0.1 * centers)
    assert np.allclose(line.fd.rho_max, 0.01 + 0.001 * centers)
    assert line.eta == 3.0


def test_line_from_path_requires_rescaled_data():
    path = EtaPath(eta=0.0, points=np.zeros((3, 2)), xi=np.arange(3.0))
    with pytest.raises(ValidationError, match="rescale"):
        line_from_path(path, 5)


def test_single_cell_ghost_outflow_falls_back_to_demand():
    fd = FdParams(np.array([1.0]), np.array([1.0]))
    state = LineState(eta=0.0, xi=np.array([0.5]), dxi=1.0, fd=fd,
                      rho=np.array([0.3]), inflow_demand=0.0, outflow=GhostCell())
    f = all_fluxes(state)
    assert f[-1] == pytest.approx(greenshields_flux(0.3, UNIT_FD))
