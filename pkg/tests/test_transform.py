import numpy as np
import pytest

from gridflow.errors import NumericalError, ScalingResidualError, ValidationError
from gridflow.fields import ContinuumFields, DirectionField, GridSpec, ScalarField
from gridflow.transform import (CurvilinearAtlas, EtaPath, ScalingFields,
                                chart_potentials, chart_residuals, inflow_boundary,
                                integrate_potential, load_atlas, mixed_partial_residual,
                                rescale_line_data, save_atlas, scaling_residuals,
                                solve_scaling_fields, trace_eta_paths)


def unit_square_field(theta_value, n=24):
    g = GridSpec(n, n, 1.0 / n, 1.0 / n, (0.0, 0.0))
    return DirectionField(g, np.full((n, n), float(theta_value)))


def test_identity_chart_is_exact():
    th = unit_square_field(0.0)
    sc = solve_scaling_fields(th)
    assert np.all(sc.alpha.values == 1.0)
    assert np.all(sc.beta.values == 1.0)
    atlas = trace_eta_paths(th, sc, 5, step=0.02)
    assert len(atlas.paths) == 5
    for p in atlas.paths:
        assert np.allclose(p.xi, p.points[:, 0], atol=1e-12)
        assert np.allclose(p.points[:, 1], p.eta, atol=1e-12)
        assert p.points[-1, 0] == pytest.approx(1.0, abs=1e-12)


def test_constant_angle_gives_unit_scalings_and_diagonal_paths():
    th = unit_square_field(np.pi / 4)
    sc = solve_scaling_fields(th)
    assert np.allclose(sc.alpha.values, 1.0, atol=1e-12)
    assert np.allclose(sc.beta.values, 1.0, atol=1e-12)
    atlas = trace_eta_paths(th, sc, 7, step=0.02)
    for p in atlas.paths:
        seg = np.diff(p.points, axis=0)
        ang = np.arctan2(seg[:, 1], seg[:, 0])
        assert np.allclose(ang, np.pi / 4, atol=1e-9)
        # xi accumulates alpha * arclength = plain arclength here
        arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(seg, axis=1))])
        assert np.allclose(p.xi, arc, atol=1e-12)


def test_synthetic_shear_residual_below_tolerance():
    # theta = c*y with small c: the solved fields must satisfy both
    # transport equations with residual < 1e-3 of the gradient magnitude
    n = 96
    g = GridSpec(n, n, 1.0 / n, 1.0 / n, (0.0, 0.0))
    y = np.broadcast_to(g.y_centers[None, :], (n, n))
    th = DirectionField(g, 0.2 * y)
    sc = solve_scaling_fields(th)
    _, _, rel = scaling_residuals(th, sc)
    assert rel < 1e-3


def test_solver_reports_residual_failure():
    n = 40
    g = GridSpec(n, n, 1.0 / n, 1.0 / n, (0.0, 0.0))
    x = np.broadcast_to(g.x_centers[:, None], (n, n))
    y = np.broadcast_to(g.y_centers[None, :], (n, n))
    th = DirectionField(g, 0.6 * np.sin(7 * np.pi * x) * np.sin(7 * np.pi * y))
    with pytest.raises(ScalingResidualError) as err:
        solve_scaling_fields(th, residual_rtol=1e-4)
    assert err.value.residual_alpha is not None
    assert err.value.residual_alpha.shape == (n, n)


def test_scaling_bounds_are_hard_errors():
    g = GridSpec(4, 4, 1.0, 1.0)
    ones = ScalarField(g, np.ones((4, 4)))
    bad = ScalarField(g, np.full((4, 4), 2e3))
    with pytest.raises(NumericalError, match="bounds"):
        ScalingFields(alpha=bad, beta=ones)


def test_inflow_boundary_orientation():
    th = unit_square_field(np.pi / 4)
    sc = solve_scaling_fields(th)
    pts, eta = inflow_boundary(th, sc)
    assert np.all(np.diff(eta) > 0)
    assert eta[0] == 0.0
    # NE flow enters through bottom and left edges only
    on_bottom = np.isclose(pts[:, 1], 0.0)
    on_left = np.isclose(pts[:, 0], 0.0)
    assert np.all(on_bottom | on_left)
    # oriented from the bottom-right end towards the top-left end
    assert pts[0, 0] == pytest.approx(1.0)
    assert pts[-1, 1] == pytest.approx(1.0)
    # for theta == 0 only the left edge is inflow (bottom has n.d == 0)
    th0 = unit_square_field(0.0)
    pts0, eta0 = inflow_boundary(th0, None)
    assert np.all(np.isclose(pts0[:, 0], 0.0))
    assert eta0[-1] == pytest.approx(1.0)


def test_eta_labels_strictly_increasing(bench):
    etas = [p.eta for p in bench.atlas.paths]
    assert all(b > a for a, b in zip(etas, etas[1:]))
    with pytest.raises(ValidationError, match="strictly increasing"):
        CurvilinearAtlas(paths=[bench.atlas.paths[1], bench.atlas.paths[0]],
                         scaling=bench.scaling, grid=bench.atlas.grid,
                         eta_spacing=bench.atlas.eta_spacing)


def test_benchmark_paths_follow_direction_field(bench):
    th = bench.fields.theta
    worst = 0.0
    for p in bench.atlas.paths[::10]:
        seg = np.diff(p.points, axis=0)
        ang = np.arctan2(seg[:, 1], seg[:, 0])
        vecs, _ = th.sample_direction(0.5 * (p.points[:-1] + p.points[1:]))
        ref = np.arctan2(vecs[:, 1], vecs[:, 0])
        worst = max(worst, np.degrees(np.abs(ang - ref)).max())
    assert worst < 2.0


def test_benchmark_paths_inside_domain_and_monotone(bench):
    xmin, ymin, xmax, ymax = bench.atlas.grid.extent
    for p in bench.atlas.paths:
        assert np.all(np.diff(p.xi) > 0)
        assert p.points[:, 0].min() >= xmin - 1e-9
        assert p.points[:, 0].max() <= xmax + 1e-9
        assert p.points[:, 1].min() >= ymin - 1e-9
        assert p.points[:, 1].max() <= ymax + 1e-9


def test_mixed_partial_residual_detects_nonintegrable_forms():
    g = GridSpec(30, 30, 1.0 / 30, 1.0 / 30)
    x = np.broadcast_to(g.x_centers[:, None], (30, 30))
    y = np.broadcast_to(g.y_centers[None, :], (30, 30))
    # exact gradient of F = sin(x) cos(y)
    rel_exact, _ = mixed_partial_residual(np.cos(x) * np.cos(y),
                                          -np.sin(x) * np.sin(y), g.dx, g.dy)
    assert rel_exact < 1e-3
    # rotational form (-y, x) is maximally non-integrable
    rel_rot, _ = mixed_partial_residual(-y, x, g.dx, g.dy)
    assert rel_rot > 1.0


def test_integrate_potential_recovers_gradient():
    g = GridSpec(25, 20, 0.04, 0.05)
    x = np.broadcast_to(g.x_centers[:, None], (25, 20))
    y = np.broadcast_to(g.y_centers[None, :], (25, 20))
    f = np.sin(x) * np.cos(2 * y)
    u = integrate_potential(np.cos(x) * np.cos(2 * y), -2 * np.sin(x) * np.sin(2 * y), g)
    ref = f - f[0, 0]
    assert np.abs(u.values - ref).max() < 1e-3


def test_chart_potentials_identity():
    th = unit_square_field(0.0)
    sc = solve_scaling_fields(th)
    xi, eta = chart_potentials(th, sc)
    g = th.grid
    x = np.broadcast_to(g.x_centers[:, None], (g.nx, g.ny))
    y = np.broadcast_to(g.y_centers[None, :], (g.nx, g.ny))
    assert np.abs(xi.values - (x - x[0, 0])).max() < 1e-10
    assert np.abs(eta.values - (y - y[0, 0])).max() < 1e-10


def test_rescale_line_data_identity_and_scaling(bench):
    g = GridSpec(10, 10, 10.0, 10.0)
    ones = ScalarField(g, np.ones((10, 10)))
    two = ScalarField(g, np.full((10, 10), 2.0))
    theta = DirectionField(g, np.zeros((10, 10)))
    fields = ContinuumFields(theta, ScalarField(g, np.full((10, 10), 0.04)),
                             ScalarField(g, np.full((10, 10), 10.0)))
    pts = np.column_stack([np.linspace(10, 80, 6), np.full(6, 50.0)])
    path = EtaPath(eta=0.0, points=pts, xi=np.linspace(0, 70, 6))
    ident = rescale_line_data(path, fields, ScalingFields(ones, ones))
    assert np.allclose(ident.rho_max_bar, 0.04)
    assert np.allclose(ident.v_max_bar, 10.0)
    assert np.allclose(ident.phi_max_bar, 0.1)
    scaled = rescale_line_data(path, fields, ScalingFields(two, ones))
    assert np.allclose(scaled.v_max_bar, 20.0)
    assert np.allclose(scaled.rho_max_bar, 0.02)
    # capacity identity phi = v*rho/4 holds at every sample to round-off
    for p in bench.atlas.paths[::20]:
        assert np.all(np.abs(p.phi_max_bar - p.v_max_bar * p.rho_max_bar / 4.0)
                      <= 1e-12 * p.phi_max_bar)


def test_atlas_roundtrip_exact(tmp_path, bench):
    p = tmp_path / "atlas.txt"
    save_atlas(bench.atlas, p)
    back = load_atlas(p, bench.scaling, bench.atlas.grid)
    assert back.eta_spacing == bench.atlas.eta_spacing
    assert len(back.paths) == len(bench.atlas.paths)
    for a, b in zip(bench.atlas.paths, back.paths):
        assert a.eta == b.eta
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.xi, b.xi)
        assert np.array_equal(a.rho_max_bar, b.rho_max_bar)
        assert np.array_equal(a.phi_max_bar, b.phi_max_bar)


def test_benchmark_chart_residuals(bench):
    rel_xi, rel_eta = chart_residuals(bench.atlas, bench.fields.theta)
    assert rel_xi < 1e-2
    assert rel_eta < 1e-2
