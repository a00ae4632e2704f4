"""Curvilinear chart construction: scaling fields, streamline atlas, rescaling.

Maps the curved integral curves of a direction field theta(x,y) onto
straight parallel lines. The chart (xi, eta) is defined differentially by

    d(xi)  = alpha * ( cos(theta) dx + sin(theta) dy)
    d(eta) = beta  * (-sin(theta) dx + cos(theta) dy)

i.e. a rotation by theta followed by a diagonal scaling diag(alpha, beta).
For (xi, eta) to be well-defined coordinates (integrable one-forms), the
log-scalings must satisfy two linear transport equations:

    d(ln alpha)/dn = cos(theta) theta_x + sin(theta) theta_y
    d(ln beta)/ds  = sin(theta) theta_x - cos(theta) theta_y

where s-curves are streamlines (tangent (cos theta, sin theta)) and
n-curves their left-orthogonal companions (-sin theta, cos theta). Both
equations are integrated exactly along their own characteristics with a
4th-order Runge-Kutta tracer and trapezoidal quadrature of the right-hand
side, anchored at ln = 0 on the boundary where each characteristic family
enters the domain. For constant theta both right-hand sides vanish and
alpha = beta = 1 exactly: the chart degenerates to a rigid rotation.

Streamlines of the flow then become the eta-paths: each is traced from the
inflow boundary, xi accumulates alpha * arclength along it, and the eta
label is the beta-weighted arclength of the seed's position along the
inflow front, so path spacing is uniform in the transformed metric.

Atlas file schema (version 1, plain text):

    # gridflow atlas v1
    paths <count> eta_spacing <float>
    path <eta> <n_samples> <rescaled 0|1>
    <x> <y> <xi> [<rho_max_bar> <v_max_bar>]     (one line per sample)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import NumericalError, ScalingResidualError, StagnationError, ValidationError
from .fields import ContinuumFields, DirectionField, GridSpec, ScalarField, _bilinear

SCALING_BOUNDS = (1e-3, 1e3)


@dataclass
class ScalingFields:
    alpha: ScalarField
    beta: ScalarField

    def __post_init__(self):
        if self.alpha.grid != self.beta.grid:
            raise ValidationError("alpha and beta must share one grid")
        lo, hi = SCALING_BOUNDS
        for name, f in (("alpha", self.alpha), ("beta", self.beta)):
            if np.any(f.values < lo) or np.any(f.values > hi):
                raise NumericalError(
                    f"scaling field {name} leaves bounds [{lo}, {hi}]: "
                    f"range [{f.values.min():.3g}, {f.values.max():.3g}]"
                )

    @property
    def grid(self):
        return self.alpha.grid


@dataclass
class EtaPath:
    """One traced streamline with its 1D problem data.

    ``xi`` is strictly increasing along the sample list; the rescaled
    arrays are attached by :func:`rescale_line_data` and stay ``None``
    until then.
    """

    eta: float
    points: np.ndarray  # (n, 2)
    xi: np.ndarray  # (n,)
    rho_max_bar: np.ndarray | None = None
    v_max_bar: np.ndarray | None = None
    phi_max_bar: np.ndarray | None = None

    @property
    def xi_min(self):
        return float(self.xi[0])

    @property
    def xi_max(self):
        return float(self.xi[-1])


@dataclass
class CurvilinearAtlas:
    paths: list
    scaling: ScalingFields
    grid: GridSpec
    eta_spacing: float

    def __post_init__(self):
        etas = [p.eta for p in self.paths]
        if any(b <= a for a, b in zip(etas, etas[1:])):
            raise ValidationError("eta labels must be strictly increasing across paths")


def theta_gradients(theta: DirectionField):
    """(theta_x, theta_y) grids, wrap-safe.

    Differentiates through (cos, sin) instead of the wrapped angle:
    d(theta) = cos * d(sin) - sin * d(cos).
    """
    c, s = theta.cos, theta.sin
    g = theta.grid
    tx = c * np.gradient(s, g.dx, axis=0) - s * np.gradient(c, g.dx, axis=0)
    ty = c * np.gradient(s, g.dy, axis=1) - s * np.gradient(c, g.dy, axis=1)
    return tx, ty


def _trace_batch(vec_fn, starts, step, rect, g_grids=(), max_steps=100000, record=False):
    """Trace x' = vec_fn(x) from each start until it exits ``rect``.

    ``vec_fn(points) -> (unit vectors (N,2), raw interpolation norm (N,))``.
    ``g_grids`` are (GridSpec, values) pairs whose line integrals (w.r.t.
    arc length, trapezoidal) are accumulated along each trajectory.

    Returns (endpoints, arclength, accumulators (N, len(g_grids)),
    paths) where ``paths`` is a list of (n_i, 2) arrays when ``record``.
    """
    xmin, ymin, xmax, ymax = rect
    x = np.array(starts, dtype=float)
    n = len(x)
    acc = np.zeros((n, len(g_grids)))
    arclen = np.zeros(n)
    active = np.arange(n)
    rec_pts = [[x[i].copy()] for i in range(n)] if record else None
    rec_acc = [[acc[i].copy()] for i in range(n)] if record else None

    def g_eval(pts):
        if not g_grids:
            return np.zeros((len(pts), 0))
        return np.column_stack([_bilinear(gr, val, pts) for gr, val in g_grids])

    def rk4(p, h):
        v1, r1 = vec_fn(p)
        if np.any(r1 < 1e-8):
            bad = active[np.flatnonzero(r1 < 1e-8)[0]]
            raise StagnationError(f"direction field vanishes along trajectory of seed {bad}")
        v2, _ = vec_fn(p + 0.5 * h[:, None] * v1)
        v3, _ = vec_fn(p + 0.5 * h[:, None] * v2)
        v4, _ = vec_fn(p + h[:, None] * v3)
        return p + (h[:, None] / 6.0) * (v1 + 2 * v2 + 2 * v3 + v4)

    def exit_fraction(p, q):
        """Largest f in [0,1] keeping p + f*(q-p) inside rect."""
        d = q - p
        f = np.ones(len(p))
        with np.errstate(divide="ignore", invalid="ignore"):
            for k, (lo, hi) in enumerate(((xmin, xmax), (ymin, ymax))):
                fk = np.where(q[:, k] > hi, (hi - p[:, k]) / d[:, k], np.inf)
                f = np.minimum(f, np.where(np.isfinite(fk), fk, np.inf))
                fk = np.where(q[:, k] < lo, (lo - p[:, k]) / d[:, k], np.inf)
                f = np.minimum(f, np.where(np.isfinite(fk), fk, np.inf))
        return np.clip(f, 0.0, 1.0)

    g_here = g_eval(x)
    for _ in range(max_steps):
        if len(active) == 0:
            break
        p = x[active]
        h = np.full(len(active), step)
        q = rk4(p, h)
        outside = ((q[:, 0] < xmin) | (q[:, 0] > xmax)
                   | (q[:, 1] < ymin) | (q[:, 1] > ymax))
        if np.any(outside):
            f = exit_fraction(p[outside], q[outside])
            h2 = h[outside] * f
            q2 = rk4(p[outside], h2)
            q2[:, 0] = np.clip(q2[:, 0], xmin, xmax)
            q2[:, 1] = np.clip(q2[:, 1], ymin, ymax)
            q[outside] = q2
        ds = np.linalg.norm(q - p, axis=1)
        g_next = g_eval(q)
        acc[active] += 0.5 * (g_here[active] + g_next) * ds[:, None]
        arclen[active] += ds
        x[active] = q
        g_here[active] = g_next
        if record:
            for row, i in enumerate(active):
                rec_pts[i].append(q[row].copy())
                rec_acc[i].append(acc[i].copy())
        done = outside | (ds < 1e-12 * step)
        active = active[~done]
    if len(active):
        raise StagnationError(
            f"{len(active)} trajectories still inside the domain after {max_steps} steps "
            f"(closed orbit or stagnation); first stuck seed index {int(active[0])}"
        )
    return x, arclen, acc, ([np.array(r) for r in rec_pts] if record else None, rec_acc)


def _directional_derivative_matrix(grid: GridSpec, ax, ay):
    """Sparse operator for a*d/dx + b*d/dy, centered inside, one-sided (2nd order) at edges."""
    nx, ny = grid.nx, grid.ny
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    rows, cols, vals = [], [], []

    def add(rr, cc, ww):
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        vals.append(ww.ravel())

    ax = np.asarray(ax)
    ay = np.asarray(ay)
    # d/dx
    r = idx[1:-1, :]
    w = ax[1:-1, :] / (2 * grid.dx)
    add(r, idx[2:, :], w)
    add(r, idx[:-2, :], -w)
    for edge, sgn in ((0, 1.0), (nx - 1, -1.0)):
        r = idx[edge, :]
        w = sgn * ax[edge, :] / (2 * grid.dx)
        k = int(edge == 0) * 2 - 1  # +1 inward at left edge, -1 at right
        add(r, idx[edge, :], -3.0 * w)
        add(r, idx[edge + k, :], 4.0 * w)
        add(r, idx[edge + 2 * k, :], -1.0 * w)
    # d/dy
    r = idx[:, 1:-1]
    w = ay[:, 1:-1] / (2 * grid.dy)
    add(r, idx[:, 2:], w)
    add(r, idx[:, :-2], -w)
    for edge, sgn in ((0, 1.0), (ny - 1, -1.0)):
        r = idx[:, edge]
        w = sgn * ay[:, edge] / (2 * grid.dy)
        k = int(edge == 0) * 2 - 1
        add(r, idx[:, edge], -3.0 * w)
        add(r, idx[:, edge + k], 4.0 * w)
        add(r, idx[:, edge + 2 * k], -1.0 * w)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _solve_transport(grid: GridSpec, ax, ay, rhs, smoothing: float):
    """Least-squares solution of a*u_x + b*u_y = rhs with u = 0 where (a,b) enters.

    The transport equation fixes u only up to one constant per
    characteristic; anchoring the inflow rim of the (a,b) field pins each
    characteristic once, and a small Laplacian penalty (weight
    ``smoothing``) selects the smooth representative, which is what makes
    the resulting one-form integrable in practice.
    """
    nx, ny = grid.nx, grid.ny
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    d = _directional_derivative_matrix(grid, ax, ay)

    tol = 1e-12
    anchors = []
    anchors.append(idx[0, :][ax[0, :] > tol])
    anchors.append(idx[-1, :][ax[-1, :] < -tol])
    anchors.append(idx[:, 0][ay[:, 0] > tol])
    anchors.append(idx[:, -1][ay[:, -1] < -tol])
    anchors = np.unique(np.concatenate(anchors))
    if len(anchors) == 0:
        anchors = np.array([0])  # degenerate field: fix the gauge anyway
    a_rows = scipy.sparse.csr_matrix(
        (np.ones(len(anchors)), (np.arange(len(anchors)), anchors)), shape=(len(anchors), n)
    )

    # dimensionless 5-point Laplacian on interior cells
    ii = idx[1:-1, 1:-1].ravel()
    lr = np.repeat(np.arange(len(ii)), 5)
    lc = np.column_stack([ii, ii - ny, ii + ny, ii - 1, ii + 1]).ravel()
    lv = np.tile(np.array([-4.0, 1.0, 1.0, 1.0, 1.0]) * smoothing, len(ii))
    l_rows = scipy.sparse.csr_matrix((lv, (lr, lc)), shape=(len(ii), n))

    a = scipy.sparse.vstack([d, a_rows, l_rows]).tocsr()
    b = np.concatenate([np.asarray(rhs).ravel(), np.zeros(len(anchors)), np.zeros(len(ii))])
    ata = (a.T @ a).tocsc()
    atb = a.T @ b
    u = scipy.sparse.linalg.spsolve(ata, atb)
    return u.reshape(nx, ny)


def solve_scaling_fields(theta: DirectionField, step: float | None = None,
                         residual_rtol: float = 0.05,
                         smoothing: float = 3e-4) -> ScalingFields:
    """Solve the two scaling transport equations on the grid.

    Both equations are linear advection of a log-scaling with a geometric
    source; they are solved as one sparse least-squares problem each
    (directional-derivative stencil + inflow anchors + smoothness gauge,
    see _solve_transport). For constant theta the right-hand sides vanish
    and the solution is exactly alpha = beta = 1.

    The solved fields are checked a posteriori against the PDEs with an
    independent finite-difference stencil; a relative residual above
    ``residual_rtol`` raises ScalingResidualError carrying the fields.
    ``step`` is accepted for interface symmetry with the path tracer but
    the solve is grid-based and ignores it.
    """
    del step
    g = theta.grid
    tx, ty = theta_gradients(theta)
    c, s = theta.cos, theta.sin
    ln_alpha = _solve_transport(g, -s, c, c * tx + s * ty, smoothing)
    ln_beta = _solve_transport(g, c, s, s * tx - c * ty, smoothing)
    scaling = ScalingFields(ScalarField(g, np.exp(ln_alpha)), ScalarField(g, np.exp(ln_beta)))

    res_a, res_b, rel = scaling_residuals(theta, scaling)
    if rel > residual_rtol:
        raise ScalingResidualError(
            f"scaling PDE residual {rel:.3g} above tolerance {residual_rtol:.3g}",
            residual_alpha=res_a, residual_beta=res_b,
        )
    return scaling


def scaling_residuals(theta: DirectionField, scaling: ScalingFields):
    """Finite-difference PDE residuals of the solved scaling fields.

    Returns (residual_alpha, residual_beta, rel) where rel is the joint
    interior L2 residual relative to the right-hand-side magnitude.
    """
    g = theta.grid
    tx, ty = theta_gradients(theta)
    c, s = theta.cos, theta.sin
    la = np.log(scaling.alpha.values)
    lb = np.log(scaling.beta.values)
    res_a = (-s * np.gradient(la, g.dx, axis=0) + c * np.gradient(la, g.dy, axis=1)
             - (c * tx + s * ty))
    res_b = (c * np.gradient(lb, g.dx, axis=0) + s * np.gradient(lb, g.dy, axis=1)
             - (s * tx - c * ty))
    inner = np.s_[1:-1, 1:-1]
    rhs_norm = np.sqrt(np.mean((c * tx + s * ty)[inner] ** 2)
                       + np.mean((s * tx - c * ty)[inner] ** 2))
    res_norm = np.sqrt(np.mean(res_a[inner] ** 2) + np.mean(res_b[inner] ** 2))
    rel = res_norm / max(rhs_norm, 1e-14)
    return res_a, res_b, float(rel)


def inflow_boundary(theta: DirectionField, scaling: ScalingFields | None = None,
                    sample_step: float | None = None):
    """The inflow part of the domain boundary with its eta parametrization.

    Inflow points are boundary points whose inward normal has positive dot
    product with the direction field. The returned polyline is oriented so
    that eta (the beta-weighted transverse arclength) increases along it.

    Returns (points (M,2), eta (M,)) with eta strictly increasing from 0.
    """
    g = theta.grid
    if sample_step is None:
        sample_step = 0.5 * min(g.dx, g.dy)
    xmin, ymin, xmax, ymax = g.extent
    sides = [
        ((xmin, ymin), (xmax, ymin), (0.0, 1.0)),
        ((xmax, ymin), (xmax, ymax), (-1.0, 0.0)),
        ((xmax, ymax), (xmin, ymax), (0.0, -1.0)),
        ((xmin, ymax), (xmin, ymin), (1.0, 0.0)),
    ]
    pts = []
    normals = []
    for a, b, nrm in sides:
        a = np.array(a)
        b = np.array(b)
        length = np.linalg.norm(b - a)
        m = max(2, int(np.ceil(length / sample_step)) + 1)
        # corners appear once per incident side; the zero-length joint
        # segments are dropped later with the eta-increment filter
        t = np.linspace(0.0, 1.0, m)
        pts.append(a + t[:, None] * (b - a))
        normals.append(np.tile(nrm, (len(t), 1)))
    pts = np.vstack(pts)
    normals = np.vstack(normals)
    d, _ = theta.sample_direction(pts)
    mask = np.einsum("ij,ij->i", normals, d) > 1e-9
    if not np.any(mask):
        raise ValidationError("no inflow boundary: direction field never points inward")

    m = len(mask)
    runs = []
    idx = np.flatnonzero(mask)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    pieces = np.split(idx, breaks + 1)
    # merge the wrap-around pair into one run
    if len(pieces) > 1 and pieces[0][0] == 0 and pieces[-1][-1] == m - 1:
        pieces = [np.concatenate([pieces[-1], pieces[0]])] + pieces[1:-1]
    runs = pieces

    beta_vals = scaling.beta.values if scaling is not None else np.ones((g.nx, g.ny))

    def eta_increments(p):
        b = _bilinear(g, beta_vals, p)
        dvec, _ = theta.sample_direction(p)
        f = b[:, None] * np.column_stack([-dvec[:, 1], dvec[:, 0]])
        seg = np.diff(p, axis=0)
        return 0.5 * np.einsum("ij,ij->i", f[:-1] + f[1:], seg)

    out_pts = []
    out_eta = []
    offset = 0.0
    for run in runs:
        p = pts[run]
        if len(p) < 2:
            continue
        inc = eta_increments(p)
        if inc.sum() < 0:
            p = p[::-1]
            inc = eta_increments(p)
        eta = offset + np.concatenate([[0.0], np.cumsum(inc)])
        keep = np.concatenate([[True], np.diff(eta) > 0])
        out_pts.append(p[keep])
        out_eta.append(eta[keep])
        offset = out_eta[-1][-1]
    points = np.vstack(out_pts)
    eta = np.concatenate(out_eta)
    return points, eta


def trace_eta_paths(theta: DirectionField, scaling: ScalingFields, n_paths: int,
                    step: float | None = None) -> CurvilinearAtlas:
    """Trace the family of eta-paths seeding the inflow boundary uniformly in eta.

    Each path integrates the direction field with fixed-step RK4 until it
    exits the domain; xi accumulates alpha * arclength. Paths that exit
    almost immediately are dropped with a warning.
    """
    if n_paths < 1:
        raise ValidationError(f"n_paths must be >= 1, got {n_paths}")
    g = theta.grid
    if step is None:
        step = 0.5 * min(g.dx, g.dy)
    if step <= 0:
        raise ValidationError(f"trace step must be positive, got {step}")
    front_pts, front_eta = inflow_boundary(theta, scaling)
    total = front_eta[-1]
    targets = (np.arange(n_paths) + 0.5) * total / n_paths
    sx = np.interp(targets, front_eta, front_pts[:, 0])
    sy = np.interp(targets, front_eta, front_pts[:, 1])
    seeds = np.column_stack([sx, sy])

    rect = g.extent
    diag = np.hypot(rect[2] - rect[0], rect[3] - rect[1])

    def vec(pts):
        return theta.sample_direction(pts)

    _, _, _, (paths_pts, paths_acc) = _trace_batch(
        vec, seeds, step, rect, g_grids=[(g, scaling.alpha.values)],
        max_steps=int(40 * diag / step), record=True,
    )
    paths = []
    for k in range(n_paths):
        pts = np.asarray(paths_pts[k])
        xi = np.asarray(paths_acc[k])[:, 0]
        if len(pts) < 3:
            warnings.warn(f"eta path {k} (eta={targets[k]:.6g}) exits immediately; dropped")
            continue
        keep = np.concatenate([[True], np.diff(xi) > 0])
        paths.append(EtaPath(eta=float(targets[k]), points=pts[keep], xi=xi[keep]))
    if not paths:
        raise ValidationError("all eta paths exited immediately; check the direction field")
    return CurvilinearAtlas(paths=paths, scaling=scaling, grid=g,
                            eta_spacing=float(total / n_paths))


def rescale_line_data(path: EtaPath, fields: ContinuumFields,
                      scaling: ScalingFields) -> EtaPath:
    """Attach the rescaled 1D flow parameters along one path.

    rho_max_bar = rho_max / (alpha beta), v_max_bar = v_max * alpha,
    phi_max_bar = phi_max / beta; the parabolic-FD identity
    phi_max_bar = v_max_bar * rho_max_bar / 4 is verified to round-off.
    """
    a = scaling.alpha.sample(path.points)
    b = scaling.beta.sample(path.points)
    rho = fields.rho_max.sample(path.points)
    v = fields.v_max.sample(path.points)
    rho_bar = rho / (a * b)
    v_bar = v * a
    phi_bar = v_bar * rho_bar / 4.0
    if np.any(rho_bar <= 0) or np.any(v_bar <= 0) or np.any(phi_bar <= 0):
        raise ValidationError(f"non-positive rescaled quantity on path eta={path.eta:.6g}")
    err = np.abs(phi_bar - (v * rho / 4.0) / b)
    if np.any(err > 1e-12 * phi_bar):
        raise ValidationError("rescaled capacity identity violated beyond round-off")
    return replace(path, rho_max_bar=rho_bar, v_max_bar=v_bar, phi_max_bar=phi_bar)


def mixed_partial_residual(p_grid, q_grid, dx, dy, trim=1):
    """Integrability defect of the one-form P dx + Q dy on a grid.

    Cross-differentiates the given first-derivative fields and compares:
    residual = d(P)/dy - d(Q)/dx, which vanishes iff the form is exact.
    Returns (rel, residual_field) with rel the L2 residual over the
    trimmed interior relative to the larger cross-derivative magnitude.
    """
    py = np.gradient(p_grid, dy, axis=1)
    qx = np.gradient(q_grid, dx, axis=0)
    r = py - qx
    sl = np.s_[trim:-trim, trim:-trim] if trim else np.s_[:, :]
    scale = max(np.sqrt(np.mean(py[sl] ** 2)), np.sqrt(np.mean(qx[sl] ** 2)), 1e-14)
    rel = np.sqrt(np.mean(r[sl] ** 2)) / scale
    return float(rel), r


def chart_residuals(atlas: CurvilinearAtlas, theta: DirectionField):
    """Mixed-partial integrability residuals of the xi and eta charts."""
    a = atlas.scaling.alpha.values
    b = atlas.scaling.beta.values
    c, s = theta.cos, theta.sin
    g = atlas.grid
    rel_xi, _ = mixed_partial_residual(a * c, a * s, g.dx, g.dy)
    rel_eta, _ = mixed_partial_residual(-b * s, b * c, g.dx, g.dy)
    return rel_xi, rel_eta


def integrate_potential(p_grid, q_grid, grid: GridSpec) -> ScalarField:
    """Least-squares potential u with grad(u) ~ (P, Q), gauge u[0,0] = 0.

    A discrete Poisson solve: forward differences between neighbor cells
    are matched to edge-midpoint averages of P and Q. The chart fields
    xi(x,y), eta(x,y) accumulated on the grid are its main use.
    """
    nx, ny = grid.nx, grid.ny
    n = nx * ny

    def uid(ix, iy):
        return ix * ny + iy

    rows, cols, vals, rhs = [], [], [], []
    eq = 0
    for ix in range(nx - 1):
        for iy in range(ny):
            rows += [eq, eq]
            cols += [uid(ix + 1, iy), uid(ix, iy)]
            vals += [1.0 / grid.dx, -1.0 / grid.dx]
            rhs.append(0.5 * (p_grid[ix + 1, iy] + p_grid[ix, iy]))
            eq += 1
    for ix in range(nx):
        for iy in range(ny - 1):
            rows += [eq, eq]
            cols += [uid(ix, iy + 1), uid(ix, iy)]
            vals += [1.0 / grid.dy, -1.0 / grid.dy]
            rhs.append(0.5 * (q_grid[ix, iy + 1] + q_grid[ix, iy]))
            eq += 1
    rows.append(eq)
    cols.append(uid(0, 0))
    vals.append(1.0)
    rhs.append(0.0)
    eq += 1
    a = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(eq, n))
    ata = (a.T @ a).tocsc()
    atb = a.T @ np.asarray(rhs)
    u = scipy.sparse.linalg.spsolve(ata, atb).reshape(nx, ny)
    return ScalarField(grid, u - u[0, 0])


def chart_potentials(theta: DirectionField, scaling: ScalingFields):
    """Grid rasters of the chart coordinates xi(x,y) and eta(x,y)."""
    a = scaling.alpha.values
    b = scaling.beta.values
    c, s = theta.cos, theta.sin
    g = theta.grid
    xi = integrate_potential(a * c, a * s, g)
    eta = integrate_potential(-b * s, b * c, g)
    return xi, eta


def save_atlas(atlas: CurvilinearAtlas, path) -> None:
    with open(path, "w") as fh:
        fh.write("# gridflow atlas v1\n")
        fh.write(f"paths {len(atlas.paths)} eta_spacing {float(atlas.eta_spacing)!r}\n")
        for p in atlas.paths:
            rescaled = int(p.rho_max_bar is not None)
            fh.write(f"path {float(p.eta)!r} {len(p.points)} {rescaled}\n")
            for i in range(len(p.points)):
                row = f"{float(p.points[i, 0])!r} {float(p.points[i, 1])!r} {float(p.xi[i])!r}"
                if rescaled:
                    row += f" {float(p.rho_max_bar[i])!r} {float(p.v_max_bar[i])!r}"
                fh.write(row + "\n")


def load_atlas(path, scaling: ScalingFields, grid: GridSpec) -> CurvilinearAtlas:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if head[0] != "paths":
        raise ValidationError(f"bad atlas file {path}: missing 'paths' header")
    n_paths = int(head[1])
    eta_spacing = float(head[3])
    paths = []
    k = 1
    for _ in range(n_paths):
        tag, eta_s, n_s, resc_s = lines[k].split()
        if tag != "path":
            raise ValidationError(f"bad atlas file {path}: expected 'path' record")
        n = int(n_s)
        rescaled = bool(int(resc_s))
        body = np.array([ln.split() for ln in lines[k + 1:k + 1 + n]], dtype=float)
        p = EtaPath(eta=float(eta_s), points=body[:, :2], xi=body[:, 2])
        if rescaled:
            rho_bar = body[:, 3]
            v_bar = body[:, 4]
            p = replace(p, rho_max_bar=rho_bar, v_max_bar=v_bar,
                        phi_max_bar=v_bar * rho_bar / 4.0)
        paths.append(p)
        k += 1 + n
    return CurvilinearAtlas(paths=paths, scaling=scaling, grid=grid, eta_spacing=eta_spacing)
