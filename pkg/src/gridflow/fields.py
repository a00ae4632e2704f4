"""Continuum field reconstruction from a road network.

Rebuilds the three inputs of the planar conservation-law model on a
uniform cell-centered raster: flow direction theta(x,y), maximal density
rho_max(x,y) (veh/m^2) and maximal velocity v_max(x,y) (m/s).

Direction and speed use inverse-distance weighting over road segments,
weight = ((dist + reg) / reg) ** (-sensitivity) with ``dist`` the
point-to-segment distance. Dividing by ``reg`` only rescales every weight
by the same constant (IDW is invariant to that) but keeps the powers in
floating range. Direction vectors are additionally weighted by the road's
speed limit so faster roads pull the flux field harder. ``reg`` acts as
both regularizer and smoothing radius: at the domain scale the field
follows the global trend of the network instead of hugging single roads.

Raster file schema (version 1, plain text):

    # gridflow raster v1
    nx <int> ny <int>
    dx <float> dy <float>
    origin <float> <float>
    units <string>
    <ny rows of nx floats, iy ascending>

Values are cell-centered, indexed [ix, iy], written with shortest
round-trip float formatting so a save/load cycle is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .network import RoadNetwork

RHO_FLOOR = 1e-6  # veh/m^2 off-network floor so the flow model stays defined


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered raster header."""

    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValidationError(f"grid needs nx, ny >= 2, got {self.nx}x{self.ny}")
        if self.dx <= 0 or self.dy <= 0:
            raise ValidationError(f"cell size must be positive, got {self.dx}x{self.dy}")

    @property
    def x_centers(self):
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self):
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def extent(self):
        """(xmin, ymin, xmax, ymax) covered by the cells."""
        x0, y0 = self.origin
        return (x0, y0, x0 + self.nx * self.dx, y0 + self.ny * self.dy)

    def cell_centers(self):
        """All centers as an (nx*ny, 2) array, x varying fastest."""
        xx, yy = np.meshgrid(self.x_centers, self.y_centers, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def covers(self, bbox) -> bool:
        xmin, ymin, xmax, ymax = self.extent
        return xmin <= bbox[0] and ymin <= bbox[1] and xmax >= bbox[2] and ymax >= bbox[3]


def grid_for_bbox(bbox, resolution: float) -> GridSpec:
    """Smallest grid of square cells at ``resolution`` covering ``bbox``."""
    xmin, ymin, xmax, ymax = bbox
    nx = max(2, int(np.ceil((xmax - xmin) / resolution - 1e-9)))
    ny = max(2, int(np.ceil((ymax - ymin) / resolution - 1e-9)))
    return GridSpec(nx, ny, resolution, resolution, (float(xmin), float(ymin)))


@dataclass
class ScalarField:
    grid: GridSpec
    values: np.ndarray  # shape (nx, ny), [ix, iy]
    units: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValidationError(
                f"values shape {self.values.shape} does not match grid "
                f"{(self.grid.nx, self.grid.ny)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("field contains non-finite values")

    def sample(self, points):
        """Clamped bilinear interpolation at (N,2) metric points."""
        return _bilinear(self.grid, self.values, points)


@dataclass
class DirectionField:
    grid: GridSpec
    theta: np.ndarray  # radians, shape (nx, ny)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (self.grid.nx, self.grid.ny):
            raise ValidationError("theta shape does not match grid")
        if not np.all(np.isfinite(self.theta)):
            raise ValidationError("theta contains non-finite values")

    @property
    def cos(self):
        return np.cos(self.theta)

    @property
    def sin(self):
        return np.sin(self.theta)

    def sample_direction(self, points):
        """Unit direction vectors at (N,2) points.

        Interpolates the (cos, sin) components bilinearly and renormalizes;
        interpolating the wrapped angle itself would be ill-defined.
        Returns (vectors (N,2), raw_norm (N,)) where raw_norm is the
        pre-normalization magnitude (a stagnation indicator).
        """
        c = _bilinear(self.grid, np.cos(self.theta), points)
        s = _bilinear(self.grid, np.sin(self.theta), points)
        norm = np.hypot(c, s)
        safe = np.maximum(norm, 1e-300)
        return np.column_stack([c / safe, s / safe]), norm


@dataclass
class ContinuumFields:
    theta: DirectionField
    rho_max: ScalarField  # veh/m^2
    v_max: ScalarField  # m/s

    def __post_init__(self):
        if not (self.theta.grid == self.rho_max.grid == self.v_max.grid):
            raise ValidationError("continuum fields must share one grid header")
        if np.any(self.rho_max.values <= 0):
            raise ValidationError("rho_max must be strictly positive")
        if np.any(self.v_max.values <= 0):
            raise ValidationError("v_max must be strictly positive")

    @property
    def grid(self):
        return self.theta.grid

    def capacity(self) -> ScalarField:
        """phi_max = v_max * rho_max / 4 (parabolic flow-density relation)."""
        return ScalarField(self.grid, self.v_max.values * self.rho_max.values / 4.0,
                           units="veh/(m*s)")


def _bilinear(grid: GridSpec, values: np.ndarray, points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    fx = (pts[:, 0] - grid.origin[0]) / grid.dx - 0.5
    fy = (pts[:, 1] - grid.origin[1]) / grid.dy - 0.5
    fx = np.clip(fx, 0.0, grid.nx - 1.0)
    fy = np.clip(fy, 0.0, grid.ny - 1.0)
    ix = np.minimum(fx.astype(int), grid.nx - 2)
    iy = np.minimum(fy.astype(int), grid.ny - 2)
    tx = fx - ix
    ty = fy - iy
    v00 = values[ix, iy]
    v10 = values[ix + 1, iy]
    v01 = values[ix, iy + 1]
    v11 = values[ix + 1, iy + 1]
    return (v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty)
            + v01 * (1 - tx) * ty + v11 * tx * ty)


def point_segment_distance(points, segments):
    """Distances from (N,2) points to (R,2,2) segments, shape (N,R)."""
    p = np.asarray(points, dtype=float)[:, None, :]  # (N,1,2)
    a = np.asarray(segments, dtype=float)[None, :, 0, :]  # (1,R,2)
    b = np.asarray(segments, dtype=float)[None, :, 1, :]
    ab = b - a
    denom = np.maximum(np.einsum("nrk,nrk->nr", ab, ab), 1e-300)
    t = np.clip(np.einsum("nrk,nrk->nr", p - a, ab) / denom, 0.0, 1.0)
    closest = a + t[:, :, None] * ab
    return np.linalg.norm(p - closest, axis=2)


def _idw_weights(net: RoadNetwork, grid: GridSpec, sensitivity: float, reg: float):
    if sensitivity <= 0:
        raise ValidationError(f"idw sensitivity must be positive, got {sensitivity}")
    if reg <= 0:
        raise ValidationError(f"idw regularizer must be positive, got {reg}")
    if not grid.covers(net.bbox):
        raise ValidationError(f"grid extent {grid.extent} does not cover network bbox {net.bbox}")
    seg, speeds, lanes = net.segments()
    dist = point_segment_distance(grid.cell_centers(), seg)
    w = ((dist + reg) / reg) ** (-sensitivity)
    if not np.all(w.sum(axis=1) > 0):
        raise ValidationError("all IDW weights underflowed to zero for some cell")
    return w, speeds, lanes, seg


def reconstruct_direction(net: RoadNetwork, grid: GridSpec, idw_sensitivity: float,
                          idw_reg: float = 1.0) -> DirectionField:
    """Direction field as the IDW average of speed-weighted road unit vectors."""
    w, speeds, _, seg = _idw_weights(net, grid, idw_sensitivity, idw_reg)
    vec = seg[:, 1] - seg[:, 0]
    unit = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    ws = w * speeds[None, :]
    vx = ws @ unit[:, 0]
    vy = ws @ unit[:, 1]
    norm = np.hypot(vx, vy)
    if np.any(norm <= 0):
        raise ValidationError("direction field degenerate: opposing roads cancel exactly")
    theta = np.arctan2(vy, vx).reshape(grid.nx, grid.ny)
    return DirectionField(grid, theta)


def reconstruct_v_max(net: RoadNetwork, grid: GridSpec, idw_sensitivity: float,
                      idw_reg: float = 1.0) -> ScalarField:
    """Maximal-velocity field as the IDW average of road speed limits."""
    w, speeds, _, _ = _idw_weights(net, grid, idw_sensitivity, idw_reg)
    v = (w @ speeds) / w.sum(axis=1)
    return ScalarField(grid, v.reshape(grid.nx, grid.ny), units="m/s")


def reconstruct_rho_max(net: RoadNetwork, grid: GridSpec, vehicle_spacing: float = 6.0,
                        kernel_sigma: float = 100.0, floor: float = RHO_FLOOR) -> ScalarField:
    """Maximal-density field from a bumper-to-bumper virtual fleet.

    Every road gets one virtual vehicle per ``vehicle_spacing`` meters per
    lane, each contributing a normalized 2D Gaussian (std ``kernel_sigma``)
    so that the field integrates to the vehicle count. Cells are floored at
    ``floor`` so the flow model stays defined off-network.
    """
    if vehicle_spacing <= 0:
        raise ValidationError(f"vehicle_spacing must be positive, got {vehicle_spacing}")
    if kernel_sigma <= 0:
        raise ValidationError(f"kernel_sigma must be positive, got {kernel_sigma}")
    if not grid.covers(net.bbox):
        raise ValidationError(f"grid extent {grid.extent} does not cover network bbox {net.bbox}")
    centers = grid.cell_centers()
    values = np.zeros(len(centers))
    norm = 1.0 / (2.0 * np.pi * kernel_sigma**2)
    inv2s2 = 1.0 / (2.0 * kernel_sigma**2)
    seg, _, lanes = net.segments()
    for k in range(len(seg)):
        a, b = seg[k]
        length = float(np.hypot(*(b - a)))
        n_veh = max(1, round(length / vehicle_spacing))
        t = (np.arange(n_veh) + 0.5) / n_veh
        cars = a[None, :] + t[:, None] * (b - a)[None, :]
        d2 = ((centers[:, None, :] - cars[None, :, :]) ** 2).sum(axis=2)
        values += lanes[k] * norm * np.exp(-d2 * inv2s2).sum(axis=1)
    values = np.maximum(values, floor)
    return ScalarField(grid, values.reshape(grid.nx, grid.ny), units="veh/m^2")


def save_raster(field, path) -> None:
    """Write a ScalarField or DirectionField in the documented raster format."""
    if isinstance(field, DirectionField):
        values, units = field.theta, "rad"
    else:
        values, units = field.values, field.units
    g = field.grid
    with open(path, "w") as fh:
        fh.write("# gridflow raster v1\n")
        fh.write(f"nx {g.nx} ny {g.ny}\n")
        fh.write(f"dx {g.dx!r} dy {g.dy!r}\n")
        fh.write(f"origin {g.origin[0]!r} {g.origin[1]!r}\n")
        fh.write(f"units {units or '-'}\n")
        for iy in range(g.ny):
            fh.write(" ".join(repr(float(v)) for v in values[:, iy]) + "\n")


def load_raster(path) -> ScalarField:
    """Read the raster format back; inverse of save_raster (bit-exact)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    try:
        head = dict(zip(lines[0].split()[0::2], lines[0].split()[1::2]))
        size = dict(zip(lines[1].split()[0::2], lines[1].split()[1::2]))
        origin_parts = lines[2].split()
        units = lines[3].split(None, 1)[1]
        g = GridSpec(int(head["nx"]), int(head["ny"]), float(size["dx"]), float(size["dy"]),
                     (float(origin_parts[1]), float(origin_parts[2])))
        rows = [np.array(ln.split(), dtype=float) for ln in lines[4:4 + g.ny]]
        values = np.stack(rows, axis=1)
    except (KeyError, IndexError, ValueError) as exc:
        raise ValidationError(f"bad raster file {path}: {exc}") from None
    if values.shape != (g.nx, g.ny):
        raise ValidationError(f"raster body {values.shape} does not match header in {path}")
    return ScalarField(g, values, units="" if units == "-" else units)


def load_direction(path) -> DirectionField:
    f = load_raster(path)
    return DirectionField(f.grid, f.values)
