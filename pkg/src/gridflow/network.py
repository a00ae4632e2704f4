"""Unidirectional road networks: domain types, file I/O, grid synthesis.

A network is a directed planar graph of road segments over a rectangular
domain. Roads are one-way; geometry is metric (meters), speeds are stored
in m/s internally (km/h accepted at the file boundary).

Network file schema (version 1, plain text, '#' comments allowed):

    # gridflow network v1
    units length=m speed=m/s
    bbox <xmin> <ymin> <xmax> <ymax>
    nodes <count>
    <id> <x> <y>                       (one line per node)
    roads <count>
    <id> <from> <to> <speed> <lanes>   (one line per road)

``units speed=km/h`` is accepted on load and converted; files are always
written canonically in m/s with shortest round-trip float formatting, so
load(save(net)) reproduces the network bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NetworkFormatError, ValidationError

KMH = 1000.0 / 3600.0  # one km/h in m/s


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Road:
    id: int
    from_node: int
    to_node: int
    speed_limit: float  # m/s
    lanes: int = 1


@dataclass(frozen=True)
class RiverSpec:
    """Topological bottleneck: a gap between two node rows of a grid.

    North-going roads between node rows ``gap_row`` and ``gap_row + 1``
    are removed except at the ``bridge_cols`` column indices.
    """

    gap_row: int
    bridge_cols: tuple = ()


@dataclass
class RoadNetwork:
    nodes: list = field(default_factory=list)
    roads: list = field(default_factory=list)
    bbox: tuple = (0.0, 0.0, 1.0, 1.0)  # xmin, ymin, xmax, ymax

    def __post_init__(self):
        self._node_index = {n.id: n for n in self.nodes}

    def node(self, node_id: int) -> Node:
        return self._node_index[node_id]

    def road_vector(self, road: Road) -> tuple:
        a = self.node(road.from_node)
        b = self.node(road.to_node)
        return (b.x - a.x, b.y - a.y)

    def road_length(self, road: Road) -> float:
        dx, dy = self.road_vector(road)
        return math.hypot(dx, dy)

    def segments(self):
        """Road geometry as arrays: endpoints (R,2,2), speeds (R,), lanes (R,)."""
        seg = np.empty((len(self.roads), 2, 2))
        speeds = np.empty(len(self.roads))
        lanes = np.empty(len(self.roads))
        for k, r in enumerate(self.roads):
            a = self.node(r.from_node)
            b = self.node(r.to_node)
            seg[k, 0] = (a.x, a.y)
            seg[k, 1] = (b.x, b.y)
            speeds[k] = r.speed_limit
            lanes[k] = r.lanes
        return seg, speeds, lanes

    def validate(self):
        """Check all structural invariants; raise ValidationError naming the offender."""
        if not self.roads:
            raise ValidationError("network has no roads")
        xmin, ymin, xmax, ymax = self.bbox
        if not (xmax > xmin and ymax > ymin):
            raise ValidationError(f"degenerate bbox {self.bbox}")
        seen = set()
        for n in self.nodes:
            if n.id in seen:
                raise ValidationError(f"duplicate node id {n.id}")
            seen.add(n.id)
            if not (xmin <= n.x <= xmax and ymin <= n.y <= ymax):
                raise ValidationError(f"node {n.id} at ({n.x}, {n.y}) outside bbox")
        seen_r = set()
        for r in self.roads:
            if r.id in seen_r:
                raise ValidationError(f"duplicate road id {r.id}")
            seen_r.add(r.id)
            for end in (r.from_node, r.to_node):
                if end not in self._node_index:
                    raise ValidationError(f"road {r.id} references missing node {end}")
            if r.from_node == r.to_node:
                raise ValidationError(f"road {r.id} is a self-loop at node {r.from_node}")
            if r.speed_limit <= 0:
                raise ValidationError(f"road {r.id} has non-positive speed {r.speed_limit}")
            if int(r.lanes) != r.lanes or r.lanes < 1:
                raise ValidationError(f"road {r.id} has invalid lane count {r.lanes}")
            if self.road_length(r) <= 0:
                raise ValidationError(f"road {r.id} has zero length")
        return self


def generate_manhattan_grid(
    rows: int,
    cols: int,
    side: float,
    noise_sigma: float,
    seed: int,
    default_speed: float,
    fast_rows=(),
    fast_cols=(),
    fast_speed: float | None = None,
    river: RiverSpec | None = None,
    max_redraws: int = 1000,
) -> RoadNetwork:
    """Synthesize a perturbed Manhattan grid with all roads heading North or East.

    ``rows`` x ``cols`` nodes span a ``side`` x ``side`` square. Node
    positions get iid Gaussian noise (std ``noise_sigma``); draws that
    would flip any incident road's orientation (non-positive East
    component for an East road, North for a North road) are re-drawn, so
    the network stays globally North-East oriented.

    ``fast_rows`` / ``fast_cols`` select whole arterials (grid row /
    column indices) that get ``fast_speed`` instead of ``default_speed``.
    ``river`` removes the North roads crossing one inter-row gap except at
    its bridge columns.

    Deterministic under ``seed``; speeds are m/s.
    """
    if rows < 2 or cols < 2:
        raise ValidationError(f"grid needs rows, cols >= 2, got {rows}x{cols}")
    if side <= 0:
        raise ValidationError(f"side must be positive, got {side}")
    if noise_sigma < 0:
        raise ValidationError(f"noise_sigma must be >= 0, got {noise_sigma}")
    if default_speed <= 0:
        raise ValidationError(f"default_speed must be positive, got {default_speed}")
    fast_rows = tuple(fast_rows)
    fast_cols = tuple(fast_cols)
    if (fast_rows or fast_cols) and (fast_speed is None or fast_speed <= 0):
        raise ValidationError("fast_speed must be positive when fast roads are selected")
    for i in fast_rows:
        if not 0 <= i < rows:
            raise ValidationError(f"fast row {i} not in grid with {rows} rows")
    for j in fast_cols:
        if not 0 <= j < cols:
            raise ValidationError(f"fast column {j} not in grid with {cols} columns")
    if river is not None:
        if not 0 <= river.gap_row < rows - 1:
            raise ValidationError(f"river gap_row {river.gap_row} not an inter-row gap")
        for j in river.bridge_cols:
            if not 0 <= j < cols:
                raise ValidationError(f"bridge column {j} not in grid with {cols} columns")

    rng = np.random.default_rng(seed)
    sx = side / (cols - 1)
    sy = side / (rows - 1)
    base = np.empty((rows, cols, 2))
    for i in range(rows):
        for j in range(cols):
            base[i, j] = (j * sx, i * sy)
    offsets = rng.normal(0.0, noise_sigma, size=(rows, cols, 2)) if noise_sigma > 0 else np.zeros((rows, cols, 2))
    pos = base + offsets

    def offending_nodes():
        bad = set()
        # East roads must keep dx > 0, North roads dy > 0.
        for i in range(rows):
            for j in range(cols - 1):
                if pos[i, j + 1, 0] - pos[i, j, 0] <= 0:
                    bad.add((i, j))
                    bad.add((i, j + 1))
        for i in range(rows - 1):
            for j in range(cols):
                if pos[i + 1, j, 1] - pos[i, j, 1] <= 0:
                    bad.add((i, j))
                    bad.add((i + 1, j))
        return bad

    redraws = 0
    while noise_sigma > 0:
        bad = offending_nodes()
        if not bad:
            break
        redraws += 1
        if redraws > max_redraws:
            raise ValidationError(
                f"could not keep grid North-East oriented after {max_redraws} re-draws "
                f"(noise_sigma {noise_sigma} too large for spacing {min(sx, sy)})"
            )
        for (i, j) in sorted(bad):
            pos[i, j] = base[i, j] + rng.normal(0.0, noise_sigma, size=2)

    nodes = [Node(i * cols + j, float(pos[i, j, 0]), float(pos[i, j, 1]))
             for i in range(rows) for j in range(cols)]

    def speed_for(row_idx=None, col_idx=None):
        if row_idx is not None and row_idx in fast_rows:
            return fast_speed
        if col_idx is not None and col_idx in fast_cols:
            return fast_speed
        return default_speed

    roads = []
    rid = 0
    for i in range(rows):
        for j in range(cols - 1):
            roads.append(Road(rid, i * cols + j, i * cols + j + 1, speed_for(row_idx=i)))
            rid += 1
    for i in range(rows - 1):
        for j in range(cols):
            if river is not None and i == river.gap_row and j not in river.bridge_cols:
                continue
            roads.append(Road(rid, i * cols + j, (i + 1) * cols + j, speed_for(col_idx=j)))
            rid += 1

    xs = pos[:, :, 0]
    ys = pos[:, :, 1]
    bbox = (
        float(min(0.0, xs.min())),
        float(min(0.0, ys.min())),
        float(max(side, xs.max())),
        float(max(side, ys.max())),
    )
    return RoadNetwork(nodes=nodes, roads=roads, bbox=bbox).validate()


def save_network(net: RoadNetwork, path) -> None:
    """Write the canonical network file (schema in the module docstring)."""
    net.validate()
    lines = ["# gridflow network v1"]
    lines.append("units length=m speed=m/s")
    lines.append("bbox " + " ".join(repr(float(v)) for v in net.bbox))
    lines.append(f"nodes {len(net.nodes)}")
    for n in net.nodes:
        lines.append(f"{n.id} {float(n.x)!r} {float(n.y)!r}")
    lines.append(f"roads {len(net.roads)}")
    for r in net.roads:
        lines.append(f"{r.id} {r.from_node} {r.to_node} {float(r.speed_limit)!r} {int(r.lanes)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> RoadNetwork:
    """Parse and validate a network file; errors carry line numbers."""
    with open(path) as fh:
        raw = fh.readlines()
    items = [(k + 1, ln.strip()) for k, ln in enumerate(raw)
             if ln.strip() and not ln.strip().startswith("#")]
    pos = 0

    def take(expect=None):
        nonlocal pos
        if pos >= len(items):
            raise NetworkFormatError(f"unexpected end of file, expected {expect}")
        lineno, text = items[pos]
        pos += 1
        return lineno, text

    speed_scale = 1.0
    lineno, text = take("units or bbox")
    if text.startswith("units"):
        for tok in text.split()[1:]:
            key, _, val = tok.partition("=")
            if key == "speed":
                if val == "km/h":
                    speed_scale = KMH
                elif val != "m/s":
                    raise NetworkFormatError(f"line {lineno}: unknown speed unit '{val}'")
            elif key == "length":
                if val != "m":
                    raise NetworkFormatError(f"line {lineno}: unknown length unit '{val}'")
            else:
                raise NetworkFormatError(f"line {lineno}: unknown unit field '{key}'")
        lineno, text = take("bbox")
    parts = text.split()
    if parts[0] != "bbox" or len(parts) != 5:
        raise NetworkFormatError(f"line {lineno}: expected 'bbox xmin ymin xmax ymax'")
    try:
        bbox = tuple(float(v) for v in parts[1:])
    except ValueError as exc:
        raise NetworkFormatError(f"line {lineno}: bad bbox value ({exc})") from None

    lineno, text = take("nodes header")
    parts = text.split()
    if parts[0] != "nodes" or len(parts) != 2:
        raise NetworkFormatError(f"line {lineno}: expected 'nodes <count>'")
    n_nodes = int(parts[1])
    nodes = []
    for _ in range(n_nodes):
        lineno, text = take("node record")
        parts = text.split()
        if len(parts) != 3:
            raise NetworkFormatError(f"line {lineno}: node record needs 'id x y'")
        try:
            nodes.append(Node(int(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise NetworkFormatError(f"line {lineno}: bad node field ({exc})") from None

    lineno, text = take("roads header")
    parts = text.split()
    if parts[0] != "roads" or len(parts) != 2:
        raise NetworkFormatError(f"line {lineno}: expected 'roads <count>'")
    n_roads = int(parts[1])
    roads = []
    for _ in range(n_roads):
        lineno, text = take("road record")
        parts = text.split()
        if len(parts) != 5:
            raise NetworkFormatError(f"line {lineno}: road record needs 'id from to speed lanes'")
        try:
            roads.append(Road(int(parts[0]), int(parts[1]), int(parts[2]),
                              float(parts[3]) * speed_scale, int(parts[4])))
        except ValueError as exc:
            raise NetworkFormatError(f"line {lineno}: bad road field ({exc})") from None
    if pos != len(items):
        lineno, text = items[pos]
        raise NetworkFormatError(f"line {lineno}: trailing content '{text}'")
    return RoadNetwork(nodes=nodes, roads=roads, bbox=bbox).validate()
