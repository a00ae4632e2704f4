import math

import numpy as np
import pytest

from gridflow.errors import NetworkFormatError, ValidationError
from gridflow.network import (KMH, Node, RiverSpec, Road, RoadNetwork,
                              generate_manhattan_grid, load_network, save_network)


def test_minimal_grid_exact_corners():
    net = generate_manhattan_grid(2, 2, 100.0, 0.0, seed=0, default_speed=10.0)
    assert len(net.nodes) == 4
    assert len(net.roads) == 4  # two East + two North roads
    positions = {(n.x, n.y) for n in net.nodes}
    assert positions == {(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)}
    for r in net.roads:
        assert r.speed_limit == 10.0
        assert r.lanes == 1


def test_generation_deterministic_under_seed():
    a = generate_manhattan_grid(3, 3, 300.0, 5.0, seed=7, default_speed=8.0)
    b = generate_manhattan_grid(3, 3, 300.0, 5.0, seed=7, default_speed=8.0)
    assert a.nodes == b.nodes
    assert a.roads == b.roads
    assert a.bbox == b.bbox
    c = generate_manhattan_grid(3, 3, 300.0, 5.0, seed=8, default_speed=8.0)
    assert a.nodes != c.nodes


@pytest.mark.parametrize("seed", range(8))
def test_orientation_preserved_under_noise(seed):
    cols = 6
    net = generate_manhattan_grid(6, cols, 600.0, 25.0, seed=seed, default_speed=8.0)
    for r in net.roads:
        dx, dy = net.road_vector(r)
        # the nominal component (East for +1 neighbors, North for +cols
        # neighbors) must stay positive after noise
        if r.to_node == r.from_node + 1:
            assert dx > 0
        else:
            assert r.to_node == r.from_node + cols
            assert dy > 0


def test_road_counts_and_river_removal():
    plain = generate_manhattan_grid(10, 10, 1000.0, 0.0, seed=1, default_speed=8.0)
    assert len(plain.roads) == 10 * 9 * 2
    river = generate_manhattan_grid(
        10, 10, 1000.0, 0.0, seed=1, default_speed=8.0,
        river=RiverSpec(4, (3, 6)),
    )
    assert len(river.roads) == 180 - (10 - 2)
    # no North road crosses the gap except at the bridges
    for r in river.roads:
        i_from, i_to = r.from_node // 10, r.to_node // 10
        if (i_from, i_to) == (4, 5):
            assert r.from_node % 10 in (3, 6)


def test_fast_arterials_get_fast_speed():
    net = generate_manhattan_grid(
        5, 5, 400.0, 0.0, seed=0, default_speed=30 * KMH,
        fast_rows=(2,), fast_cols=(1,), fast_speed=50 * KMH,
    )
    speeds = set()
    for r in net.roads:
        dx, dy = net.road_vector(r)
        row = r.from_node // 5
        col = r.from_node % 5
        if dx > dy and row == 2:
            assert r.speed_limit == pytest.approx(50 * KMH)
        elif dy > dx and col == 1:
            assert r.speed_limit == pytest.approx(50 * KMH)
        speeds.add(r.speed_limit)
    assert len(speeds) == 2


def test_bbox_contains_all_nodes():
    net = generate_manhattan_grid(8, 8, 800.0, 30.0, seed=3, default_speed=8.0)
    xmin, ymin, xmax, ymax = net.bbox
    for n in net.nodes:
        assert xmin <= n.x <= xmax and ymin <= n.y <= ymax


def test_generator_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        generate_manhattan_grid(1, 5, 100.0, 0.0, seed=0, default_speed=8.0)
    with pytest.raises(ValidationError):
        generate_manhattan_grid(3, 3, -5.0, 0.0, seed=0, default_speed=8.0)
    with pytest.raises(ValidationError):
        generate_manhattan_grid(3, 3, 100.0, 0.0, seed=0, default_speed=8.0,
                                fast_rows=(9,), fast_speed=10.0)
    with pytest.raises(ValidationError):
        generate_manhattan_grid(3, 3, 100.0, 0.0, seed=0, default_speed=8.0,
                                river=RiverSpec(5, ()))
    with pytest.raises(ValidationError, match="re-draws"):
        generate_manhattan_grid(3, 3, 90.0, 200.0, seed=0, default_speed=8.0,
                                max_redraws=3)


def test_roundtrip_exact(tmp_path):
    net = generate_manhattan_grid(5, 4, 350.0, 12.0, seed=11, default_speed=9.1,
                                  fast_rows=(1,), fast_speed=13.9)
    p = tmp_path / "net.txt"
    save_network(net, p)
    back = load_network(p)
    assert back.nodes == net.nodes
    assert back.roads == net.roads
    assert back.bbox == net.bbox
    # canonical: second save is byte-identical
    p2 = tmp_path / "net2.txt"
    save_network(back, p2)
    assert p.read_bytes() == p2.read_bytes()


def test_load_rejects_missing_node_reference(tmp_path):
    net = RoadNetwork(
        nodes=[Node(0, 0.0, 0.0), Node(1, 100.0, 0.0)],
        roads=[Road(5, 0, 99, 10.0)],
        bbox=(0.0, 0.0, 100.0, 10.0),
    )
    with pytest.raises(ValidationError, match="road 5 references missing node 99"):
        net.validate()


def test_save_rejects_empty_roads(tmp_path):
    net = RoadNetwork(nodes=[Node(0, 0.0, 0.0), Node(1, 1.0, 0.0)], roads=[],
                      bbox=(0.0, 0.0, 1.0, 1.0))
    with pytest.raises(ValidationError, match="no roads"):
        save_network(net, tmp_path / "x.txt")
    assert not (tmp_path / "x.txt").exists()


def test_parse_error_carries_line_number(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("bbox 0 0 1 1\nnodes 1\n0 zero 0.0\nroads 0\n")
    with pytest.raises(NetworkFormatError, match="line 3"):
        load_network(p)


def test_kmh_units_accepted_on_load(tmp_path):
    p = tmp_path / "net.txt"
    p.write_text(
        "units length=m speed=km/h\n"
        "bbox 0 0 200 100\n"
        "nodes 2\n0 0.0 0.0\n1 200.0 0.0\n"
        "roads 1\n0 0 1 36.0 1\n"
    )
    net = load_network(p)
    assert net.roads[0].speed_limit == pytest.approx(10.0)  # 36 km/h = 10 m/s


def test_road_length_derived_from_endpoints():
    net = RoadNetwork(
        nodes=[Node(0, 0.0, 0.0), Node(1, 30.0, 40.0)],
        roads=[Road(0, 0, 1, 10.0)],
        bbox=(0.0, 0.0, 30.0, 40.0),
    )
    assert math.isclose(net.road_length(net.roads[0]), 50.0)
