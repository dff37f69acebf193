
import numpy as np
import pytest

from fracconf import constructions as C
from fracconf.counting import (MAX_VERTICES, annulus_adjacency, brute_force_count, build_grid_index,
                               count_gap_graph, count_gap_graph_report, count_pinned, edge_length_cloud,
                               enumerate_annulus, pinned_counts)
from fracconf.dimension import box_dimension
from fracconf.errors import OracleTooLarge, ParamError, UnsupportedShape
from fracconf.geometry import DOT_PRODUCT, EUCLIDEAN, GapGraph, PointCloud
from fracconf.metrics import get_metric

LINE3 = PointCloud([(0.0,), (1.0,), (2.0,)], 1.0)
SQUARE = PointCloud([(0, 0), (1, 0), (1, 1), (0, 1)], 1.0)


def _naive_tuples(P, shape, phi, delta):
    """Pure-python enumeration, independent of both kernels."""
    import itertools
    n = 0
    for tup in itertools.permutations(range(len(P)), shape.vertex_count):
        if all(abs(phi(P[tup[i - 1]], P[tup[j - 1]]) - g) <= delta for i, j, g in shape.edges):
            n += 1
    return n


def test_small_examples():
    assert count_gap_graph(LINE3, GapGraph.chain([1, 1]), EUCLIDEAN, 1e-9) == 2
    assert count_gap_graph(SQUARE, GapGraph.triangle(1, 1, 1), EUCLIDEAN, 1e-9) == 0
    assert count_gap_graph(SQUARE, GapGraph.chain([1]), EUCLIDEAN, 1e-9) == 8
    for cl, sh in [(LINE3, GapGraph.chain([1, 1])), (SQUARE, GapGraph.triangle(1, 1, 1)),
                   (SQUARE, GapGraph.chain([1]))]:
        assert brute_force_count(cl, sh, EUCLIDEAN, 1e-9) == count_gap_graph(cl, sh, EUCLIDEAN, 1e-9)


@pytest.mark.parametrize("shape", [GapGraph.chain([0.5, 0.7]), GapGraph.star([0.6, 0.6, 0.4]),
                                   GapGraph.triangle(0.5, 0.6, 0.7), GapGraph.chain([0.5, 0.5, 0.5])])
def test_against_naive_permutations(shape):
    rng = np.random.default_rng(7)
    P = rng.uniform(0, 1, size=(14, 2))
    cl = PointCloud(P, 0.01)
    phi = lambda x, y: float(np.linalg.norm(x - y))
    want = _naive_tuples(P, shape, phi, 0.08)
    assert count_gap_graph(cl, shape, EUCLIDEAN, 0.08) == want
    assert brute_force_count(cl, shape, EUCLIDEAN, 0.08) == want


def test_grid_index():
    idx = build_grid_index(PointCloud([(0.3, 0.3)], 1.0), 0.5)
    assert len(idx) == 1
    g = np.stack(np.meshgrid(np.arange(10), np.arange(10)), -1).reshape(-1, 2) * 0.5
    idx = build_grid_index(PointCloud(g, 0.5), 1.0)
    assert max(len(v) for v in idx.cells.values()) <= 4
    assert sum(len(v) for v in idx.cells.values()) == 100
    with pytest.raises(ParamError):
        build_grid_index(PointCloud(g, 0.5), 0.0)


def test_enumerate_annulus():
    ang = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    circle = np.column_stack([np.cos(ang), np.sin(ang)])
    cl = PointCloud(np.vstack([[0, 0], circle]), 0.1)
    idx = build_grid_index(cl, 0.3)
    hits, strat = enumerate_annulus(idx, (0, 0), 1.0, 1e-9)
    assert sorted(hits.tolist()) == list(range(1, 51)) and strat == "grid"
    disk = PointCloud(np.random.default_rng(0).uniform(-0.7, 0.7, size=(200, 2)), 0.01)
    assert len(enumerate_annulus(build_grid_index(disk, 0.25), (0, 0), 2.0, 0.01)[0]) == 0
    rng = np.random.default_rng(3)
    P = rng.uniform(-1, 1, size=(1000, 2))
    cl = PointCloud(P, 0.01)
    idx = build_grid_index(cl, 0.17)
    for _ in range(10):
        x = rng.uniform(-1, 1, 2)
        t, delta = rng.uniform(0.1, 1.2), rng.uniform(0.001, 0.1)
        want = np.flatnonzero(np.abs(np.linalg.norm(P - x, axis=1) - t) <= delta)
        assert np.array_equal(np.sort(enumerate_annulus(idx, x, t, delta)[0]), want)
    hits, strat = enumerate_annulus(idx, (0.2, 0.1), 0.3, 0.05, DOT_PRODUCT)
    assert strat == "full_scan"
    want = np.flatnonzero(np.abs(P @ np.array([0.2, 0.1]) - 0.3) <= 0.05)
    assert np.array_equal(np.sort(hits), want)


@pytest.mark.parametrize("metric", ["euclidean", "paraboloid"])
def test_adjacency_strategies_agree(metric):
    rng = np.random.default_rng(5)
    P = rng.uniform(0, 1, size=(3500, 2))
    phi = get_metric(metric, 2)
    a, s1 = annulus_adjacency(P, 0.3, 0.01, phi, "grid")
    b, s2 = annulus_adjacency(P, 0.3, 0.01, phi, "dense")
    assert (s1, s2) == ("grid", "dense")
    assert (a != b).nnz == 0 and a.nnz > 0


def test_pinned():
    ang = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    cl = PointCloud(np.column_stack([np.cos(ang), np.sin(ang)]), 0.1)
    sh = GapGraph.chain([1.0], pin=1)
    assert count_pinned(cl, sh, (0, 0), EUCLIDEAN, 1e-9) == 12
    assert count_pinned(cl, sh, (10, 10), EUCLIDEAN, 1e-9) == 0
    with pytest.raises(ParamError):
        count_pinned(cl, GapGraph.chain([1.0]), (0, 0))


def test_pin_partition_on_construction():
    cl, _ = C.build_orthogonal_spheres(4, 2, (1.0, 1.2), 4)
    sh = GapGraph.chain([1.0, 1.2])
    for v in (1, 2, 3):
        assert pinned_counts(cl, sh, EUCLIDEAN, 1e-9, v).sum() == count_gap_graph(cl, sh, EUCLIDEAN, 1e-9)


def test_report_and_threads():
    cl, _ = C.build_orthogonal_spheres(4, 3, (1.0, 1.0, 1.0), 8)
    sh = GapGraph.chain([1.0, 1.0, 1.0])
    r = count_gap_graph_report(cl, sh, EUCLIDEAN, 1e-9)
    assert set(r) == {"count", "elapsed_ms", "strategy"}
    assert r["count"] >= 8**4
    assert count_gap_graph(cl, sh, EUCLIDEAN, 1e-9, threads=1) == \
        count_gap_graph(cl, sh, EUCLIDEAN, 1e-9, threads=4) == r["count"]


def test_guards():
    sh9 = GapGraph.chain([1.0] * 8)
    assert sh9.vertex_count == 9 > MAX_VERTICES
    with pytest.raises(UnsupportedShape):
        count_gap_graph(SQUARE, sh9, EUCLIDEAN, 1e-9)
    big = PointCloud(np.random.default_rng(0).uniform(size=(200, 2)), 0.001)
    with pytest.raises(OracleTooLarge):
        brute_force_count(big, GapGraph.chain([0.1] * 4), EUCLIDEAN, 0.01)
    with pytest.raises(ParamError):
        count_gap_graph(SQUARE, GapGraph.chain([1.0]), EUCLIDEAN, 0.0)


def test_edge_length_cloud_examples():
    two = PointCloud([(0.0,), (1.0,)], 1.0)
    assert edge_length_cloud(two, GapGraph.chain([1.0]), q=1e-6).points.ravel().tolist() == [1.0]
    got = edge_length_cloud(LINE3, GapGraph.chain([1.0]), q=1e-6).points.ravel().tolist()
    assert got == [1.0, 2.0]
    pinned = edge_length_cloud(LINE3, GapGraph.chain([1.0], pin=1), q=1e-6, pin_point=(0.0,))
    assert pinned.points.ravel().tolist() == [1.0, 2.0]


def test_edge_length_cloud_fills_plane_region():
    # dense product example: pinned 2-chain lengths fill a 2-dimensional region
    cl = C.build_product_chain_example(2, (1.0, 1.0), 2.0, 5, s_points=32)
    pin = cl.points[len(cl) // 2]
    sh = GapGraph.chain([1.0, 1.0], pin=1)
    el = edge_length_cloud(cl, sh, q=1 / 64, pin_point=pin)
    fit = box_dimension(el, [2.0**-j for j in range(2, 6)])
    assert fit.slope > 1.6
