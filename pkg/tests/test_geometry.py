import json
import math

import numpy as np
import pytest

from fracconf.errors import DegenerateConfiguration, DimensionError, ParamError, StructureError
from fracconf.geometry import (DOT_PRODUCT, EUCLIDEAN, GapGraph, PointCloud, ScaleSequence,
                               edge_length_vector, eval_phi, is_tree)


def test_eval_phi_examples():
    assert eval_phi(EUCLIDEAN, (0, 0), (3, 4)) == 5
    assert eval_phi(EUCLIDEAN, (1.5, -2), (1.5, -2)) == 0
    assert eval_phi(DOT_PRODUCT, (1, 2), (3, 4)) == 11


def test_eval_phi_dimension_mismatch():
    with pytest.raises(DimensionError):
        eval_phi(EUCLIDEAN, (0, 0), (1, 2, 3))


@pytest.mark.parametrize("n,edges,expected", [
    (3, [(1, 2), (2, 3)], True),
    (3, [(1, 2), (2, 3), (1, 3)], False),
    (4, [(1, 2), (1, 3), (1, 4)], True),
    (4, [(1, 2), (3, 4)], False),
])
def test_is_tree(n, edges, expected):
    assert is_tree(n, [(i, j, 1.0) for i, j in edges]) is expected


def test_edge_length_vector_examples():
    V = [(0, 0), (1, 0), (1, 1)]
    assert edge_length_vector(V, GapGraph.chain([1, 1]).edges) == (1, 1)
    # canonical order 12, 13, 23 puts the diagonal in the middle
    tri = edge_length_vector(V, GapGraph.triangle(1, 1, 1).edges)
    assert tri[0] == 1 and tri[2] == 1 and abs(tri[1] - math.sqrt(2)) < 1e-15
    assert edge_length_vector([(0, 0), (2, 0), (0, 3)], GapGraph.star([1, 1]).edges) == (2, 3)


def test_edge_length_vector_rejects_duplicates():
    with pytest.raises(DegenerateConfiguration):
        edge_length_vector([(0, 0), (0, 0)], [(1, 2, 1.0)])


def test_gap_graph_canonical_order_and_validation():
    g = GapGraph(3, ((2, 3, 1.0), (1, 3, 2.0), (1, 2, 3.0)), "triangle")
    assert [(i, j) for i, j, _ in g.edges] == [(1, 2), (1, 3), (2, 3)]
    with pytest.raises(StructureError):
        GapGraph(3, ((1, 2, 1.0), (1, 2, 2.0)))
    with pytest.raises(StructureError):
        GapGraph(3, ((1, 2, 0.0),))
    with pytest.raises(StructureError):
        GapGraph(3, ((1, 3, 1.0), (2, 3, 1.0)), "chain")
    with pytest.raises(StructureError):
        GapGraph(4, ((1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)), "tree")
    with pytest.raises(StructureError):
        GapGraph(1, ())
    with pytest.raises(StructureError):
        GapGraph.chain([1.0], pin=5)


def test_kite_shape():
    k = GapGraph.kite([1, 1, 1, 1, 1])
    assert k.vertex_count == 5 and not k.is_acyclic()
    with pytest.raises(StructureError):
        GapGraph(5, ((1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (1, 5, 1.0)), "kite")


def test_gap_graph_json_roundtrip():
    g = GapGraph.star([1.0, 2.5, 3.0], pin=1)
    obj = json.loads(g.to_json())
    assert set(obj) == {"n", "edges", "shape_kind", "pin"}
    assert GapGraph.from_json(g.to_json()) == g
    with pytest.raises(StructureError):
        GapGraph.from_json('{"edges": []}')


def test_point_cloud_invariants(tmp_path):
    c = PointCloud([(0, 0), (1, 0), (0, 0.5)], 0.25, {"name": "toy"})
    assert c.ambient_dim == 2 and len(c) == 3
    assert c.separation == 0.5 and c.provenance["c"] == 2.0
    with pytest.raises(ValueError):
        c.points[0, 0] = 3.0
    with pytest.raises(DegenerateConfiguration):
        PointCloud([(0, 0), (0, 0)], 1.0)
    with pytest.raises(ParamError):
        PointCloud([(0, np.nan)], 1.0)
    with pytest.raises(ParamError):
        PointCloud([(0, 0)], 0.0)


def test_point_cloud_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    c = PointCloud(rng.normal(size=(20, 3)), 1 / 3, {"name": "rand"})
    p = tmp_path / "c.csv"
    c.to_csv(p)
    first = p.read_text().splitlines()[0]
    assert first.startswith("# dim=3 resolution=") and "provenance=rand" in first
    back = PointCloud.from_csv(p)
    assert np.array_equal(back.points, c.points)
    assert back.resolution == c.resolution


def test_scale_sequence():
    assert ScaleSequence((1, 0.5, 0.25)).scales == (1.0, 0.5, 0.25)
    for bad in [(), (1, 1), (0.5, 1), (1, -1)]:
        with pytest.raises(ParamError):
            ScaleSequence(bad)
