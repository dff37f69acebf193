"""Ambient types: points, clouds, scale sequences, gap graphs and metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateConfiguration, DimensionError, ParamError, StructureError

SHAPE_KINDS = ("chain", "tree", "triangle", "kite", "general")


def as_point(x, d: Optional[int] = None) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size < 1:
        raise DimensionError("point must have at least one coordinate")
    if not np.all(np.isfinite(p)):
        raise ParamError("point coordinates must be finite")
    if d is not None and p.size != d:
        raise DimensionError(f"expected dimension {d}, got {p.size}")
    return p


# --------------------------------------------------------------------------
# metrics


def _euclid(X, Y):
    return np.sqrt(np.sum((np.asarray(X) - np.asarray(Y)) ** 2, axis=-1))


def _dot(X, Y):
    return np.sum(np.asarray(X) * np.asarray(Y), axis=-1)


def _euclid_box_range(lo, hi):
    """Range of |v| over the box lo <= v <= hi (per axis)."""
    near = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    far = np.maximum(np.abs(lo), np.abs(hi))
    return float(np.sqrt(np.sum(near**2))), float(np.sqrt(np.sum(far**2)))


@dataclass(frozen=True)
class Metric:
    """A gap function phi(x, y).

    ``func`` is vectorised over the last axis. ``box_range`` (translation
    invariant metrics only) maps a box of difference vectors y - x to a
    guaranteed (min, max) range of phi, which the grid index uses to skip
    cells.
    """

    name: str
    func: Callable
    symmetric: bool = True
    dim: Optional[int] = None
    translation_invariant: bool = False
    box_range: Optional[Callable] = None

    def __call__(self, X, Y):
        return self.func(X, Y)


EUCLIDEAN = Metric("euclidean", _euclid, True, None, True, _euclid_box_range)
DOT_PRODUCT = Metric("dot_product", _dot, True, None, False, None)


def external_metric(func, symmetric=False, dim=None) -> Metric:
    return Metric("external", func, symmetric, dim, False, None)


def eval_phi(metric: Metric, x, y) -> float:
    px, py = as_point(x), as_point(y)
    if px.size != py.size:
        raise DimensionError(f"dimension mismatch {px.size} vs {py.size}")
    if metric.dim is not None and px.size != metric.dim:
        raise DimensionError(f"metric {metric.name} expects dimension {metric.dim}")
    return float(metric.func(px, py))


# --------------------------------------------------------------------------
# point clouds


class PointCloud:
    """Immutable finite net standing in for the delta-neighbourhood of a set."""

    def __init__(self, points, resolution: float, provenance: Optional[dict] = None):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] < 1:
            raise DimensionError("points must be a non-empty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ParamError("point coordinates must be finite")
        if not resolution > 0:
            raise ParamError("resolution must be positive")
        pts.setflags(write=False)
        self._points = pts
        self.resolution = float(resolution)
        if len(pts) > 1:
            dist, _ = cKDTree(pts).query(pts, k=2)
            sep = float(dist[:, 1].min())
        else:
            sep = math.inf
        if sep == 0.0:
            raise DegenerateConfiguration("point cloud contains repeated points")
        self.separation = sep
        prov = dict(provenance or {"name": "user"})
        prov.setdefault("name", "user")
        prov["c"] = sep / self.resolution if math.isfinite(sep) else None
        self.provenance = prov

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def ambient_dim(self) -> int:
        return self._points.shape[1]

    def __len__(self):
        return self._points.shape[0]

    def __repr__(self):
        return (
            f"PointCloud(n={len(self)}, d={self.ambient_dim}, "
            f"resolution={self.resolution:.4g}, provenance={self.provenance['name']!r})"
        )

    def to_csv(self, path) -> None:
        header = (
            f"dim={self.ambient_dim} resolution={self.resolution!r} "
            f"provenance={self.provenance['name']}"
        )
        np.savetxt(path, self._points, fmt="%.17g", delimiter=",", header=header, comments="# ")

    @classmethod
    def from_csv(cls, path) -> "PointCloud":
        with open(path) as fh:
            first = fh.readline()
        if not first.startswith("#"):
            raise ParamError(f"{path}: missing '# dim=... resolution=...' header")
        meta = dict(tok.split("=", 1) for tok in first[1:].split() if "=" in tok)
        try:
            d = int(meta["dim"])
            res = float(meta["resolution"])
        except (KeyError, ValueError) as exc:
            raise ParamError(f"{path}: malformed header") from exc
        pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if pts.shape[1] != d:
            raise DimensionError(f"{path}: header says dim={d}, rows have {pts.shape[1]}")
        return cls(pts, res, {"name": meta.get("provenance", "csv")})


@dataclass(frozen=True)
class ScaleSequence:
    scales: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in self.scales)
        if not s:
            raise ParamError("scale sequence is empty")
        if any(not v > 0 for v in s):
            raise ParamError("scales must be positive")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ParamError("scales must be strictly decreasing")
        object.__setattr__(self, "scales", s)

    def __len__(self):
        return len(self.scales)

    def __getitem__(self, i):
        return self.scales[i]


# --------------------------------------------------------------------------
# gap graphs


def is_tree(vertex_count: int, edges) -> bool:
    n = int(vertex_count)
    pairs = [(int(e[0]), int(e[1])) for e in edges]
    if len(pairs) != n - 1:
        return False
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


@dataclass(frozen=True)
class GapGraph:
    """Configuration shape. Vertices are 1-based; edges (i, j, gap) with i < j."""

    vertex_count: int
    edges: tuple
    shape_kind: str = "general"
    pin: Optional[int] = None

    def __post_init__(self):
        n = int(self.vertex_count)
        if n < 2:
            raise StructureError("vertex_count must be >= 2")
        if self.shape_kind not in SHAPE_KINDS:
            raise StructureError(f"unknown shape_kind {self.shape_kind!r}")
        norm = []
        seen = set()
        for e in self.edges:
            if len(e) != 3:
                raise StructureError(f"edge {e!r} must be (i, j, gap)")
            i, j, g = int(e[0]), int(e[1]), float(e[2])
            if not (1 <= i < j <= n):
                raise StructureError(f"edge ({i}, {j}) needs 1 <= i < j <= {n}")
            if not (g > 0 and math.isfinite(g)):
                raise StructureError(f"gap on ({i}, {j}) must be positive")
            if (i, j) in seen:
                raise StructureError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            norm.append((i, j, g))
        norm.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", tuple(norm))
        kind = self.shape_kind
        pairs = {(i, j) for i, j, _ in norm}
        if kind == "chain" and pairs != {(i, i + 1) for i in range(1, n)}:
            raise StructureError("chain must have exactly the edges (i, i+1)")
        if kind == "tree" and not is_tree(n, norm):
            raise StructureError("edges do not form a tree")
        if kind == "triangle" and (n != 3 or pairs != {(1, 2), (1, 3), (2, 3)}):
            raise StructureError("triangle needs n=3 and all three edges")
        if kind == "kite" and (n != 5 or pairs != {(1, 2), (1, 3), (2, 3), (2, 4), (4, 5)}):
            raise StructureError("kite needs n=5 with edges 12,13,23,24,45")
        if self.pin is not None:
            p = int(self.pin)
            if not 1 <= p <= n:
                raise StructureError(f"pin {p} out of range")
            object.__setattr__(self, "pin", p)

    @property
    def gaps(self):
        return tuple(g for _, _, g in self.edges)

    def with_pin(self, pin):
        return GapGraph(self.vertex_count, self.edges, self.shape_kind, pin)

    def is_acyclic(self) -> bool:
        return is_tree(self.vertex_count, self.edges)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.vertex_count,
                "edges": [[i, j, g] for i, j, g in self.edges],
                "shape_kind": self.shape_kind,
                "pin": self.pin,
            }
        )

    @classmethod
    def from_json(cls, text) -> "GapGraph":
        try:
            obj = json.loads(text) if isinstance(text, str) else dict(text)
            return cls(obj["n"], tuple(tuple(e) for e in obj["edges"]),
                       obj.get("shape_kind", "general"), obj.get("pin"))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise StructureError(f"malformed gap graph: {exc}") from exc

    # convenience constructors
    @classmethod
    def chain(cls, gaps: Sequence[float], pin=None):
        gaps = list(gaps)
        return cls(len(gaps) + 1, tuple((i + 1, i + 2, g) for i, g in enumerate(gaps)), "chain", pin)

    @classmethod
    def star(cls, gaps: Sequence[float], pin=None):
        """Star centred at vertex 1."""
        return cls(len(gaps) + 1, tuple((1, i + 2, g) for i, g in enumerate(gaps)), "tree", pin)

    @classmethod
    def triangle(cls, t12, t13, t23, pin=None):
        return cls(3, ((1, 2, t12), (1, 3, t13), (2, 3, t23)), "triangle", pin)

    @classmethod
    def kite(cls, gaps: Sequence[float], pin=None):
        """Gaps in canonical order for edges 12, 13, 23, 24, 45."""
        e = ((1, 2), (1, 3), (2, 3), (2, 4), (4, 5))
        if len(gaps) != 5:
            raise StructureError("kite takes 5 gaps")
        return cls(5, tuple((i, j, g) for (i, j), g in zip(e, gaps)), "kite", pin)


def edge_length_vector(vertices, edges, metric: Metric = EUCLIDEAN):
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2:
        raise DimensionError("vertices must be an (n, d) array")
    if len(np.unique(V, axis=0)) != len(V):
        raise DegenerateConfiguration("vertices must be pairwise distinct")
    out = []
    for e in sorted(edges, key=lambda e: (int(e[0]), int(e[1]))):
        i, j = int(e[0]), int(e[1])
        out.append(eval_phi(metric, V[i - 1], V[j - 1]))
    return tuple(out)
