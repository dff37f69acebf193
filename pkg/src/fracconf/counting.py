"""Exact counting of ordered, pairwise-distinct tuples realising a gap graph.

Each edge gap gets a sparse adjacency matrix (pairs with |phi - t| <= delta),
found either with a uniform grid over translation-invariant metrics or by a
chunked dense scan. A pruning pass trims vertex domains, then tuples are
grown breadth-first, vertex by vertex, with chunked frontiers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, OracleTooLarge, ParamError, UnsupportedShape
from .geometry import EUCLIDEAN, GapGraph, Metric, PointCloud, as_point

MAX_VERTICES = 8
ORACLE_GUARD = 10**9
_FRONTIER = 1 << 22
_DENSE_BLOCK = 1 << 22


# --------------------------------------------------------------------------
# grid index


class GridIndex:
    """Uniform grid: cell = floor(coord / cell_size) per axis."""

    def __init__(self, points: np.ndarray, cell_size: float):
        if not cell_size > 0:
            raise ParamError("cell_size must be positive")
        self.points = np.asarray(points, dtype=float)
        self.cell_size = float(cell_size)
        keys = np.floor(self.points / self.cell_size).astype(np.int64)
        self.keys = keys
        order = np.lexsort(keys.T[::-1])
        sk = keys[order]
        brk = np.ones(len(sk), dtype=bool)
        brk[1:] = np.any(sk[1:] != sk[:-1], axis=1)
        starts = np.flatnonzero(brk)
        self.order = order
        self.cell_keys = sk[starts]
        self.starts = starts
        self.counts = np.diff(np.append(starts, len(sk)))
        self.cells = {tuple(k): order[s:s + c] for k, s, c in
                      zip(self.cell_keys.tolist(), starts, self.counts)}

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.cells)

    def _codes(self, pad):
        lo = self.cell_keys.min(axis=0) - pad
        ext = self.cell_keys.max(axis=0) - lo + pad + 1
        strides = np.cumprod(np.append(1, ext[:-1]).astype(np.int64))
        return (self.cell_keys - lo) @ strides, strides, lo


def build_grid_index(cloud, cell_size: float) -> GridIndex:
    pts = cloud.points if isinstance(cloud, PointCloud) else cloud
    return GridIndex(pts, cell_size)


def _offsets(index: GridIndex, t, delta, metric):
    K = int(math.ceil((t + delta) / index.cell_size))
    cs = index.cell_size
    rngs = [range(-K, K + 1)] * index.dim
    keep = []
    for o in product(*rngs):
        o = np.array(o)
        lo, hi = (o - 1) * cs, (o + 1) * cs
        mn, mx = metric.box_range(lo, hi)
        if mn <= t + delta and mx >= t - delta:
            keep.append(o)
    return np.array(keep, dtype=np.int64).reshape(-1, index.dim)


def enumerate_annulus(index: GridIndex, x, t: float, delta: float, metric: Metric = EUCLIDEAN):
    """Indices y with |phi(x, y) - t| <= delta, y != x (as points).

    Returns (indices, strategy)."""
    if not (t > 0 and delta > 0):
        raise ParamError("t and delta must be positive")
    p = as_point(x, index.dim)
    P = index.points
    if metric.translation_invariant and metric.box_range is not None:
        base = np.floor(p / index.cell_size).astype(np.int64)
        cand = []
        for o in _offsets(index, t, delta, metric):
            members = index.cells.get(tuple((base + o).tolist()))
            if members is not None:
                cand.append(members)
        cand = np.sort(np.concatenate(cand)) if cand else np.zeros(0, dtype=np.int64)
        strategy = "grid"
    else:
        cand = np.arange(len(P))
        strategy = "full_scan"
    vals = metric(np.broadcast_to(p, (len(cand), len(p))), P[cand])
    ok = np.abs(vals - t) <= delta
    ok &= np.any(P[cand] != p, axis=1)
    return cand[ok], strategy


def _cross(sa, ca, sb, cb):
    """All (ia, ib) pairs for blocks [sa, sa+ca) x [sb, sb+cb)."""
    tot = ca * cb
    P = np.repeat(np.arange(len(tot)), tot)
    first = np.cumsum(tot) - tot
    local = np.arange(tot.sum()) - first[P]
    return sa[P] + local // cb[P], sb[P] + local % cb[P]


def _grid_pairs(P, t, delta, metric):
    n, d = P.shape
    K = {1: 8, 2: 4, 3: 3, 4: 2}.get(d, 1)
    cs = (t + delta) / K
    idx = GridIndex(P, cs)
    pad = K + 1
    codes, strides, _ = idx._codes(pad)
    perm = np.argsort(codes)
    codes, starts, counts = codes[perm], idx.starts[perm], idx.counts[perm]
    rows, cols = [], []
    for o in _offsets(idx, t, delta, metric):
        tgt = codes + int(o @ strides)
        pos = np.searchsorted(codes, tgt)
        pos_c = np.minimum(pos, len(codes) - 1)
        hit = (pos < len(codes)) & (codes[pos_c] == tgt)
        if not hit.any():
            continue
        src_cells = np.flatnonzero(hit)
        dst_cells = pos_c[hit]
        sa, ca = starts[src_cells], counts[src_cells]
        sb, cb = starts[dst_cells], counts[dst_cells]
        cum = np.cumsum(ca * cb)
        lo = 0
        while lo < len(cum):
            base = cum[lo - 1] if lo else 0
            hi = max(int(np.searchsorted(cum, base + _FRONTIER, side="right")), lo + 1)
            ia, ib = _cross(sa[lo:hi], ca[lo:hi], sb[lo:hi], cb[lo:hi])
            a, b = idx.order[ia], idx.order[ib]
            ok = (a != b) & (np.abs(metric(P[a], P[b]) - t) <= delta)
            rows.append(a[ok])
            cols.append(b[ok])
            lo = hi
    return rows, cols


def _dense_pairs(P, t, delta, metric):
    n = len(P)
    B = max(1, _DENSE_BLOCK // max(n, 1))
    rows, cols = [], []
    for s in range(0, n, B):
        blk = P[s:s + B]
        vals = metric(blk[:, None, :], P[None, :, :])
        ok = np.abs(vals - t) <= delta
        r, c = np.nonzero(ok)
        r = r + s
        keep = r != c
        rows.append(r[keep])
        cols.append(c[keep])
    return rows, cols


def annulus_adjacency(points, t: float, delta: float, metric: Metric = EUCLIDEAN, strategy: str = "auto"):
    """Sparse boolean matrix A with A[a, b] iff a != b and |phi(p_a, p_b) - t| <= delta."""
    P = np.asarray(points, dtype=float)
    n = len(P)
    gridable = metric.translation_invariant and metric.box_range is not None
    if strategy == "auto":
        strategy = "grid" if gridable and n > 3000 else ("dense" if gridable else "full_scan")
    if strategy == "grid":
        if not gridable:
            raise ParamError(f"metric {metric.name} has no cell-cover bound")
        rows, cols = _grid_pairs(P, t, delta, metric)
    else:
        rows, cols = _dense_pairs(P, t, delta, metric)
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    A = sp.csr_matrix((np.ones(len(r), dtype=bool), (r, c)), shape=(n, n))
    A.sum_duplicates()
    A.sort_indices()
    return A, strategy


# --------------------------------------------------------------------------
# counting engine


class _Rel:
    """One directed constraint: candidates for the new vertex from a placed one."""

    def __init__(self, M: sp.csr_matrix):
        self.indptr = M.indptr.astype(np.int64)
        self.indices = M.indices.astype(np.int64)
        n = M.shape[0]
        self.n = n
        self.keys = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.indptr)) * n + self.indices

    def deg(self, rows):
        return self.indptr[rows + 1] - self.indptr[rows]

    def has(self, rows, cols):
        if len(self.keys) == 0:
            return np.zeros(len(rows), dtype=bool)
        k = rows.astype(np.int64) * self.n + cols
        pos = np.minimum(np.searchsorted(self.keys, k), len(self.keys) - 1)
        return self.keys[pos] == k


class Counter:
    """Reusable counting plan for one (points, shape, metric, delta)."""

    def __init__(self, points, shape: GapGraph, metric: Metric = EUCLIDEAN, delta: float = 1e-9,
                 strategy: str = "auto"):
        if not delta > 0:
            raise ParamError("delta must be positive")
        if shape.vertex_count > MAX_VERTICES:
            raise UnsupportedShape(f"{shape.vertex_count} vertices exceeds {MAX_VERTICES}")
        P = np.asarray(points, dtype=float)
        if metric.dim is not None and P.shape[1] != metric.dim:
            raise DimensionError(f"metric {metric.name} expects dimension {metric.dim}")
        self.P, self.shape, self.metric, self.delta = P, shape, metric, float(delta)
        self.n = len(P)
        mats, self.strategies = {}, set()
        for _, _, g in shape.edges:
            if g not in mats:
                mats[g], s = annulus_adjacency(P, g, delta, metric, strategy)
                self.strategies.add(s)
        self._mats = mats
        self.edge_mats = {(i, j): mats[g] for i, j, g in shape.edges}
        self.domains = self._prune()

    # arc consistency on vertex domains
    def _prune(self):
        V = self.shape.vertex_count
        dom = [np.ones(self.n, dtype=bool) for _ in range(V + 1)]
        for _ in range(2 * V):
            changed = False
            for (i, j), A in self.edge_mats.items():
                ni = dom[i] & ((A @ dom[j].astype(np.int64)) > 0)
                nj = dom[j] & ((A.T @ dom[i].astype(np.int64)) > 0)
                if ni.sum() != dom[i].sum() or nj.sum() != dom[j].sum():
                    changed = True
                dom[i], dom[j] = ni, nj
            if not changed:
                break
        return dom

    def _plan(self, root):
        V = self.shape.vertex_count
        adj = {v: set() for v in range(1, V + 1)}
        for i, j in self.edge_mats:
            adj[i].add(j)
            adj[j].add(i)
        order = [root]
        while len(order) < V:
            rest = [v for v in range(1, V + 1) if v not in order]
            v = max(rest, key=lambda u: (len(adj[u] & set(order)), len(adj[u]), -u))
            order.append(v)
        steps = []
        for s, v in enumerate(order[1:], start=1):
            rels = []
            for col, u in enumerate(order[:s]):
                if (u, v) in self.edge_mats:
                    rels.append((col, self._rel(self.edge_mats[(u, v)], False)))
                elif (v, u) in self.edge_mats:
                    rels.append((col, self._rel(self.edge_mats[(v, u)], True)))
            steps.append((v, rels))
        return order, steps

    def _rel(self, A, transpose):
        key = (id(A), transpose)
        cache = self.__dict__.setdefault("_rels", {})
        if key not in cache:
            cache[key] = _Rel(A.T.tocsr() if transpose else A)
        return cache[key]

    def _grow(self, F, steps, s):
        v, rels = steps[s]
        last = s == len(steps) - 1
        if not rels:
            cand_all = np.flatnonzero(self.domains[v])
            total = 0
            for lo in range(0, len(F), max(1, _FRONTIER // max(len(cand_all), 1))):
                blk = F[lo:lo + max(1, _FRONTIER // max(len(cand_all), 1))]
                rep = np.repeat(np.arange(len(blk)), len(cand_all))
                cand = np.tile(cand_all, len(blk))
                ok = np.all(blk[rep] != cand[:, None], axis=1)
                total += self._continue(np.column_stack([blk[rep[ok]], cand[ok]]), steps, s, last)
            return total
        col0, rel0 = rels[0]
        rows = F[:, col0]
        if last and len(rels) == 1:
            total = int(rel0.deg(rows).sum())
            for c in range(F.shape[1]):
                if c != col0:
                    total -= int(rel0.has(rows, F[:, c]).sum())
            return total
        deg = rel0.deg(rows)
        cum = np.cumsum(deg)
        total = 0
        lo = 0
        while lo < len(F):
            base = cum[lo - 1] if lo else 0
            hi = int(np.searchsorted(cum, base + _FRONTIER, side="right"))
            hi = max(hi, lo + 1)
            blk, bdeg = F[lo:hi], deg[lo:hi]
            rep = np.repeat(np.arange(len(blk)), bdeg)
            first = np.cumsum(bdeg) - bdeg
            pos = rel0.indptr[blk[:, col0]][rep] + (np.arange(len(rep)) - first[rep])
            cand = rel0.indices[pos]
            ok = self.domains[v][cand]
            for c, rel in rels[1:]:
                ok &= rel.has(blk[rep, c], cand)
            for c in range(blk.shape[1]):
                ok &= blk[rep, c] != cand
            total += self._continue(np.column_stack([blk[rep[ok]], cand[ok]]), steps, s, last)
            lo = hi
        return total

    def _continue(self, F, steps, s, last):
        if last:
            return len(F)
        if len(F) == 0:
            return 0
        return self._grow(F, steps, s + 1)

    def count(self, root: Optional[int] = None, root_points=None, threads: Optional[int] = None) -> int:
        if root is None:
            deg = {v: 0 for v in range(1, self.shape.vertex_count + 1)}
            for i, j in self.edge_mats:
                deg[i] += 1
                deg[j] += 1
            root = max(deg, key=lambda v: (deg[v], -v))
        _, steps = self._plan(root)
        dom = self.domains[root]
        if root_points is None:
            roots = np.flatnonzero(dom)
        else:
            roots = np.asarray(root_points, dtype=np.int64)
            roots = roots[dom[roots]]
        if len(roots) == 0:
            return 0
        if not steps:
            return len(roots)
        chunks = np.array_split(roots, max(1, min(len(roots), 4 * (threads or 1))))
        run = lambda r: self._grow(r.reshape(-1, 1), steps, 0)
        if threads and threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(threads) as pool:
                return int(sum(pool.map(run, chunks)))
        return int(sum(run(c) for c in chunks))


def _check_cloud(cloud, metric):
    if metric.dim is not None and cloud.ambient_dim != metric.dim:
        raise DimensionError(f"metric {metric.name} expects dimension {metric.dim}")


def count_gap_graph(cloud: PointCloud, shape: GapGraph, metric: Metric = EUCLIDEAN,
                    delta: float = 1e-9, threads: Optional[int] = None) -> int:
    _check_cloud(cloud, metric)
    return Counter(cloud.points, shape, metric, delta).count(threads=threads)


def count_gap_graph_report(cloud, shape, metric=EUCLIDEAN, delta=1e-9, threads=None) -> dict:
    t0 = time.perf_counter()
    c = Counter(cloud.points, shape, metric, delta)
    n = c.count(threads=threads)
    return {"count": n, "elapsed_ms": 1000 * (time.perf_counter() - t0),
            "strategy": sorted(c.strategies)}


def _locate(P, x):
    hit = np.flatnonzero(np.all(P == x, axis=1))
    return int(hit[0]) if len(hit) else None


def count_pinned(cloud: PointCloud, shape: GapGraph, pin_point, metric: Metric = EUCLIDEAN,
                 delta: float = 1e-9, vertex: Optional[int] = None, threads: Optional[int] = None) -> int:
    v = vertex if vertex is not None else shape.pin
    if v is None:
        raise ParamError("no pin vertex given")
    if not 1 <= v <= shape.vertex_count:
        raise ParamError(f"pin vertex {v} out of range")
    _check_cloud(cloud, metric)
    x = as_point(pin_point, cloud.ambient_dim)
    P = cloud.points
    idx = _locate(P, x)
    if idx is None:
        P = np.vstack([P, x])
        idx = len(P) - 1
    return Counter(P, shape, metric, delta).count(root=v, root_points=[idx], threads=threads)


def pinned_counts(cloud: PointCloud, shape: GapGraph, metric: Metric = EUCLIDEAN,
                  delta: float = 1e-9, vertex: int = 1) -> np.ndarray:
    """count_pinned at every net point, sharing one counting plan."""
    c = Counter(cloud.points, shape, metric, delta)
    return np.array([c.count(root=vertex, root_points=[i]) for i in range(len(cloud))], dtype=np.int64)


# --------------------------------------------------------------------------
# brute-force oracle


def brute_force_count(cloud: PointCloud, shape: GapGraph, metric: Metric = EUCLIDEAN, delta: float = 1e-9) -> int:
    """Full enumeration of all n^v tuples (dense, one first vertex at a time)."""
    P = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, float)
    n, V = len(P), shape.vertex_count
    if float(n) ** V > ORACLE_GUARD:
        raise OracleTooLarge(f"{n}^{V} tuples exceeds {ORACLE_GUARD}")
    phi = metric(P[:, None, :], P[None, :, :])
    masks = [(i, j, np.abs(phi - g) <= delta) for i, j, g in shape.edges]
    neq = ~np.eye(n, dtype=bool)
    rest = V - 1

    def place(arr, axes):
        # put a 1-d or 2-d array on the given axes of a rest-dimensional tensor
        shp = [1] * rest
        for a, s in zip(axes, arr.shape):
            shp[a] = s
        return arr.reshape(shp)

    total = 0
    for a in range(n):
        T = np.ones((n,) * rest, dtype=bool)
        for i, j, D in masks:
            if i == 1:
                T &= place(D[a], [j - 2])
            else:
                T &= place(D, [i - 2, j - 2])
        for u in range(rest):
            T &= place(np.arange(n) != a, [u])
            for w in range(u + 1, rest):
                T &= place(neq, [u, w])
        total += int(T.sum())
    return total


# --------------------------------------------------------------------------
# edge-length clouds


def edge_length_cloud(cloud: PointCloud, shape: GapGraph, metric: Metric = EUCLIDEAN,
                      q: float = 1e-3, pin_point=None, vertex: Optional[int] = None) -> PointCloud:
    """Realised edge-length vectors over distinct tuples, one per q-cell."""
    if not q > 0:
        raise ParamError("q must be positive")
    if shape.vertex_count > MAX_VERTICES:
        raise UnsupportedShape(f"{shape.vertex_count} vertices exceeds {MAX_VERTICES}")
    P = cloud.points
    n, V = len(P), shape.vertex_count
    pin_v = vertex if vertex is not None else shape.pin
    fixed = None
    if pin_point is not None:
        if pin_v is None:
            raise ParamError("pinned edge-length cloud needs a pin vertex")
        x = as_point(pin_point, cloud.ambient_dim)
        fixed = _locate(P, x)
        if fixed is None:
            P = np.vstack([P, x])
            fixed = n
    free = V - (1 if fixed is not None else 0)
    if float(n) ** free > ORACLE_GUARD:
        raise UnsupportedShape(f"{n}^{free} tuples is too many to enumerate")
    phi = metric(P[:, None, :], P[None, :, :])
    seen = {}
    idx = np.arange(n)
    ranges = [[fixed] if (fixed is not None and v == pin_v) else idx for v in range(1, V + 1)]
    # enumerate all but the last vertex in python-sized blocks
    heads = np.stack([g.reshape(-1) for g in np.meshgrid(*ranges[:-1], indexing="ij")], axis=1)
    last = np.asarray(ranges[-1])
    B = max(1, _FRONTIER // max(len(last), 1))
    for s in range(0, len(heads), B):
        H = heads[s:s + B]
        T = np.column_stack([np.repeat(H, len(last), axis=0), np.tile(last, len(H))])
        ok = np.ones(len(T), dtype=bool)
        for u in range(V):
            for w in range(u + 1, V):
                ok &= T[:, u] != T[:, w]
        T = T[ok]
        EL = np.column_stack([phi[T[:, i - 1], T[:, j - 1]] for i, j, _ in shape.edges])
        keys = np.floor(EL / q).astype(np.int64)
        _, first = np.unique(keys, axis=0, return_index=True)
        for kk, row in zip(map(tuple, keys[first].tolist()), EL[first]):
            seen.setdefault(kk, row)
    pts = np.array([seen[k] for k in sorted(seen)]) if seen else np.zeros((0, len(shape.edges)))
    if len(pts) == 0:
        raise ParamError("no distinct tuples to measure")
    return PointCloud(pts, q, {"name": "edge_length_cloud",
                               "params": {"shape": shape.to_json(), "metric": metric.name, "q": q}})
