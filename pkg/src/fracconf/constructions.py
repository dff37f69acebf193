"""Builders for the explicit example sets.

Every builder returns a PointCloud whose provenance records the builder
name, its parameters and (where a configuration pattern exists) index
blocks so that pattern tuples can be regenerated and checked.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GapInfeasible, InfeasibleDimension, NotAcute, ParamError
from .geometry import EUCLIDEAN, GapGraph, Metric, PointCloud, ScaleSequence

# --------------------------------------------------------------------------
# self-similar Cantor sets


def cantor_positions(depth: int, ratio: float, branching: int = 2) -> np.ndarray:
    """Left endpoints of the level-`depth` intervals of the self-similar set in
    [0, 1] with `branching` equally spaced pieces of size `ratio`."""
    if depth < 0:
        raise ParamError("depth must be >= 0")
    if not 0 < ratio * branching <= 1 + 1e-12:
        raise ParamError("pieces overlap: ratio * branching must be <= 1")
    step = (1.0 - ratio) / (branching - 1) if branching > 1 else 0.0
    pos = np.zeros(1)
    scale = 1.0
    for _ in range(depth):
        pos = (pos[:, None] + scale * step * np.arange(branching)[None, :]).reshape(-1)
        scale *= ratio
    return np.sort(pos)


def middle_third_cantor(depth: int) -> np.ndarray:
    """Exact triadic left endpoints: sum of 2 * 3^-k over chosen digits."""
    digits = np.array(list(itertools.product((0, 2), repeat=depth)), dtype=np.int64).reshape(-1, depth)
    weights = 3 ** np.arange(depth - 1, -1, -1, dtype=np.int64)
    ints = digits @ weights if depth else np.zeros(1, dtype=np.int64)
    return np.sort(ints) / 3.0**depth


def build_cantor_line(depth: int, ratio: float = 1.0 / 3.0) -> PointCloud:
    if abs(ratio - 1.0 / 3.0) < 1e-15:
        x = middle_third_cantor(depth)
    else:
        x = cantor_positions(depth, ratio)
    return PointCloud(x.reshape(-1, 1), ratio**depth,
                      {"name": "cantor_line", "params": {"depth": depth, "ratio": ratio}})


def build_cantor_product(depth: int, dims: int = 2, ratio: float = 1.0 / 3.0) -> PointCloud:
    x = middle_third_cantor(depth) if abs(ratio - 1 / 3) < 1e-15 else cantor_positions(depth, ratio)
    grids = np.meshgrid(*([x] * dims), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    return PointCloud(pts, ratio**depth,
                      {"name": "cantor_product", "params": {"depth": depth, "dims": dims, "ratio": ratio}})


def unit_cube_grid(d: int, n: int) -> PointCloud:
    """n^d points k/n, k = 0..n-1, in the half-open unit cube."""
    axes = [np.arange(n) / n] * d
    pts = np.stack([g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    return PointCloud(pts, 1.0 / n, {"name": "unit_cube_grid", "params": {"d": d, "n": n}})


# --------------------------------------------------------------------------
# spheres


def _hyperspherical(radius, angles, azimuth):
    """angles: (N, m-2) polar angles, azimuth: (N,) -> (N, m) cartesian."""
    N = azimuth.shape[0]
    m = angles.shape[1] + 2
    out = np.empty((N, m))
    sin_prod = np.full(N, float(radius))
    for i in range(m - 2):
        out[:, i] = sin_prod * np.cos(angles[:, i])
        sin_prod = sin_prod * np.sin(angles[:, i])
    out[:, m - 2] = sin_prod * np.cos(azimuth)
    out[:, m - 1] = sin_prod * np.sin(azimuth)
    return out


def sphere_cantor_depth(n_points: int, alpha: float) -> int:
    """Depth giving exactly n_points for build_sphere_cantor, or ParamError."""
    j = max(1, math.ceil(alpha - 1e-12))
    depth = round(math.log2(n_points) / j)
    if depth < 1 or 2 ** (j * depth) != n_points:
        raise ParamError(f"n={n_points} is not 2^({j}*depth) for alpha={alpha}")
    return depth


def build_sphere_cantor(subspace_dim: int, radius: float, alpha: float, depth: int,
                        offset: float = 0.0, window: float = 1.0) -> PointCloud:
    """Product Cantor net on the sphere radius * S^(m-1) in R^m.

    ceil(alpha) angular coordinates carry a two-piece Cantor set of
    dimension alpha / ceil(alpha); the rest sit on the equator. The azimuth
    covers `window` turns starting at `offset` turns.
    """
    m = int(subspace_dim)
    if m < 2:
        raise InfeasibleDimension("sphere needs subspace_dim >= 2")
    if not alpha > 0:
        raise ParamError("alpha must be positive")
    if alpha > m - 1 + 1e-12:
        raise InfeasibleDimension(f"alpha={alpha} exceeds sphere dimension {m - 1}")
    if not radius > 0 or depth < 1:
        raise ParamError("radius must be positive and depth >= 1")
    j = max(1, math.ceil(alpha - 1e-12))
    ratio = 2.0 ** (-j / alpha)
    c = cantor_positions(depth, ratio)
    coords = np.meshgrid(*([c] * j), indexing="ij")
    coords = [g.reshape(-1) for g in coords]
    azimuth = 2 * math.pi * (offset + window * coords[0])
    polar = np.full((azimuth.size, m - 2), math.pi / 2)
    for a in range(1, j):
        polar[:, m - 2 - a] = math.pi / 4 + (math.pi / 2) * coords[a]
    pts = _hyperspherical(radius, polar, azimuth)
    res = radius * 2 * math.pi * window * ratio**depth
    return PointCloud(pts, res, {
        "name": "sphere_cantor",
        "params": {"m": m, "radius": radius, "alpha": alpha, "depth": depth,
                   "offset": offset, "window": window, "ratio": ratio},
    })


def cube_sphere_net(d: int, g: int) -> np.ndarray:
    """Integer points on the surface of [-g, g]^d projected onto S^(d-1)."""
    if d < 2 or g < 1:
        raise ParamError("need d >= 2, g >= 1")
    faces = []
    rng_ = np.arange(-g, g + 1)
    for axis in range(d):
        for sign in (-g, g):
            grids = np.meshgrid(*([rng_] * (d - 1)), indexing="ij")
            rest = np.stack([x.reshape(-1) for x in grids], axis=1)
            faces.append(np.insert(rest, axis, sign, axis=1))
    P = np.unique(np.concatenate(faces), axis=0).astype(float)
    return P / np.linalg.norm(P, axis=1, keepdims=True)


# --------------------------------------------------------------------------
# lattice example


@dataclass(frozen=True)
class LatticeParams:
    d: int
    alpha: float
    q_seq: tuple
    level: int = 1

    def __post_init__(self):
        q = tuple(int(v) for v in self.q_seq)
        object.__setattr__(self, "q_seq", q)
        if self.d < 1:
            raise ParamError("d must be >= 1")
        if not 0 < self.alpha <= self.d:
            raise ParamError("alpha must lie in (0, d]")
        if not q or q[0] < 1 or any(b <= a for a, b in zip(q, q[1:])):
            raise ParamError("q_seq must be increasing positive integers")
        if not 1 <= self.level <= len(q):
            raise ParamError(f"level {self.level} outside 1..{len(q)}")

    def delta(self, i: int) -> float:
        return self.q_seq[i - 1] ** (-self.d / self.alpha)


def lattice_q_sequence(q1: int, levels: int, growth: str = "square"):
    """'square': q_{i+1} = q_i^2.  'power': q_{i+1} = q_i^(i+1); the raw
    exponent i stalls at i = 1, so it is shifted by one."""
    q = [int(q1)]
    for i in range(1, levels):
        if growth == "square":
            q.append(q[-1] ** 2)
        elif growth == "power":
            q.append(q[-1] ** (i + 1))
        else:
            raise ParamError(f"unknown growth {growth!r}")
    return tuple(q)


def _lattice_level_ints(params: LatticeParams):
    """Retained integer vectors u (point u / q_i) for levels 1..params.level."""
    d = params.d
    q = params.q_seq
    grids = np.meshgrid(*([np.arange(q[0] + 1)] * d), indexing="ij")
    cur = np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)
    out = [cur]
    for i in range(2, params.level + 1):
        qp, qi = q[i - 2], q[i - 1]
        dp = params.delta(i - 1)
        # squared-distance threshold in units of 1/(qp*qi)^2; ties are excluded
        thresh = (dp * qp * qi) ** 2 * (1 - 1e-12)
        reach = int(math.floor(dp * qi)) + 1
        offs = np.stack([g.reshape(-1) for g in np.meshgrid(*([np.arange(-reach, reach + 1)] * d),
                                                           indexing="ij")], axis=1)
        keep = set()
        for v in cur:
            base = (v * qi) // qp
            cand = base[None, :] + offs
            cand = cand[np.all((cand >= 0) & (cand <= qi), axis=1)]
            diff = cand * qp - v[None, :] * qi
            ok = cand[np.sum(diff * diff, axis=1) < thresh]
            keep.update(map(tuple, ok.tolist()))
        cur = np.array(sorted(keep), dtype=np.int64).reshape(-1, d)
        if cur.size == 0:
            raise ParamError(f"lattice level {i} retains no points")
        out.append(cur)
    return out


def lattice_levels(params: LatticeParams):
    """PointCloud for each level 1..params.level."""
    clouds = []
    for i, ints in enumerate(_lattice_level_ints(params), start=1):
        qi = params.q_seq[i - 1]
        clouds.append(PointCloud(ints / qi, params.delta(i), {
            "name": "lattice",
            "params": {"d": params.d, "alpha": params.alpha, "q_seq": list(params.q_seq), "level": i},
        }))
    return clouds


def build_lattice_example(params: LatticeParams):
    cloud = lattice_levels(params)[-1]
    scales = ScaleSequence(tuple(params.delta(i) for i in range(1, params.level + 1)))
    return cloud, scales


# --------------------------------------------------------------------------
# train tracks


@dataclass(frozen=True)
class TrainTrackParams:
    alpha: float
    R_seq: tuple
    level: int = 1

    def __post_init__(self):
        R = tuple(float(v) for v in self.R_seq)
        object.__setattr__(self, "R_seq", R)
        if not 1 < self.alpha < 2:
            raise ParamError("train track needs alpha in (1, 2)")
        if not R or R[0] <= 1 or any(b <= a for a, b in zip(R, R[1:])):
            raise ParamError("R_seq must be increasing and > 1")
        if not 1 <= self.level <= len(R):
            raise ParamError(f"level {self.level} outside 1..{len(R)}")


def train_track_geometry(R: float, alpha: float) -> dict:
    """Slat and column layout at one scale (alpha in (1, 2])."""
    if not (R > 1 and 1 < alpha <= 2):
        raise ParamError("need R > 1 and alpha in (1, 2]")
    col_w = R ** -0.5
    col_sp = R ** ((1 - alpha) / 2)
    slat_h = 1.0 / R
    slat_sp = R ** (-alpha / 2)
    eps = 1e-12
    cols = [c * col_sp for c in range(int(1 / col_sp) + 2) if c * col_sp + col_w <= 1 + eps]
    rows = [j * slat_sp for j in range(int(1 / slat_sp) + 2) if j * slat_sp + slat_h <= 1 + eps]
    per_slat = int(math.ceil(R**0.5 - eps))
    return {"column_width": col_w, "column_spacing": col_sp, "slat_height": slat_h,
            "slat_width": col_w, "slat_spacing": slat_sp, "columns": cols, "rows": rows,
            "points_per_slat": per_slat}


def _train_points(R, alpha):
    g = train_track_geometry(R, alpha)
    xs = np.array([c + k / R for c in g["columns"] for k in range(g["points_per_slat"])])
    ys = np.array(g["rows"])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([X.reshape(-1), Y.reshape(-1)]), g


def build_train_track(params: TrainTrackParams):
    a = params.alpha
    pts, g = _train_points(params.R_seq[0], a)
    for i in range(1, params.level):
        R = params.R_seq[i]
        new, _ = _train_points(R, a)
        # keep points inside a slat of the previous level
        cols = np.array(g["columns"])
        rows = np.array(g["rows"])
        cx = np.searchsorted(cols, new[:, 0], side="right") - 1
        ry = np.searchsorted(rows, new[:, 1], side="right") - 1
        ok = (cx >= 0) & (ry >= 0)
        ok &= new[:, 0] <= cols[np.clip(cx, 0, None)] + g["slat_width"]
        ok &= new[:, 1] <= rows[np.clip(ry, 0, None)] + g["slat_height"]
        pts, g = new[ok], train_track_geometry(R, a)
        if len(pts) == 0:
            raise ParamError(f"train track level {i + 1} retains no points")
    res = 1.0 / params.R_seq[params.level - 1]
    cloud = PointCloud(pts, res, {"name": "train_track",
                                  "params": {"alpha": a, "R_seq": list(params.R_seq), "level": params.level}})
    return cloud, ScaleSequence(tuple(1.0 / R for R in params.R_seq[: params.level]))


# --------------------------------------------------------------------------
# product example C x [0, 4 t2]


def _cantor_cube(dim, gamma, depth, half_side):
    """Cantor set of dimension gamma inside [-h, h]^dim (zeros on spare axes)."""
    if gamma <= 1e-12:
        return np.zeros((1, dim)), 2 * half_side
    j = math.ceil(gamma - 1e-12)
    if j > dim:
        raise InfeasibleDimension(f"gamma={gamma} exceeds {dim}")
    ratio = 2.0 ** (-j / gamma)
    c = cantor_positions(depth, ratio)
    grids = np.meshgrid(*([c] * j), indexing="ij")
    pts = np.zeros((grids[0].size, dim))
    for a in range(j):
        pts[:, a] = -half_side + 2 * half_side * grids[a].reshape(-1)
    return pts, 2 * half_side * ratio**depth


def build_product_chain_example(d: int, gaps, alpha: float, depth: int,
                                s_points: Optional[int] = None) -> PointCloud:
    t1, t2 = (float(v) for v in gaps)
    if not (0 < t1 <= t2):
        raise ParamError("gaps must satisfy 0 < t1 <= t2")
    if d < 2:
        raise ParamError("d must be >= 2")
    gamma = alpha - 1
    if gamma < -1e-12:
        raise InfeasibleDimension("alpha < 1 gives negative Cantor dimension")
    half = 0.49 * t1 / math.sqrt(d - 1)  # cube inside B(0, t1/2)
    C, c_res = _cantor_cube(d - 1, max(gamma, 0.0), depth, half)
    n_s = s_points or 2**depth
    s = np.linspace(0.0, 4 * t2, n_s + 1)
    h = 4 * t2 / n_s
    res = min(c_res, h) if gamma > 1e-12 else h
    pts = np.concatenate([np.column_stack([np.repeat(C[i:i + 1], s.size, axis=0), s]) for i in range(len(C))])
    return PointCloud(pts, res, {"name": "product_chain",
                                 "params": {"d": d, "gaps": [t1, t2], "alpha": alpha, "depth": depth,
                                            "s_points": n_s},
                                 "c_count": len(C), "s_count": int(s.size)})


def product_step(c1, c2, t: float):
    """Vertical step |s1 - s2| that makes (c1, s1), (c2, s2) a t-gap, or None."""
    r2 = t * t - float(np.sum((np.asarray(c1, float) - np.asarray(c2, float)) ** 2))
    if r2 < 0:
        return None
    return math.sqrt(r2)


def product_chain_witness(cs, s1: float, gaps, s_max: float):
    """Points (c_i, s_i) of a chain with the given gaps, stepping upward in s."""
    cs = [np.asarray(c, float) for c in cs]
    s = [float(s1)]
    for i, t in enumerate(gaps):
        step = product_step(cs[i], cs[i + 1], t)
        if step is None:
            return None
        nxt = s[-1] + step if s[-1] + step <= s_max else s[-1] - step
        if nxt < 0:
            return None
        s.append(nxt)
    return [np.append(c, v) for c, v in zip(cs, s)]


# --------------------------------------------------------------------------
# orthogonal spheres


@dataclass(frozen=True)
class RadiiRecursion:
    gaps: tuple
    radii: tuple

    def reconstructed_gaps(self):
        s = self.radii
        return (s[0],) + tuple(math.sqrt((s[i - 1] ** 2 + s[i] ** 2) / 2) for i in range(1, len(s)))


def orthogonal_radii(gaps) -> RadiiRecursion:
    t = [float(v) for v in gaps]
    if not t or any(v <= 0 for v in t):
        raise ParamError("gaps must be positive")
    s = [t[0]]
    for i in range(1, len(t)):
        s2 = 2 * t[i] ** 2 - s[-1] ** 2
        if s2 <= 0:
            raise GapInfeasible(f"s_{i + 1}^2 = {s2:.6g} <= 0", index=i + 1)
        s.append(math.sqrt(s2))
    return RadiiRecursion(tuple(t), tuple(s))


def _sphere_nets(m, radii, alpha, n, seed):
    depth = sphere_cantor_depth(n, alpha)
    rng = np.random.default_rng(seed)
    return [build_sphere_cantor(m, r, alpha, depth, offset=float(rng.uniform())).points for r in radii]


def _assemble(blocks, d, name, params, res):
    """blocks: list of (label, side, scale, Y); side selects the coordinate slot."""
    parts, index = [], {}
    start = 0
    slots = max(b[1] for b in blocks) + 1
    m = d // slots
    for label, side, scale, Y in blocks:
        P = np.zeros((len(Y), d))
        P[:, side * m:(side + 1) * m] = Y * scale
        parts.append(P)
        index[label] = [start, start + len(Y)]
        start += len(Y)
    return PointCloud(np.concatenate(parts), res, {"name": name, "params": params, "blocks": index})


def build_orthogonal_spheres(d: int, k: int, gaps, n_per_sphere: int,
                             alpha: Optional[float] = None, seed: int = 0):
    if d < 4 or d % 2:
        raise ParamError("d must be even and >= 4")
    if len(gaps) != k:
        raise ParamError(f"expected {k} gaps, got {len(gaps)}")
    rec = orthogonal_radii(gaps)
    m = d // 2
    a = float(m - 1 if alpha is None else alpha)
    nets = _sphere_nets(m, rec.radii, a, n_per_sphere, seed)
    r2 = 1 / math.sqrt(2)
    blocks = []
    for i, Y in enumerate(nets, start=1):
        blocks.append((f"A{i}", 0, r2, Y))
        blocks.append((f"B{i}", 1, r2, Y))
    res = min(rec.radii) * r2 * 2 * math.pi / n_per_sphere ** (1 / max(1, math.ceil(a)))
    params = {"d": d, "k": k, "gaps": list(rec.gaps), "n_per_sphere": n_per_sphere, "alpha": a, "seed": seed,
              "radii": list(rec.radii)}
    return _assemble(blocks, d, "orthogonal_spheres", params, res), rec


def _block(cloud, label):
    a, b = cloud.provenance["blocks"][label]
    return np.arange(a, b)


def _product_tuples(blocks):
    grids = np.meshgrid(*blocks, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def orthogonal_pattern(cloud: PointCloud):
    """Index tuples of the alternating chain pattern and its chain shape."""
    p = cloud.provenance["params"]
    k = p["k"]
    blocks = [_block(cloud, "A1")]
    for v in range(2, k + 2):
        side = "B" if v % 2 == 0 else "A"
        blocks.append(_block(cloud, f"{side}{v - 1}"))
    return _product_tuples(blocks), GapGraph.chain(p["gaps"])


# --------------------------------------------------------------------------
# special 3-chain


def special_3chain_radii(gaps):
    t1, t2, t3 = (float(v) for v in gaps)
    if min(t1, t2, t3) <= 0:
        raise ParamError("gaps must be positive")
    if t2 * t2 >= t1 * t1 + t3 * t3:
        raise GapInfeasible(f"t2^2 = {t2 * t2:.6g} >= t1^2 + t3^2 = {t1 * t1 + t3 * t3:.6g}")
    reverse = t1 > t3
    if reverse:
        t1, t3 = t3, t1
    if t2 * t2 <= t1 * t1:
        s = (math.sqrt(2 * t1**2 - t2**2), t2, math.sqrt(2 * t3**2 - t2**2))
        return {"case": 1, "radii": s, "A": None, "reverse": reverse}
    if t2 <= t3:
        A = 2.0
    else:
        a_max = t1**2 / (t2**2 - t3**2)
        A = 2.0 if 2.0 < a_max else (1.0 + a_max) / 2
    s = (t1, math.sqrt(t2**2 - t1**2 / A), math.sqrt(t1**2 / A + t3**2 - t2**2))
    return {"case": 2, "radii": s, "A": A, "reverse": reverse}


def build_special_3chain(d: int, gaps, n: int, alpha: Optional[float] = None, seed: int = 0) -> PointCloud:
    if d < 4 or d % 2:
        raise ParamError("d must be even and >= 4")
    info = special_3chain_radii(gaps)
    m = d // 2
    a = float(m - 1 if alpha is None else alpha)
    nets = _sphere_nets(m, info["radii"], a, n, seed)
    if info["case"] == 1:
        r2 = 1 / math.sqrt(2)
        blocks = []
        for i, Y in enumerate(nets, start=1):
            blocks += [(f"A{i}", 0, r2, Y), (f"B{i}", 1, r2, Y)]
    else:
        A = info["A"]
        Ap = A / (A - 1)
        blocks = [("A1", 0, 1 / math.sqrt(Ap), nets[0]), ("B1", 1, 1 / math.sqrt(A), nets[0]),
                  ("A2", 0, 1.0, nets[1]), ("B3", 1, 1.0, nets[2])]
    res = min(info["radii"]) * 2 * math.pi / n ** (1 / max(1, math.ceil(a))) / math.sqrt(2)
    params = {"d": d, "gaps": [float(v) for v in gaps], "n": n, "alpha": a, "seed": seed,
              "case": info["case"], "radii": list(info["radii"]), "A": info["A"], "reverse": info["reverse"]}
    return _assemble(blocks, d, "special_3chain", params, res)


def special_3chain_pattern(cloud: PointCloud):
    p = cloud.provenance["params"]
    if p["case"] == 1:
        labels = ["A1", "B2", "A2", "B3"]
    else:
        labels = ["A1", "B1", "A2", "B3"]
    T = _product_tuples([_block(cloud, l) for l in labels])
    if p["reverse"]:
        T = T[:, ::-1]
    return T, GapGraph.chain(p["gaps"])


# --------------------------------------------------------------------------
# circle pair (d = 2)


def build_circle_pair(t1: float, t2: float, alpha: float, depth: int) -> PointCloud:
    if not (t1 > 0 and t2 > 0):
        raise ParamError("gaps must be positive")
    if not 0 < alpha <= 1:
        raise ParamError("alpha must lie in (0, 1]")
    ratio = 2.0 ** (-1 / alpha)
    c = cantor_positions(depth, ratio)
    # half-turn windows keep E1 and E2 disjoint even when t1 == t2
    th1 = math.pi * c
    th2 = math.pi * (1 + c)
    E1 = t1 * np.column_stack([np.cos(th1), np.sin(th1)])
    E2 = t2 * np.column_stack([np.cos(th2), np.sin(th2)])
    ell = min(t1, t2) / 4
    E3 = np.column_stack([ell * c, np.zeros_like(c)])
    res = min(t1, t2) * math.pi * ratio**depth
    n = len(c)
    pts = np.concatenate([E1, E2, E3])
    return PointCloud(pts, min(res, ell * ratio**depth), {
        "name": "circle_pair",
        "params": {"t1": t1, "t2": t2, "alpha": alpha, "depth": depth},
        "blocks": {"E1": [0, n], "E2": [n, 2 * n], "E3": [2 * n, 3 * n]},
        "origin": 2 * n,
    })


def circle_pair_pattern(cloud: PointCloud):
    p = cloud.provenance["params"]
    origin = np.array([cloud.provenance["origin"]])
    T = _product_tuples([_block(cloud, "E1"), origin, _block(cloud, "E2")])
    return T, GapGraph.chain([p["t1"], p["t2"]])


# --------------------------------------------------------------------------
# acute tripod


@dataclass(frozen=True)
class TriangleSplit:
    gaps: tuple
    A: float
    B: float
    C: float


def triangle_split(gaps) -> TriangleSplit:
    t1, t2, t3 = (float(v) for v in gaps)
    A = (t1**2 - t2**2 + t3**2) / 2
    B = t1**2 - A
    C = t3**2 - A
    if min(A, B, C) <= 1e-15:
        raise NotAcute(f"split A={A:.6g}, B={B:.6g}, C={C:.6g} is not strictly positive")
    return TriangleSplit((t1, t2, t3), A, B, C)


def build_acute_tripod(d: int, gaps, n: int, alpha: Optional[float] = None, seed: int = 0):
    if d % 3:
        raise ParamError("d must be a multiple of 3")
    m = d // 3
    if m < 2:
        raise ParamError("d/3 must be >= 2 so each block holds a sphere")
    split = triangle_split(gaps)
    a = float(m - 1 if alpha is None else alpha)
    radii = (math.sqrt(split.A), math.sqrt(split.B), math.sqrt(split.C))
    nets = _sphere_nets(m, radii, a, n, seed)
    blocks = [("EA", 0, 1.0, nets[0]), ("EB", 1, 1.0, nets[1]), ("EC", 2, 1.0, nets[2])]
    res = min(radii) * 2 * math.pi / n ** (1 / max(1, math.ceil(a)))
    params = {"d": d, "gaps": list(split.gaps), "n": n, "alpha": a, "seed": seed}
    return _assemble(blocks, d, "acute_tripod", params, res), split


def tripod_pattern(cloud: PointCloud):
    t1, t2, t3 = cloud.provenance["params"]["gaps"]
    T = _product_tuples([_block(cloud, "EA"), _block(cloud, "EB"), _block(cloud, "EC")])
    # |x-y| = t1, |y-z| = t2, |z-x| = t3 -> canonical edges 12, 13, 23
    return T, GapGraph.triangle(t1, t3, t2)


# --------------------------------------------------------------------------
# sphere sum A u (A + S^(d-1))


def build_sphere_sum(d: int, a: Optional[float] = None, depth: int = 0, sphere_res: int = 4,
                     segment: float = 0.25) -> PointCloud:
    """A is a Cantor set of dimension a on [0, segment] e_1 (A = {0} if a is None)."""
    if d < 2:
        raise ParamError("d must be >= 2")
    if a is None or depth == 0:
        A = np.zeros((1, d))
    else:
        if not 0 < a < 1:
            raise ParamError("a must lie in (0, 1)")
        c = cantor_positions(depth, 2.0 ** (-1 / a))
        A = np.zeros((len(c), d))
        A[:, 0] = segment * c
    S = cube_sphere_net(d, sphere_res)
    summed = (A[:, None, :] + S[None, :, :]).reshape(-1, d)
    pts = np.concatenate([A, summed])
    return PointCloud(pts, 1.0 / sphere_res, {
        "name": "sphere_sum",
        "params": {"d": d, "a": a, "depth": depth, "sphere_res": sphere_res, "segment": segment},
        "blocks": {"A": [0, len(A)], "sum": [len(A), len(pts)]},
        "sphere_points": len(S),
    })


# --------------------------------------------------------------------------
# Valtr lattice


def build_valtr_lattice(d: int, m: int, alpha: float):
    if m < 2:
        raise ParamError("m must be >= 2")
    if d < 2:
        raise ParamError("d must be >= 2")
    if not 0 < alpha <= d:
        raise ParamError("alpha must lie in (0, d]")
    M = m**d
    q = m ** (d + 1)
    axes = [np.arange(M + 1) / M] * (d - 1) + [np.arange(M * M + 1) / (M * M)]
    pts = np.stack([g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    delta = q ** (-d / alpha)
    return (PointCloud(pts, delta, {"name": "valtr_lattice",
                                    "params": {"d": d, "m": m, "alpha": alpha, "q": q}}),
            ScaleSequence((delta,)))


def valtr_unit_pair_count(d: int, m: int) -> int:
    """Exact number of ordered pairs (x, y) of the lattice with ||x - y||_B = 1.

    With M = m^d, a difference (a'/M, b/M^2) lies on the unit sphere of B
    iff |b| = M^2 - |a'|^2. Each integer offset contributes the number of
    base points that keep both ends inside the lattice box.
    """
    M = m**d
    M2 = M * M
    total = 0
    for a in itertools.product(range(-M, M + 1), repeat=d - 1):
        b = M2 - sum(v * v for v in a)
        if b < 0:
            continue
        f = 1
        for v in a:
            f *= M + 1 - abs(v)
        f *= M2 + 1 - b
        total += f if b == 0 else 2 * f
    return total


# --------------------------------------------------------------------------


def pattern_gap_error(cloud: PointCloud, tuples: np.ndarray, shape: GapGraph,
                      metric: Metric = EUCLIDEAN) -> float:
    """Largest |phi - gap| over all pattern tuples and edges."""
    P = cloud.points
    worst = 0.0
    for i, j, g in shape.edges:
        vals = metric(P[tuples[:, i - 1]], P[tuples[:, j - 1]])
        worst = max(worst, float(np.max(np.abs(vals - g))))
    return worst
