"""Multi-scale measurement: box counts, log-log fits, binary-cube content,
discrete regularity audits and a slicing (Fubini) check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

from .errors import NotApplicable, ParamError
from .geometry import PointCloud


def dyadic_floor(delta: float) -> float:
    """Largest 2^-j (any integer j) not exceeding delta."""
    if not delta > 0:
        raise ParamError("delta must be positive")
    m, e = math.frexp(delta)  # delta = m * 2^e, m in [0.5, 1)
    return math.ldexp(1.0, e - 1) if m != 0.5 else delta


def _points(cloud):
    return cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float).reshape(len(cloud), -1)


def box_count(cloud, delta: float) -> int:
    """Occupied half-open dyadic cells of side delta (snapped down to 2^-j)."""
    s = dyadic_floor(delta)
    keys = np.floor(_points(cloud) / s).astype(np.int64)
    return int(len(np.unique(keys, axis=0)))


@dataclass(frozen=True)
class ExponentFit:
    points: tuple
    slope: float
    stderr: float
    r_squared: float
    intercept: float = 0.0

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept

    def to_dict(self):
        return {"slope": self.slope, "stderr": self.stderr, "r_squared": self.r_squared,
                "intercept": self.intercept, "points": [list(p) for p in self.points]}


def fit_exponent(scales) -> ExponentFit:
    """OLS of log N against log(1/delta) over (delta, N) pairs."""
    pairs = [(float(d), float(n)) for d, n in scales]
    if len(pairs) < 3:
        raise ParamError(f"need at least 3 scales, got {len(pairs)}")
    if any(d <= 0 or n < 1 for d, n in pairs):
        raise ParamError("scales need delta > 0 and count >= 1")
    x = np.array([-math.log(d) for d, _ in pairs])
    y = np.array([math.log(n) for _, n in pairs])
    if np.ptp(x) == 0:
        raise ParamError("scales must not all be equal")
    res = linregress(x, y)
    slope = float(res.slope)
    if not math.isfinite(slope):
        raise ParamError("fit produced a non-finite slope")
    r2 = float(res.rvalue**2) if np.ptp(y) > 0 else 1.0
    return ExponentFit(tuple(zip(x.tolist(), y.tolist())), slope, float(res.stderr), r2, float(res.intercept))


def dyadic_scales(j_min: int, j_max: int):
    return [2.0**-j for j in range(j_min, j_max + 1)]


def auto_scales(cloud, trim: int = 2):
    """Dyadic scales from 1/2 down to the cloud resolution, trimmed at both ends."""
    j_max = max(1, int(math.floor(-math.log2(cloud.resolution))))
    sc = dyadic_scales(1, j_max)
    if trim and len(sc) - 2 * trim >= 3:
        sc = sc[trim:len(sc) - trim]
    return sc


def box_dimension(cloud, scales: Optional[Sequence[float]] = None, trim: int = 2) -> ExponentFit:
    sc = list(scales) if scales is not None else auto_scales(cloud, trim)
    return fit_exponent([(s, box_count(cloud, s)) for s in sc])


def binary_cube_measure(cloud, s: float, delta: float) -> float:
    """min over dyadic 2^-j <= delta (down to the cloud resolution) of N_j * 2^(-j s)."""
    P = _points(cloud)
    d = P.shape[1]
    if not 0 <= s <= d:
        raise ParamError(f"s must lie in [0, {d}]")
    top = dyadic_floor(delta)
    if top > 1:
        raise ParamError("delta must be <= 1")
    res = cloud.resolution if isinstance(cloud, PointCloud) else top
    j0 = int(round(-math.log2(top)))
    j1 = max(j0, int(math.floor(-math.log2(res))))
    return min(box_count(P, 2.0**-j) * 2.0 ** (-j * s) for j in range(j0, j1 + 1))


# --------------------------------------------------------------------------
# regularity


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class RegularityAudit:
    level: Optional[int]
    delta: float
    alpha: float
    epsilon: float
    max_ratio: float
    witness: tuple

    def to_dict(self):
        return {"level": self.level, "delta": self.delta, "alpha": self.alpha, "epsilon": self.epsilon,
                "max_ratio": self.max_ratio, "witness": {"x": list(self.witness[0]), "r": self.witness[1]}}


def regularity_audit(cloud: PointCloud, delta: float, alpha: float, epsilon: float,
                     r_grid: Optional[Sequence[float]] = None, x_sample_count: Optional[int] = None,
                     extra_x: int = 0, seed: int = 0, level: Optional[int] = None) -> RegularityAudit:
    """max over (x, r) of |E_delta n B(x,r)| / ((r/delta)^(alpha+eps) delta^(d-eps)),
    with |E_delta n B(x,r)| estimated as (#net points in B(x,r)) * vol(B(0,delta))."""
    if not epsilon > 0:
        raise ParamError("epsilon must be positive")
    if not delta > 0:
        raise ParamError("delta must be positive")
    P = cloud.points
    d = P.shape[1]
    if r_grid is None:
        r_grid = []
        r = delta
        while r <= 1.0 + 1e-12:
            r_grid.append(r)
            r *= 2
    r_grid = [float(r) for r in r_grid if r >= delta * (1 - 1e-12)]
    if not r_grid:
        raise ParamError("no radius >= delta in r_grid")
    rng = np.random.default_rng(seed)
    X = P
    if x_sample_count is not None and x_sample_count < len(P):
        X = P[np.sort(rng.choice(len(P), size=x_sample_count, replace=False))]
    if extra_x:
        lo, hi = P.min(axis=0), P.max(axis=0)
        X = np.vstack([X, rng.uniform(lo, hi, size=(extra_x, d))])
    tree = cKDTree(P)
    vol = unit_ball_volume(d) * delta**d
    best, wit = -1.0, None
    for r in r_grid:
        cnt = tree.query_ball_point(X, r, return_length=True)
        ratio = cnt * vol / ((r / delta) ** (alpha + epsilon) * delta ** (d - epsilon))
        k = int(np.argmax(ratio))
        if ratio[k] > best:
            best, wit = float(ratio[k]), (tuple(float(v) for v in X[k]), r)
    return RegularityAudit(level, float(delta), float(alpha), float(epsilon), best, wit)


def ad_failure_witness(params, level: int) -> float:
    """w_i = (delta_i q_{i+1})^d delta_{i+1}^alpha / delta_i^alpha for the lattice example."""
    d, a, q = params.d, params.alpha, params.q_seq
    if a >= d:
        raise NotApplicable("alpha = d: the lattice set is AD regular")
    if not 1 <= level < len(q):
        raise ParamError(f"level {level} needs level {level + 1} in q_seq")
    di, dn = params.delta(level), params.delta(level + 1)
    return (di * q[level]) ** d * dn**a / di**a


def ad_ratio_closed_form(d: int, alpha: float, q_i: float) -> float:
    return float(q_i) ** (d * (1 - d / alpha))


def ad_witness_direct(params, level: int) -> dict:
    """Direct count: level-(i+1) net points in the open ball B(x, delta_i), max
    over level-i net points x, times (delta_{i+1} / delta_i)^alpha."""
    from .constructions import LatticeParams, lattice_levels

    if not 1 <= level < len(params.q_seq):
        raise ParamError(f"level {level} needs level {level + 1} in q_seq")
    p = LatticeParams(params.d, params.alpha, params.q_seq, level + 1)
    clouds = lattice_levels(p)
    coarse, fine = clouds[level - 1], clouds[level]
    di, dn = p.delta(level), p.delta(level + 1)
    tree = cKDTree(fine.points)
    # open ball: shrink the radius by a relative hair
    cnt = tree.query_ball_point(coarse.points, di * (1 - 1e-12), return_length=True)
    n_max = int(cnt.max())
    return {"level": level, "n_max": n_max, "w_direct": n_max * (dn / di) ** params.alpha,
            "bound_count": (di * params.q_seq[level]) ** params.d}


# --------------------------------------------------------------------------
# slicing


@dataclass(frozen=True)
class FubiniReport:
    dim_A: float
    min_slice_dim: float
    dim_B: float
    tolerance: float
    passes: bool
    slices_sampled: int

    def to_dict(self):
        return dict(self.__dict__)


def fubini_slice_check(B_cloud: PointCloud, slice_coords: int, s: Optional[float] = None,
                       t: Optional[float] = None, tolerance: float = 0.1, scales=None,
                       slice_samples: int = 16, seed: int = 0, min_slice_points: int = 8) -> FubiniReport:
    """Compare dim(B) with dim(A) + min slice dim, A the projection on the
    first `slice_coords` axes and slices grouped by exact projection value.

    `s` and `t`, when given, replace the estimated dim(A) and slice dimension."""
    P = B_cloud.points
    d = P.shape[1]
    if not 1 <= slice_coords < d:
        raise ParamError("slice_coords must lie in 1..d-1")
    proj = P[:, :slice_coords]
    keys, inv = np.unique(proj, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    if len(keys) == 0:
        raise ParamError("empty projection")
    sc = list(scales) if scales is not None else auto_scales(B_cloud)
    A = PointCloud(keys, B_cloud.resolution, {"name": "projection"})
    dim_A = s if s is not None else box_dimension(A, sc).slope
    dim_B = box_dimension(B_cloud, sc).slope
    sizes = np.bincount(inv)
    # slices are only measured when t is not supplied
    eligible = np.flatnonzero(sizes >= (min_slice_points if t is None else 1))
    if len(eligible) == 0:
        raise ParamError("no slice has enough points")
    rng = np.random.default_rng(seed)
    pick = eligible if len(eligible) <= slice_samples else np.sort(rng.choice(eligible, slice_samples, replace=False))
    if t is not None:
        min_t = float(t)
    else:
        dims = []
        for g in pick:
            sl = P[inv == g, slice_coords:]
            dims.append(box_dimension(PointCloud(sl, B_cloud.resolution, {"name": "slice"}), sc).slope)
        min_t = float(min(dims))
    ok = dim_B >= dim_A + min_t - tolerance
    return FubiniReport(float(dim_A), min_t, float(dim_B), tolerance, bool(ok), int(len(pick)))
