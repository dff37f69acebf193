"""Concrete gap functions beyond the Euclidean distance, and a finite
difference audit of the rotational curvature (bordered Hessian) condition."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import AuditFailed, DimensionError, OutsideCap, ParamError
from .geometry import DOT_PRODUCT, EUCLIDEAN, Metric, as_point, external_metric


def _lam(a, b):
    # positive root of lam^2 - a*lam - b^2 = 0 with a = |x_d|, b = |x'|
    return 0.5 * (a + np.sqrt(a * a + 4.0 * b * b))


@dataclass(frozen=True)
class ParaboloidBody:
    """Two paraboloid caps x_d = +-(1 - |x'|^2) glued along |x'| = 1.

    The ridge is left unsmoothed. ``ridge_margin`` rejects vectors whose ray
    leaves B within that relative distance of the ridge.
    """

    d: int = 2
    ridge_margin: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise DimensionError("paraboloid body needs d >= 2")
        if not 0.0 <= self.ridge_margin < 1.0:
            raise ParamError("ridge_margin must lie in [0, 1)")

    def contains(self, x) -> bool:
        p = as_point(x, self.d)
        r2 = float(np.sum(p[:-1] ** 2))
        return r2 <= 1.0 and abs(p[-1]) <= 1.0 - r2

    def norm(self, x) -> float:
        p = as_point(x, self.d)
        b = float(np.linalg.norm(p[:-1]))
        lam = float(_lam(abs(p[-1]), b))
        if lam > 0 and b / lam > 1.0 - self.ridge_margin:
            raise OutsideCap(f"ray of {p.tolist()} exits near the ridge (|x'|/lam = {b / lam:.6g})")
        return lam

    def norms(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        return _lam(np.abs(V[..., -1]), np.sqrt(np.sum(V[..., :-1] ** 2, axis=-1)))


def paraboloid_norm(x, ridge_margin: float = 0.0) -> float:
    p = as_point(x)
    return ParaboloidBody(p.size, ridge_margin).norm(p)


def _parab_func(X, Y):
    V = np.asarray(Y, dtype=float) - np.asarray(X, dtype=float)
    return _lam(np.abs(V[..., -1]), np.sqrt(np.sum(V[..., :-1] ** 2, axis=-1)))


def _parab_box_range(lo, hi):
    near = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    far = np.maximum(np.abs(lo), np.abs(hi))
    # lam is increasing in both |x_d| and |x'|
    lo_v = _lam(near[-1], np.sqrt(np.sum(near[:-1] ** 2)))
    hi_v = _lam(far[-1], np.sqrt(np.sum(far[:-1] ** 2)))
    return float(lo_v), float(hi_v)


def paraboloid_metric(d: int = 2) -> Metric:
    if d < 2:
        raise DimensionError("paraboloid metric needs d >= 2")
    return Metric("paraboloid_body", _parab_func, True, d, True, _parab_box_range)


def _linear(X, Y):
    return np.asarray(X, dtype=float)[..., 0] - np.asarray(Y, dtype=float)[..., 0]


LINEAR = external_metric(_linear, symmetric=False)


def get_metric(name: str, d: int | None = None) -> Metric:
    if name == "euclidean":
        return EUCLIDEAN
    if name == "dot_product":
        return DOT_PRODUCT
    if name in ("paraboloid", "paraboloid_body"):
        return paraboloid_metric(d or 2)
    if name == "linear":
        return LINEAR
    raise ParamError(f"unknown metric {name!r}")


# --------------------------------------------------------------------------
# level set samplers


def sample_level_set(metric_name: str, t: float, n: int, d: int = 2, seed: int = 0):
    """n pairs (x, y) with phi(x, y) = t (to rounding)."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    if metric_name == "euclidean":
        U = rng.normal(size=(n, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        Y = X + t * U
    elif metric_name == "dot_product":
        Z = rng.normal(size=(n, d))
        nx2 = np.sum(X * X, axis=1, keepdims=True)
        Z -= np.sum(Z * X, axis=1, keepdims=True) / nx2 * X
        Y = t * X / nx2 + Z
    elif metric_name in ("paraboloid", "paraboloid_body"):
        # unit-sphere points of B strictly inside a cap
        V = rng.normal(size=(n, d - 1))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        V *= rng.uniform(0.1, 0.8, size=(n, 1))
        h = (1.0 - np.sum(V * V, axis=1)) * rng.choice([-1.0, 1.0], size=n)
        Y = X + t * np.column_stack([V, h])
    elif metric_name == "linear":
        Y = rng.uniform(-1.0, 1.0, size=(n, d))
        Y[:, 0] = X[:, 0] - t
    else:
        raise ParamError(f"no sampler for metric {metric_name!r}")
    return [(X[i], Y[i]) for i in range(n)]


# --------------------------------------------------------------------------
# Phong-Stein audit


@dataclass(frozen=True)
class PhongSteinReport:
    t: float
    min_grad_x: float
    min_grad_y: float
    min_abs_ma_det: float
    sample_count: int
    h: float
    dets: tuple = ()

    def passes(self, tol: float = 1e-3) -> bool:
        return self.min_grad_x > tol and self.min_grad_y > tol and self.min_abs_ma_det > tol

    def to_dict(self):
        out = asdict(self)
        out.pop("dets")
        return out


def _one_sample(f, x, y, h):
    d = x.size
    eye = np.eye(d) * h
    gx = np.array([(f(x + eye[i], y) - f(x - eye[i], y)) / (2 * h) for i in range(d)])
    gy = np.array([(f(x, y + eye[j]) - f(x, y - eye[j])) / (2 * h) for j in range(d)])
    H = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            H[i, j] = (
                f(x + eye[i], y + eye[j])
                - f(x + eye[i], y - eye[j])
                - f(x - eye[i], y + eye[j])
                + f(x - eye[i], y - eye[j])
            ) / (4 * h * h)
    M = np.zeros((d + 1, d + 1))
    M[0, 1:] = gx
    M[1:, 0] = -gy
    M[1:, 1:] = H
    return np.linalg.norm(gx), np.linalg.norm(gy), np.linalg.det(M)


def phong_stein_audit(phi: Metric, t: float, samples, h: float = 1e-5,
                      tol_onset: float = 1e-6, threads: int | None = None) -> PhongSteinReport:
    if t == 0:
        raise ParamError("t must be nonzero")
    if not h > 0:
        raise ParamError("h must be positive")
    samples = [(as_point(x), as_point(y)) for x, y in samples]
    if not samples:
        raise ParamError("no samples")

    def f(a, b):
        return float(phi.func(a, b))

    for x, y in samples:
        if abs(f(x, y) - t) > tol_onset:
            raise ParamError(f"sample off the level set: phi = {f(x, y)!r}, t = {t!r}")

    with np.errstate(over="raise", invalid="raise"):
        try:
            if threads and threads > 1:
                with ThreadPoolExecutor(threads) as pool:
                    rows = list(pool.map(lambda s: _one_sample(f, s[0], s[1], h), samples))
            else:
                rows = [_one_sample(f, x, y, h) for x, y in samples]
        except FloatingPointError as exc:
            raise AuditFailed(f"numeric overflow in finite differences: {exc}") from exc
    arr = np.array(rows)
    if not np.all(np.isfinite(arr)):
        raise AuditFailed("non-finite derivative estimate")
    return PhongSteinReport(
        t=float(t),
        min_grad_x=float(arr[:, 0].min()),
        min_grad_y=float(arr[:, 1].min()),
        min_abs_ma_det=float(np.abs(arr[:, 2]).min()),
        sample_count=len(samples),
        h=float(h),
        dets=tuple(float(v) for v in arr[:, 2]),
    )
