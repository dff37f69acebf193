"""Config-driven pipelines: construction -> counting -> fit -> bound comparison."""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import bounds as B
from . import constructions as C
from .counting import count_gap_graph
from .dimension import ExponentFit, fit_exponent
from .errors import ConfigError, FracConfError, ParamError
from .geometry import GapGraph, PointCloud
from .metrics import get_metric

# --------------------------------------------------------------------------
# construction registry: name -> (builder, [(param, type, default)])

_float_list = "floats"
_int_list = "ints"


def _first(x):
    return x[0] if isinstance(x, tuple) else x


CONSTRUCTIONS: dict = {
    "valtr_lattice": (
        lambda p: C.build_valtr_lattice(p["d"], p["m"], p["alpha"]),
        [("d", int, 2), ("m", int, 2), ("alpha", float, 2.0)],
    ),
    "lattice": (
        lambda p: C.build_lattice_example(C.LatticeParams(p["d"], p["alpha"], tuple(p["q_seq"]), p["level"])),
        [("d", int, 2), ("alpha", float, 1.0), ("q_seq", _int_list, [4, 16, 256]), ("level", int, 1)],
    ),
    "train_track": (
        lambda p: C.build_train_track(C.TrainTrackParams(p["alpha"], tuple(p["R_seq"]), p["level"])),
        [("alpha", float, 1.5), ("R_seq", _float_list, [256.0]), ("level", int, 1)],
    ),
    "sphere_cantor": (
        lambda p: C.build_sphere_cantor(p["m"], p["radius"], p["alpha"], p["depth"], p["offset"]),
        [("m", int, 2), ("radius", float, 1.0), ("alpha", float, 1.0), ("depth", int, 8), ("offset", float, 0.0)],
    ),
    "cantor_line": (
        lambda p: C.build_cantor_line(p["depth"], p["ratio"]),
        [("depth", int, 10), ("ratio", float, 1.0 / 3.0)],
    ),
    "cantor_product": (
        lambda p: C.build_cantor_product(p["depth"], p["dims"], p["ratio"]),
        [("depth", int, 6), ("dims", int, 2), ("ratio", float, 1.0 / 3.0)],
    ),
    "product_chain": (
        lambda p: C.build_product_chain_example(p["d"], p["gaps"], p["alpha"], p["depth"]),
        [("d", int, 2), ("gaps", _float_list, [1.0, 1.0]), ("alpha", float, 1.0), ("depth", int, 5)],
    ),
    "orthogonal_spheres": (
        lambda p: C.build_orthogonal_spheres(p["d"], len(p["gaps"]), p["gaps"], p["n_per_sphere"],
                                             p["alpha"], p["seed"]),
        [("d", int, 4), ("gaps", _float_list, [1.0, 1.5, 2.0]), ("n_per_sphere", int, 32),
         ("alpha", float, None), ("seed", int, 0)],
    ),
    "special_3chain": (
        lambda p: C.build_special_3chain(p["d"], p["gaps"], p["n"], p["alpha"], p["seed"]),
        [("d", int, 4), ("gaps", _float_list, [1.0, 1.2, 1.0]), ("n", int, 16), ("alpha", float, None),
         ("seed", int, 0)],
    ),
    "circle_pair": (
        lambda p: C.build_circle_pair(p["t1"], p["t2"], p["alpha"], p["depth"]),
        [("t1", float, 1.0), ("t2", float, 1.5), ("alpha", float, 1.0), ("depth", int, 6)],
    ),
    "acute_tripod": (
        lambda p: C.build_acute_tripod(p["d"], p["gaps"], p["n"], p["alpha"], p["seed"]),
        [("d", int, 6), ("gaps", _float_list, [1.0, 1.0, 1.0]), ("n", int, 16), ("alpha", float, None),
         ("seed", int, 0)],
    ),
    "sphere_sum": (
        lambda p: C.build_sphere_sum(p["d"], p["a"], p["depth"], p["sphere_res"]),
        [("d", int, 3), ("a", float, None), ("depth", int, 0), ("sphere_res", int, 4)],
    ),
    "unit_cube_grid": (
        lambda p: C.unit_cube_grid(p["d"], p["n"]),
        [("d", int, 2), ("n", int, 64)],
    ),
}


def _coerce(kind, value, path):
    if value is None:
        return None
    try:
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind is float:
            return float(value)
        if kind == _float_list:
            return [float(v) for v in (value.split(",") if isinstance(value, str) else value)]
        if kind == _int_list:
            return [int(v) for v in (value.split(",") if isinstance(value, str) else value)]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot interpret {value!r} as {getattr(kind, '__name__', kind)}", path)
    return value


def resolve_params(name: str, params: Optional[dict], path="construction") -> dict:
    if name not in CONSTRUCTIONS:
        raise ConfigError(f"unknown construction {name!r}", f"{path}.name")
    spec = CONSTRUCTIONS[name][1]
    params = dict(params or {})
    known = {p for p, _, _ in spec}
    extra = set(params) - known
    if extra:
        raise ConfigError(f"unknown parameter(s) {sorted(extra)}", f"{path}.params")
    return {p: _coerce(k, params.get(p, dflt), f"{path}.params.{p}") for p, k, dflt in spec}


def build_construction(name: str, params: Optional[dict] = None) -> PointCloud:
    p = resolve_params(name, params)
    return _first(CONSTRUCTIONS[name][0](p))


# --------------------------------------------------------------------------
# config


DEFAULTS = {
    "name": "experiment",
    "seed": 0,
    "metric": "euclidean",
    "tolerance": {"mode": "resolution", "factor": 2.0},
    "counting": "exact",
    "bounds": [],
    "margin": 0.0,
    "trim": 0,
    "output": {"dir": None},
}


def _shape_from(obj, path="shape") -> GapGraph:
    if isinstance(obj, GapGraph):
        return obj
    if not isinstance(obj, dict):
        raise ConfigError("shape must be a table", path)
    try:
        if "edges" in obj:
            return GapGraph.from_json(obj)
        kind = obj.get("kind")
        gaps = [float(g) for g in obj.get("gaps", [])]
        if kind == "chain":
            return GapGraph.chain(gaps, obj.get("pin"))
        if kind == "star":
            return GapGraph.star(gaps, obj.get("pin"))
        if kind == "triangle":
            return GapGraph.triangle(*gaps, pin=obj.get("pin"))
        if kind == "kite":
            return GapGraph.kite(gaps, obj.get("pin"))
    except FracConfError as exc:
        raise ConfigError(str(exc), path) from exc
    except TypeError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown shape kind {obj.get('kind')!r}", f"{path}.kind")


def resolve_config(raw: dict) -> dict:
    """Fill defaults and validate; returns a plain, JSON-serialisable dict."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a table")
    cfg = copy.deepcopy(DEFAULTS)
    for k, v in raw.items():
        if k not in DEFAULTS and k not in ("construction", "shape", "scales"):
            raise ConfigError("unknown field", k)
        cfg[k] = copy.deepcopy(v)
    if "construction" not in cfg or not isinstance(cfg["construction"], dict):
        raise ConfigError("missing construction table", "construction")
    cons = cfg["construction"]
    if "name" not in cons:
        raise ConfigError("missing construction name", "construction.name")
    cons["params"] = resolve_params(cons["name"], cons.get("params"))
    if "shape" not in cfg:
        raise ConfigError("missing shape", "shape")
    shape = _shape_from(cfg["shape"])
    cfg["shape"] = json.loads(shape.to_json())
    try:
        get_metric(cfg["metric"])
    except ParamError as exc:
        raise ConfigError(str(exc), "metric") from exc
    sc = cfg.get("scales")
    if not isinstance(sc, dict) or "vary" not in sc or "values" not in sc:
        raise ConfigError("scales needs 'vary' and 'values'", "scales")
    kinds = {p: k for p, k, _ in CONSTRUCTIONS[cons["name"]][1]}
    if sc["vary"] not in kinds:
        raise ConfigError(f"{sc['vary']!r} is not a parameter of {cons['name']}", "scales.vary")
    sc["values"] = [_coerce(kinds[sc["vary"]], v, f"scales.values[{i}]") for i, v in enumerate(sc["values"])]
    if not sc["values"]:
        raise ConfigError("no scale values", "scales.values")
    tol = cfg["tolerance"]
    if tol.get("mode") not in ("absolute", "resolution"):
        raise ConfigError("mode must be 'absolute' or 'resolution'", "tolerance.mode")
    if tol["mode"] == "absolute" and not float(tol.get("delta", 0)) > 0:
        raise ConfigError("absolute tolerance needs delta > 0", "tolerance.delta")
    if tol["mode"] == "resolution":
        tol.setdefault("factor", 2.0)
    if cfg["counting"] not in ("exact", "lattice_identity", "pattern"):
        raise ConfigError(f"unknown counting method {cfg['counting']!r}", "counting")
    if cfg["counting"] == "lattice_identity":
        if cons["name"] != "valtr_lattice":
            raise ConfigError("lattice_identity counting needs the valtr_lattice construction", "counting")
        if shape.vertex_count != 2 or shape.gaps != (1.0,):
            raise ConfigError("lattice_identity counts unit pairs: shape must be a 1-chain of gap 1", "shape")
    for i, b in enumerate(cfg["bounds"]):
        if not isinstance(b, dict) or b.get("name") not in B.BOUND_NAMES:
            raise ConfigError(f"unknown bound {b!r}", f"bounds[{i}].name")
    cfg["seed"] = int(cfg["seed"])
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


PRESETS = {
    "valtr-pairs-d2": {
        "name": "valtr-pairs-d2",
        "construction": {"name": "valtr_lattice", "params": {"d": 2, "alpha": 2.0}},
        "shape": {"kind": "chain", "gaps": [1.0]},
        "metric": "paraboloid",
        "scales": {"vary": "m", "values": [2, 3, 4, 5, 6]},
        "counting": "lattice_identity",
        "bounds": [{"name": "valtr_lower", "k": 1, "d": 2, "alpha": 2.0}],
        "margin": 0.2,
    },
    "orthogonal-chains": {
        "name": "orthogonal-chains",
        "construction": {"name": "orthogonal_spheres", "params": {"d": 4, "gaps": [1.0, 1.5, 2.0]}},
        "shape": {"kind": "chain", "gaps": [1.0, 1.5, 2.0]},
        "metric": "euclidean",
        "scales": {"vary": "n_per_sphere", "values": [4, 8, 16, 32]},
        "tolerance": {"mode": "absolute", "delta": 1e-9},
        "counting": "exact",
        "bounds": [{"name": "chain_trivial_upper", "k": 3, "d": 4, "alpha": 1.0}],
        "margin": 0.05,
    },
}


# --------------------------------------------------------------------------
# running


@dataclass
class CountReport:
    per_scale: list
    fitted_exponent: float
    exponent_stderr: float
    theory_bounds: list
    verdict: str
    rows: list = field(default_factory=list)
    fit: Optional[ExponentFit] = None
    config: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0

    def to_dict(self):
        return {
            "config": self.config,
            "per_scale": [list(p) for p in self.per_scale],
            "rows": self.rows,
            "fitted_exponent": self.fitted_exponent,
            "exponent_stderr": self.exponent_stderr,
            "fit": self.fit.to_dict() if self.fit else None,
            "theory_bounds": [b.to_dict() for b in self.theory_bounds],
            "verdict": self.verdict,
            "elapsed_ms": self.elapsed_ms,
        }


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except FracConfError as exc:
        raise exc.with_stage(name)
    except (ValueError, ArithmeticError, MemoryError) as exc:
        raise FracConfError(f"{type(exc).__name__}: {exc}").with_stage(name) from exc


def _count_one(cfg, cloud, shape, metric, delta):
    method = cfg["counting"]
    if method == "lattice_identity":
        p = cloud.provenance["params"]
        return C.valtr_unit_pair_count(p["d"], p["m"])
    if method == "pattern":
        fn = {"orthogonal_spheres": C.orthogonal_pattern, "special_3chain": C.special_3chain_pattern,
              "circle_pair": C.circle_pair_pattern, "acute_tripod": C.tripod_pattern}.get(cloud.provenance["name"])
        if fn is None:
            raise ParamError(f"no pattern for construction {cloud.provenance['name']}")
        T, pshape = fn(cloud)
        err = C.pattern_gap_error(cloud, T, pshape, metric)
        if err > max(delta, 1e-12):
            raise ParamError(f"pattern tuples miss their gaps by {err:.3g}")
        return len(T)
    return count_gap_graph(cloud, shape, metric, delta, threads=cfg.get("threads"))


def run_experiment(config: dict, out_dir=None, threads: Optional[int] = None) -> CountReport:
    t0 = time.perf_counter()
    cfg = _stage("config", resolve_config, config)
    if threads:
        cfg["threads"] = int(threads)
    np.random.seed(cfg["seed"])  # nothing draws from it; pinned for third-party code
    shape = GapGraph.from_json(cfg["shape"])
    cons = cfg["construction"]
    rows = []
    for level, val in enumerate(cfg["scales"]["values"], start=1):
        params = dict(cons["params"])
        params[cfg["scales"]["vary"]] = val
        if "seed" in params:
            params["seed"] = cfg["seed"]
        cloud = _stage("construction", build_construction, cons["name"], params)
        metric = _stage("metric", get_metric, cfg["metric"], cloud.ambient_dim)
        tol = cfg["tolerance"]
        delta = float(tol["delta"]) if tol["mode"] == "absolute" else float(tol["factor"]) * cloud.resolution
        count = _stage("counting", _count_one, cfg, cloud, shape, metric, delta)
        rows.append({"level": level, "delta": cloud.resolution, "n_points": len(cloud), "count": int(count),
                     "log_count": math.log(count) if count > 0 else float("-inf"), "delta_pred": delta,
                     cfg["scales"]["vary"]: val})
    usable = [(r["delta"], r["count"]) for r in rows if r["count"] > 0]
    trim = int(cfg["trim"])
    if trim and len(usable) - 2 * trim >= 3:
        usable = usable[trim:len(usable) - trim]
    fit = None
    bvals = []
    for b in cfg["bounds"]:
        args = {k: v for k, v in b.items() if k != "name"}
        bvals.append(_stage("bounds", B.evaluate, b["name"], **args))
    if len(usable) >= 3:
        fit = _stage("fit", fit_exponent, usable)
        v = B.verdict(fit, bvals, float(cfg["margin"]))
    else:
        v = "inconclusive"
    report = CountReport(
        per_scale=[(r["delta"], r["count"]) for r in rows],
        fitted_exponent=fit.slope if fit else float("nan"),
        exponent_stderr=fit.stderr if fit else float("nan"),
        theory_bounds=bvals,
        verdict=v,
        rows=rows,
        fit=fit,
        config=cfg,
        elapsed_ms=1000 * (time.perf_counter() - t0),
    )
    out_dir = out_dir or cfg["output"].get("dir")
    if out_dir:
        _stage("output", write_outputs, report, out_dir)
    return report


SCALE_COLUMNS = ("level", "delta", "n_points", "count", "log_count")


def scales_csv_text(report: CountReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCALE_COLUMNS)
    for r in report.rows:
        w.writerow([r["level"], repr(r["delta"]), r["n_points"], r["count"], repr(r["log_count"])])
    return buf.getvalue()


def write_outputs(report: CountReport, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scales.csv").write_text(scales_csv_text(report))
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, default=str) + "\n")
    paths = {"scales": str(out / "scales.csv"), "report": str(out / "report.json")}
    if report.fit is not None:
        (out / "plot.csv").write_text(emit_plot_data(report))
        paths["plot"] = str(out / "plot.csv")
    return paths


def emit_plot_data(report: CountReport) -> str:
    """Rows (log(1/delta), log N, fit) per scale plus the two fit endpoints."""
    if not report.rows or report.fit is None:
        raise ParamError("report has no fitted scales to plot")
    fit = report.fit
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("kind", "log_inv_delta", "log_count", "fit"))
    xs = []
    for r in report.rows:
        if r["count"] <= 0:
            continue
        x = -math.log(r["delta"])
        xs.append(x)
        w.writerow(("data", repr(x), repr(math.log(r["count"])), repr(float(fit.predict(x)))))
    for x in (min(xs), max(xs)):
        w.writerow(("fit", repr(x), "", repr(float(fit.predict(x)))))
    return buf.getvalue()
