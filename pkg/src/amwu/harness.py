"""Command-line harness: presets, trace export, comparisons, avoidance studies.

Usage::

    amwu presets
    amwu run --preset rosenbrock --out results/ --svg
    amwu compare --preset rosenbrock --algo amwu_ragd,mwu,amd_r3,amd_r9
    amwu avoidance --preset trig1 --trials 500 --radius 0.05 --seed 0
    amwu spectra --preset trig1 --out results/

Exit codes: 0 success, 1 usage or config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import re
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import algorithms as alg
from . import geometry as geo
from . import objectives as objs
from . import schedule as sch
from . import spectral as spec

log = logging.getLogger(__name__)

CSV_FIXED_COLUMNS = ("t", "f", "grad_norm")
SPECTRA_COLUMNS = ("point", "lambda_min", "local_max", "b_d", "c_d", "discriminant",
                   "larger_root", "max_eig", "unstable", "ineq_step", "c_positive",
                   "jacobian_deviation", "admissible")


class ConfigError(ValueError):
    pass


class NoSaddleFound(RuntimeError):
    pass


class UsageError(Exception):
    pass


# -- configuration ----------------------------------------------------------

@dataclass
class ExperimentConfig:
    objective: str
    algorithms: list = field(default_factory=lambda: ["amwu_ragd", "mwu", "amd"])
    alpha: float = 0.01
    beta: float = 0.1
    mu: float = 0.5
    r: float = 3.0
    x0: Optional[list] = None
    v0: Optional[list] = None
    gamma0: Optional[float] = None
    lipschitz_L: Optional[float] = None
    max_iters: int = 2000
    grad_tol: float = 0.0
    seed: int = 0
    trace_every: int = 1
    mode: str = "ragd"
    weighted_denominator: bool = True
    threshold: Optional[float] = None
    trials: int = 500
    radius: float = 0.05
    classify_radius: float = 1e-3
    avoidance_iters: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = [a for a in self.algorithms.split(",") if a]
        self.algorithms = list(self.algorithms)
        try:
            obj = objs.get_objective(self.objective)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        if self.mode not in alg.MODES:
            raise ConfigError(f"mode must be one of {alg.MODES}")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.trace_every < 1:
            raise ConfigError("trace_every must be >= 1")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        for name in self.algorithms:
            _parse_algorithm(name, self)
        if self.x0 is None:
            self.x0 = _barycenter(obj.block_dims).tolist()
        for key in ("x0", "v0"):
            val = getattr(self, key)
            if val is None:
                continue
            val = [float(v) for v in val]
            if len(val) != obj.dim:
                raise ConfigError(f"{key} has {len(val)} entries, objective needs {obj.dim}")
            try:
                geo.validate_product(val, obj.block_dims)
            except geo.GeometryError as exc:
                raise ConfigError(f"{key}: {exc}") from None
            setattr(self, key, val)
        try:
            self.schedule_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def obj(self):
        return objs.get_objective(self.objective)

    def schedule_params(self):
        lip = math.inf if self.lipschitz_L is None else self.lipschitz_L
        return sch.ScheduleParams(self.alpha, self.beta, self.mu, lip)

    def admissible(self):
        return self.schedule_params().admissible

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "config" in data and isinstance(data["config"], dict):
            data = dict(data["config"])  # a run sidecar
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "objective" not in data:
            raise ConfigError("config needs an 'objective'")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _barycenter(dims):
    return np.concatenate([np.full(d, 1.0 / d) for d in dims])


def _normalized(x0, dims):
    x0 = np.asarray(x0, dtype=float)
    return np.concatenate([geo.renormalize(b) for b in geo.split_blocks(x0, dims)]).tolist()


PRESETS = {
    "rosenbrock": dict(objective="rosenbrock", x0=[0.2, 0.4, 0.4], alpha=0.01, beta=0.001, mu=1.0,
                       max_iters=2000, algorithms=["amwu_ragd", "mwu", "amd_r3", "amd_r9"]),
    "bohachevsky": dict(objective="bohachevsky", x0=[0.35, 0.3, 0.35], alpha=0.001, beta=0.1,
                        mu=1.0, max_iters=5000, algorithms=["amwu_ragd", "mwu", "amd_r3", "amd_r9"]),
    # the quoted start (0.42, 0.24, 0.33) sums to 0.99 and is rescaled onto the simplex
    "trig1": dict(objective="trig1", x0=_normalized([0.42, 0.24, 0.33], (3,)), alpha=0.005,
                  beta=0.1, mu=0.2, max_iters=2000, algorithms=["amwu_ragd", "mwu", "amd"]),
    "trig2": dict(objective="trig2", x0=[0.6, 0.2, 0.2], alpha=0.01, beta=0.001, mu=0.001,
                  max_iters=2000, algorithms=["amwu_ragd", "mwu", "amd"]),
    "two_agent": dict(objective="two_agent", x0=[0.3, 0.7, 0.6, 0.4], alpha=0.001, beta=0.1,
                      mu=0.5, max_iters=5000, algorithms=["amwu_ragd", "mwu"]),
}


def preset_config(name, **overrides):
    try:
        base = dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**base)


def load_config(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(data)


def canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def content_hash(data):
    """Git blob id (sha1 over ``"blob <len>\\0" + bytes``) of the canonical JSON."""
    raw = canonical_json(data).encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(raw) + raw).hexdigest()


# -- optimizers ---------------------------------------------------------------

_AMD_RE = re.compile(r"^amd(?:_r(\d+(?:\.\d+)?))?$")


def _parse_algorithm(name, cfg):
    if name == "mwu":
        return ("mwu", None)
    if name == "amwu":
        return ("amwu", cfg.mode)
    if name in ("amwu_literal", "amwu_ragd"):
        return ("amwu", name.split("_", 1)[1])
    m = _AMD_RE.match(name)
    if m:
        return ("amd", float(m.group(1)) if m.group(1) else float(cfg.r))
    raise ConfigError(f"unknown algorithm {name!r} (mwu, amwu, amwu_literal, amwu_ragd, amd, amd_r<r>)")


def build_optimizer(name, cfg):
    kind, arg = _parse_algorithm(name, cfg)
    if kind == "mwu":
        return alg.MWU(cfg.alpha)
    if kind == "amd":
        return alg.AMD(arg, cfg.alpha)
    dims = cfg.obj.block_dims
    params = cfg.schedule_params()
    plist = params if len(dims) == 1 else [params] * len(dims)
    return alg.AMWU(plist, mode=arg, gamma0=cfg.gamma0,
                    weighted_denominator=cfg.weighted_denominator)


def _label(name, cfg):
    kind, arg = _parse_algorithm(name, cfg)
    if kind == "amwu":
        return f"amwu_{arg}"
    if kind == "amd":
        return f"amd_r{arg:g}"
    return name


def run_algorithms(cfg):
    """Run every configured algorithm from ``cfg.x0``; returns ``{label: Trace}``."""
    if not cfg.algorithms:
        raise UsageError("no algorithms requested")
    obj = cfg.obj
    x0 = np.asarray(cfg.x0, dtype=float)
    v0 = None if cfg.v0 is None else np.asarray(cfg.v0, dtype=float)
    rc = alg.RunConfig(max_iters=cfg.max_iters, grad_tol=cfg.grad_tol,
                       trace_every=cfg.trace_every)
    if not cfg.admissible():
        warnings.warn(f"alpha={cfg.alpha} is not below the admissible step bound",
                      sch.ScheduleWarning, stacklevel=2)
    out = {}
    for name in cfg.algorithms:
        label = _label(name, cfg)
        if label in out:
            continue
        out[label] = alg.run(build_optimizer(name, cfg), obj, x0, v0, rc)
    return out


# -- output -----------------------------------------------------------------

def _num(v):
    return repr(float(v))


def trace_columns(obj):
    return list(CSV_FIXED_COLUMNS) + [f"x{i}" for i in range(obj.dim)]


def trace_csv(trace, obj):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_columns(obj))
    for rec in trace:
        w.writerow([rec.t, _num(rec.f_value), _num(rec.grad_norm)] + [_num(v) for v in rec.x])
    return buf.getvalue()


def schedule_trace(trace):
    rows = [[rec.t] + [list(map(float, s)) for s in rec.schedule]
            for rec in trace if rec.schedule]
    return {"columns": ["t", "per_schedule[s, gamma, gamma_bar, residual]"], "rows": rows}


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def cli_run(cfg, out_dir, svg=False):
    """Write one CSV per algorithm, a JSON sidecar and optionally an SVG; returns the paths."""
    out_dir = Path(out_dir)
    traces = run_algorithms(cfg)
    obj = cfg.obj
    paths = {}
    for label, trace in traces.items():
        paths[label] = _write(out_dir / f"{cfg.objective}_{label}.csv", trace_csv(trace, obj))
    config = cfg.to_dict()
    sidecar = {
        "config": config,
        "input_hash": content_hash(config),
        "version": __version__,
        "admissible": cfg.admissible(),
        "outputs": {k: p.name for k, p in paths.items()},
        "stopped_by": {k: t.stopped_by for k, t in traces.items()},
        "schedule": {k: schedule_trace(t) for k, t in traces.items() if t[0].schedule},
    }
    paths["sidecar"] = _write(out_dir / f"{cfg.objective}_run.json",
                              json.dumps(sidecar, indent=1, sort_keys=True) + "\n")
    if svg:
        paths["svg"] = _write(out_dir / f"{cfg.objective}_run.svg", render_svg(traces, obj, config))
    return paths


def smoothness(f):
    """Mean squared difference of successive values."""
    f = np.asarray(f, dtype=float)
    return float(np.mean(np.diff(f) ** 2)) if f.size > 1 else 0.0


def first_below(trace, threshold):
    hits = np.nonzero(trace.f <= threshold)[0]
    return int(trace.t[hits[0]]) if hits.size else None


def compare_rows(traces, threshold=None):
    finals = {k: float(t.f[-1]) for k, t in traces.items()}
    if threshold is None:
        threshold = min(finals.values()) + 1e-6
    rows = []
    for label, trace in traces.items():
        rows.append({"algorithm": label, "final_f": finals[label],
                     "first_below": first_below(trace, threshold),
                     "smoothness": smoothness(trace.f),
                     "final_grad_norm": float(trace.grad_norms[-1]),
                     "iterations": int(trace.t[-1])})
    return rows, threshold


def format_table(rows, threshold):
    head = f"{'algorithm':<14}{'final_f':>22}{'first<=thr':>12}{'smoothness':>14}{'grad_norm':>12}"
    lines = [f"threshold f <= {threshold:.10g}", head]
    for r in rows:
        fb = "-" if r["first_below"] is None else str(r["first_below"])
        lines.append(f"{r['algorithm']:<14}{r['final_f']:>22.15g}{fb:>12}"
                     f"{r['smoothness']:>14.4e}{r['final_grad_norm']:>12.3e}")
    return "\n".join(lines)


def cli_compare(cfg, out_dir=None):
    traces = run_algorithms(cfg)
    rows, thr = compare_rows(traces, cfg.threshold)
    if out_dir is not None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _write(Path(out_dir) / f"{cfg.objective}_compare.csv", buf.getvalue())
    return rows, thr


# -- saddle escape ---------------------------------------------------------

def metric_distance(x, center):
    """Norm of ``x - center`` in the metric at ``center``."""
    x = np.asarray(x, dtype=float)
    center = np.asarray(center, dtype=float)
    return geo.shahshahani_norm(center, x - center)


def escape_iteration(trace, saddle, radius=0.05, factor=10.0):
    """First ``t`` where ``|grad_M|`` exceeds ``factor`` times its minimum over the
    iterations spent within ``radius`` of ``saddle``; ``None`` if that never happens
    (in particular when the trajectory never comes within ``radius``)."""
    best = math.inf
    for rec in trace:
        if rec.grad_norm > factor * best:
            return rec.t
        if metric_distance(rec.x, saddle) <= radius:
            best = min(best, rec.grad_norm)
    return None


def encountered_saddle(trace, catalog):
    """The catalogued strict saddle closest (in its own metric) to any recorded ``x``."""
    saddles = [e for e in catalog if e.classification == "strict_saddle"]
    if not saddles:
        raise NoSaddleFound("catalog has no strict saddle")
    xs = np.array([rec.x for rec in trace])
    dists = [float(np.min(metric_distance(xs, e.point))) for e in saddles]
    i = int(np.argmin(dists))
    return saddles[i], dists[i]


# -- avoidance study --------------------------------------------------------

@dataclass
class AvoidanceReport:
    trials: int
    converged_to_saddle: int
    converged_to_min: int
    nonconverged: int
    final_points: np.ndarray
    final_grad_norms: np.ndarray
    nearest_lambda_min: np.ndarray
    start_saddle: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def saddle_fraction(self):
        return self.converged_to_saddle / self.trials if self.trials else 0.0

    def summary(self):
        return {"trials": self.trials, "converged_to_saddle": self.converged_to_saddle,
                "converged_to_min": self.converged_to_min, "nonconverged": self.nonconverged,
                "saddle_fraction": self.saddle_fraction}

    def to_json(self):
        data = dict(self.summary())
        data["config"] = self.config
        data["per_trial"] = [
            {"start_saddle": int(s), "final_point": [float(v) for v in p],
             "final_grad_norm": float(g), "nearest_lambda_min": float(lm)}
            for s, p, g, lm in zip(self.start_saddle, self.final_points,
                                   self.final_grad_norms, self.nearest_lambda_min)]
        return json.dumps(data, indent=1, sort_keys=True) + "\n"


def sample_metric_ball(center, dims, radius, rng, max_tries=1000):
    """Uniform draw from the tangent ball ``|w|_x <= radius`` mapped through ``Exp``.

    Draws leaving the open positive orthant (possible only through underflow)
    are rejected and redrawn.
    """
    basis = geo.product_tangent_basis(center, dims)
    m = basis.shape[1]
    for _ in range(max_tries):
        z = rng.standard_normal(m)
        z *= radius * rng.random() ** (1.0 / m) / np.linalg.norm(z)
        u = geo.product_to_exp_coords(center, basis @ z, dims)
        x = geo.product_exp(center, u, dims)
        if np.all(np.isfinite(x)) and np.all(x > 0):
            return x
    raise RuntimeError("rejection sampling failed to reach the interior")


def _trial_starts(saddles, dims, radius, seed, indices):
    out = np.empty((len(indices), int(sum(dims))))
    for row, i in enumerate(indices):
        rng = np.random.default_rng([seed, i])
        out[row] = sample_metric_ball(saddles[i % len(saddles)].point, dims, radius, rng)
    return out


def _classify_endpoints(final, catalog, classify_radius):
    pts = np.array([e.point for e in catalog])
    dist = np.max(np.abs(final[:, None, :] - pts[None, :, :]), axis=-1)
    nearest = np.argmin(dist, axis=1)
    labels = []
    for row, j in enumerate(nearest):
        if dist[row, j] > classify_radius:
            labels.append("nonconverged")
        else:
            labels.append({"strict_saddle": "saddle", "min": "min"}.get(
                catalog[j].classification, "nonconverged"))
    lam = np.array([catalog[j].lambda_min for j in nearest])
    return labels, lam


def cli_avoidance(cfg, trials=None, radius=None, seed=None, threads=1, catalog=None):
    """Monte-Carlo saddle-avoidance study for accelerated MWU.

    Trial ``i`` starts near strict saddle ``i mod k`` with its own generator
    seeded by ``(seed, i)``, so the result does not depend on ``threads``.
    """
    trials = cfg.trials if trials is None else int(trials)
    radius = cfg.radius if radius is None else float(radius)
    seed = cfg.seed if seed is None else int(seed)
    obj = cfg.obj
    dims = obj.block_dims
    catalog = objs.find_critical_points(obj) if catalog is None else catalog
    saddles = [e for e in catalog if e.classification == "strict_saddle"]
    if not saddles:
        raise NoSaddleFound(f"no strict saddle catalogued for {cfg.objective}")
    config = cfg.to_dict()
    config.update(trials=trials, radius=radius, seed=seed)
    n = obj.dim
    if trials == 0:
        empty = np.empty((0, n))
        return AvoidanceReport(0, 0, 0, 0, empty, np.empty(0), np.empty(0),
                               np.empty(0, dtype=int), config)
    iters = cfg.avoidance_iters or cfg.max_iters
    opt = build_optimizer("amwu", cfg)

    def work(indices):
        x0 = _trial_starts(saddles, dims, radius, seed, indices)
        return alg.run_batch(opt, obj, x0, iters)

    chunks = [c for c in np.array_split(np.arange(trials), max(1, int(threads))) if c.size]
    if len(chunks) == 1:
        finals = [work(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            finals = list(pool.map(work, chunks))
    final = np.concatenate(finals, axis=0)
    gnorm = np.atleast_1d(obj.grad_norm(final))
    labels, lam = _classify_endpoints(final, catalog, cfg.classify_radius)
    return AvoidanceReport(
        trials=trials,
        converged_to_saddle=labels.count("saddle"),
        converged_to_min=labels.count("min"),
        nonconverged=labels.count("nonconverged"),
        final_points=final, final_grad_norms=gnorm, nearest_lambda_min=lam,
        start_saddle=np.arange(trials) % len(saddles), config=config)


# -- spectra ----------------------------------------------------------------

def spectra_rows(cfg, catalog=None, schedule="initial"):
    obj = cfg.obj
    params = cfg.schedule_params()
    state = sch.stationary_state(params) if schedule == "stationary" else \
        sch.initial_state(params, cfg.gamma0)
    coeffs = state.coefficients()
    catalog = objs.find_critical_points(obj) if catalog is None else catalog
    rows = []
    for e in catalog:
        if e.classification != "strict_saddle":
            continue
        cert = spec.certify_unstable(e, coeffs)
        dev = spec.numerical_jacobian_check(obj, e.point, coeffs, mode=cfg.mode)
        rows.append({"point": " ".join(_num(v) for v in e.point), "lambda_min": cert.lambda_min,
                     "local_max": e.is_local_max, "b_d": cert.b, "c_d": cert.c,
                     "discriminant": cert.discriminant, "larger_root": complex(cert.larger_root),
                     "max_eig": cert.max_eig, "unstable": cert.unstable,
                     "ineq_step": cert.inequality_holds, "c_positive": cert.c_positive,
                     "jacobian_deviation": dev, "admissible": params.admissible})
    return rows


def spectra_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRA_COLUMNS)
    for r in rows:
        root = r["larger_root"]
        root_s = _num(root.real) if root.imag == 0 else f"{root.real!r}{root.imag:+.17g}j"
        w.writerow([r["point"], _num(r["lambda_min"]), r["local_max"], _num(r["b_d"]),
                    _num(r["c_d"]), _num(r["discriminant"]), root_s, _num(r["max_eig"]),
                    r["unstable"], r["ineq_step"], r["c_positive"],
                    _num(r["jacobian_deviation"]), r["admissible"]])
    return buf.getvalue()


def cli_spectra(cfg, out_dir=None, catalog=None):
    rows = spectra_rows(cfg, catalog)
    if not rows:
        warnings.warn(f"no strict saddles found for {cfg.objective}", RuntimeWarning, stacklevel=2)
    text = spectra_csv(rows)
    if out_dir is not None:
        _write(Path(out_dir) / f"{cfg.objective}_spectra.csv", text)
    return rows, text


# -- SVG --------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _polyline(pts, color):
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>'


def render_svg(traces, obj, config=None):
    """f-versus-t curves, plus a barycentric trajectory panel for one 2-simplex."""
    w, h, pad = 480, 320, 40
    tri = obj.block_dims == (3,)
    width = w * (2 if tri else 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" '
             f'font-family="sans-serif" font-size="11">']
    if config is not None:
        parts.append(f"<desc>{canonical_json(config)}</desc>")
    parts.append(f'<rect width="{width}" height="{h}" fill="white"/>')
    t_max = max(float(t.t[-1]) for t in traces.values()) or 1.0
    f_all = np.concatenate([t.f for t in traces.values()])
    lo, hi = float(np.min(f_all)), float(np.max(f_all))
    span = hi - lo or 1.0

    def to_xy(t, f):
        return pad + (w - 2 * pad) * t / t_max, h - pad - (h - 2 * pad) * (f - lo) / span

    parts.append(f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" height="{h - 2 * pad}" '
                 'fill="none" stroke="#444"/>')
    parts.append(f'<text x="{pad}" y="{pad - 8}">f(x_t), {obj.name}</text>')
    parts.append(f'<text x="{pad}" y="{h - 12}">t = 0 .. {t_max:g}; f in [{lo:.4g}, {hi:.4g}]</text>')
    for i, (label, trace) in enumerate(traces.items()):
        color = _COLORS[i % len(_COLORS)]
        parts.append(_polyline([to_xy(t, f) for t, f in zip(trace.t, trace.f)], color))
        parts.append(f'<text x="{w - pad - 90}" y="{pad + 14 * (i + 1)}" fill="{color}">{label}</text>')
    if tri:
        corners = np.array([[w + pad, h - pad], [2 * w - pad, h - pad], [1.5 * w, pad]])
        parts.append(_polyline([tuple(c) for c in corners] + [tuple(corners[0])], "#444"))
        for name, c in zip(("x", "y", "z"), corners):
            parts.append(f'<text x="{c[0] + 4:.1f}" y="{c[1] + 12:.1f}">{name}</text>')
        for i, trace in enumerate(traces.values()):
            xs = np.array([rec.x for rec in trace])
            parts.append(_polyline([tuple(p) for p in xs @ corners], _COLORS[i % len(_COLORS)]))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- command line ----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="amwu", description="Accelerated multiplicative weights experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="JSON config (or a run sidecar)")
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--algo", help="comma-separated algorithm names")
        sp.add_argument("--iters", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--mode", choices=alg.MODES)
        sp.add_argument("--out", type=Path)
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    common(sub.add_parser("run", help="run algorithms and export traces")).add_argument(
        "--svg", action="store_true")
    common(sub.add_parser("compare", help="final values and first-hit table"))
    av = common(sub.add_parser("avoidance", help="Monte-Carlo saddle avoidance"))
    av.add_argument("--trials", type=int)
    av.add_argument("--radius", type=float)
    av.add_argument("--threads", type=int, default=1)
    common(sub.add_parser("spectra", help="certify catalogued strict saddles"))
    sub.add_parser("presets", help="list built-in presets")
    return p


def resolve_config(args):
    if args.config is not None and args.preset is not None:
        raise UsageError("give --config or --preset, not both")
    over = {"algorithms": args.algo, "max_iters": args.iters, "seed": args.seed,
            "mode": args.mode, "trials": getattr(args, "trials", None),
            "radius": getattr(args, "radius", None)}
    over = {k: v for k, v in over.items() if v is not None}
    if args.config is not None:
        cfg = load_config(args.config)
        return ExperimentConfig.from_dict({**cfg.to_dict(), **over}) if over else cfg
    if args.preset is None:
        raise UsageError("one of --config or --preset is required")
    return preset_config(args.preset, **over)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"amwu: usage error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets":
        for name, p in PRESETS.items():
            print(f"{name:<12} alpha={p['alpha']:<6g} beta={p['beta']:<6g} mu={p['mu']:<6g} "
                  f"iters={p['max_iters']:<5d} x0={p['x0']}")
        return 0
    try:
        cfg = resolve_config(args)
        if args.command == "run":
            paths = cli_run(cfg, args.out or Path("."), svg=args.svg)
            for p in paths.values():
                print(p)
        elif args.command == "compare":
            rows, thr = cli_compare(cfg, args.out)
            print(format_table(rows, thr))
        elif args.command == "avoidance":
            report = cli_avoidance(cfg, threads=args.threads)
            print(json.dumps(report.summary(), sort_keys=True))
            if args.out is not None:
                _write(Path(args.out) / f"{cfg.objective}_avoidance.json", report.to_json())
        elif args.command == "spectra":
            rows, text = cli_spectra(cfg, args.out)
            if args.out is None:
                sys.stdout.write(text)
    except (UsageError, ConfigError) as exc:
        print(f"amwu: {exc}", file=sys.stderr)
        return 1
    except (NoSaddleFound, ArithmeticError, RuntimeError, OSError, ValueError) as exc:
        print(f"amwu: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
