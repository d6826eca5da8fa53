"""Optimizers on products of simplices: MWU, accelerated MWU and entropic A-MD.

Each optimizer has a pure step function (state in, state out) and a
small class bundling its parameters so that :func:`run` can drive any of
them.  States carry flat arrays; the block structure comes from the
objective's ``block_dims``.  Leading batch axes are supported throughout so
that many independent trajectories can be stepped at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import geometry as geo
from . import schedule as sch

MODES = ("ragd", "literal")


@dataclass(frozen=True)
class OptimizerState:
    x: np.ndarray
    v: np.ndarray
    y: np.ndarray
    schedules: tuple = ()
    t: int = 0
    grad: Optional[np.ndarray] = None  # Euclidean gradient at y, when already evaluated
    log_x: Optional[np.ndarray] = None
    log_v: Optional[np.ndarray] = None
    log_y: Optional[np.ndarray] = None

    def log_weights(self, which):
        """Log-weights of ``x``, ``v`` or ``y``; taken from the weights when not stored."""
        stored = getattr(self, "log_" + which)
        return np.log(getattr(self, which)) if stored is None else stored


@dataclass(frozen=True)
class AMDState:
    x: np.ndarray
    log_z: np.ndarray
    x_tilde: np.ndarray
    k: int = 0
    grad: Optional[np.ndarray] = None

    @property
    def y(self):
        return self.x

    @property
    def v(self):
        return self.x_tilde

    @property
    def t(self):
        return self.k


@dataclass(frozen=True)
class RunConfig:
    max_iters: int = 1000
    grad_tol: float = 0.0
    trace_every: int = 1
    keep_points: bool = True

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.grad_tol < 0:
            raise ValueError("grad_tol must be non-negative")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")


@dataclass
class TraceRecord:
    t: int
    f_value: float
    grad_norm: float
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    schedule: Optional[tuple] = None


@dataclass
class Trace:
    records: list = field(default_factory=list)
    stopped_by: str = "max_iters"

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def f(self):
        return np.array([r.f_value for r in self.records])

    @property
    def grad_norms(self):
        return np.array([r.grad_norm for r in self.records])

    @property
    def t(self):
        return np.array([r.t for r in self.records])


# -- step functions ---------------------------------------------------------

def mwu_step(x, obj, alpha):
    """One linear-MWU step on every block, using the joint gradient at ``x``."""
    return geo.product_mwu(x, obj.grad(x), alpha, obj.block_dims)


def _coefficients_per_block(schedules, dims):
    if len(schedules) == 1:
        return [schedules[0].coefficients()] * len(dims)
    if len(schedules) != len(dims):
        raise ValueError(f"{len(schedules)} schedules for {len(dims)} blocks")
    return [s.coefficients() for s in schedules]


def _log_normalize(lw):
    m = np.max(lw, axis=-1, keepdims=True)
    return lw - (m + np.log(np.sum(np.exp(lw - m), axis=-1, keepdims=True)))


def _extrapolate(lx, lv, k):
    # Exp_x(theta Log_x v) in log-weights; the centering in Log cancels on normalizing
    return _log_normalize(lx + k.theta * (lv - lx))


def _ragd_update(ly, lv, gb, k):
    # exponential coordinates of grad_M at y reduce to the centered Euclidean gradient
    e = gb - np.mean(gb, axis=-1, keepdims=True)
    lx_new = _log_normalize(ly - k.alpha * e)
    lv_new = _log_normalize(ly + k.zeta * (lv - ly) - k.grad_coef * e)
    return lx_new, lv_new


def _literal_update(ly, lv, gb, k, weighted=True):
    a = k.alpha
    yb = np.exp(ly)
    num = 1.0 - a * gb
    wden = 1.0 - a * np.sum(yb * gb, axis=-1, keepdims=True)
    den = wden if weighted else 1.0 - a * np.sum(gb, axis=-1, keepdims=True)
    if np.any(num <= 0) or np.any(wden <= 0) or np.any(den <= 0):
        raise geo.StepTooLarge(f"alpha={a!r} too large at the extrapolated point")
    lx_new = ly + np.log(num) - np.log(den)
    if weighted:
        lx_new = _log_normalize(lx_new)
    mwu_disp = yb * (num / wden - 1.0)
    lv_new = _log_normalize(ly + k.zeta * (lv - ly) + mwu_disp)
    return lx_new, lv_new


def _weights(lw, normalized):
    w = np.exp(lw)
    return geo.renormalize(w) if normalized else w


def accelerated_step(state, obj, params_list=None, mode="ragd", *, weighted_denominator=True,
                     advance_schedule=True):
    """Shared body of the single- and multi-agent accelerated steps.

    All blocks of the intermediate point are formed before the (single)
    gradient evaluation, which is then shared by the x- and v-updates.
    Iterates are propagated as log-weights: near the boundary the weights
    themselves can fall below the smallest positive double while the
    dynamics stay well defined.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    dims = obj.block_dims
    coeffs = _coefficients_per_block(state.schedules, dims)
    lxs = geo.split_blocks(state.log_weights("x"), dims)
    lvs = geo.split_blocks(state.log_weights("v"), dims)
    lys = [_extrapolate(lx, lv, k) for lx, lv, k in zip(lxs, lvs, coeffs)]
    ly = np.concatenate(lys, axis=-1)
    y = np.concatenate([_weights(b, True) for b in lys], axis=-1)
    g = obj.grad(y)
    gs = geo.split_blocks(g, dims)
    new_lx, new_lv = [], []
    for lyb, lvb, gb, k in zip(lys, lvs, gs, coeffs):
        if mode == "ragd":
            lxb, lvb_new = _ragd_update(lyb, lvb, gb, k)
        else:
            lxb, lvb_new = _literal_update(lyb, lvb, gb, k, weighted_denominator)
        new_lx.append(lxb)
        new_lv.append(lvb_new)
    x_normalized = mode == "ragd" or weighted_denominator
    schedules = state.schedules
    if advance_schedule:
        schedules = tuple(sch.advance(s.params, s) for s in state.schedules)
    return OptimizerState(
        x=np.concatenate([_weights(b, x_normalized) for b in new_lx], axis=-1),
        v=np.concatenate([_weights(b, True) for b in new_lv], axis=-1),
        y=y, schedules=schedules, t=state.t + 1, grad=g,
        log_x=np.concatenate(new_lx, axis=-1), log_v=np.concatenate(new_lv, axis=-1), log_y=ly)


def amwu_step(state, obj, params=None, mode="ragd", **options):
    """Single-agent A-MWU: one schedule shared by every block.

    ``params`` is accepted for signature symmetry; the schedule already
    carries its parameters.
    """
    if len(state.schedules) != 1:
        raise ValueError("single-agent step expects exactly one schedule")
    return accelerated_step(state, obj, None, mode, **options)


def multi_agent_amwu_step(state, obj, per_agent_params=None, mode="ragd", **options):
    """A-MWU with an independent schedule per block (agent)."""
    if len(state.schedules) != len(obj.block_dims):
        raise ValueError("multi-agent step expects one schedule per block")
    return accelerated_step(state, obj, None, mode, **options)


def amd_step(state, obj, r, step):
    """One step of accelerated mirror descent with the entropy mirror map.

    ``lam = r / (r + k)``; ``x = lam z + (1 - lam) x_tilde``; ``z`` takes an
    exponentiated-gradient step of size ``k step / r``; ``x_tilde`` is one MWU
    step from ``x``.  ``z`` is stored as log-weights to avoid underflow.
    """
    dims = obj.block_dims
    k = state.k
    lam = r / (r + k)
    z = _softmax_blocks(state.log_z, dims)
    x = lam * z + (1.0 - lam) * state.x_tilde
    x = np.concatenate([geo.renormalize(b) for b in geo.split_blocks(x, dims)], axis=-1)
    g = obj.grad(x)
    log_z = _normalize_log_blocks(state.log_z - (k * step / r) * g, dims)
    x_tilde = geo.product_mwu(x, g, step, dims)
    return AMDState(x=x, log_z=log_z, x_tilde=x_tilde, k=k + 1, grad=g)


def _normalize_log_blocks(log_w, dims):
    out = []
    for b in geo.split_blocks(log_w, dims):
        m = np.max(b, axis=-1, keepdims=True)
        out.append(b - (m + np.log(np.sum(np.exp(b - m), axis=-1, keepdims=True))))
    return np.concatenate(out, axis=-1)


def _softmax_blocks(log_w, dims):
    return np.exp(_normalize_log_blocks(log_w, dims))


# -- optimizer objects ------------------------------------------------------

class MWU:
    name = "mwu"

    def __init__(self, alpha):
        self.alpha = float(alpha)

    def init(self, obj, x0, v0=None):
        x0 = np.asarray(x0, dtype=float)
        return OptimizerState(x=x0, v=x0, y=x0, t=0)

    def step(self, state, obj):
        g = obj.grad(state.x)
        x = geo.product_mwu(state.x, g, self.alpha, obj.block_dims)
        return OptimizerState(x=x, v=x, y=state.x, t=state.t + 1, grad=g)

    def describe(self):
        return {"algorithm": self.name, "alpha": self.alpha}


class AMWU:
    """Accelerated MWU.

    ``params`` is a single :class:`ScheduleParams` (one schedule shared by all
    blocks) or a sequence with one entry per block (multi-agent form).
    """

    def __init__(self, params, mode="ragd", gamma0=None, *, weighted_denominator=True):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.params = params
        self.mode = mode
        self.gamma0 = gamma0
        self.options = {"weighted_denominator": weighted_denominator}

    @property
    def name(self):
        return f"amwu_{self.mode}"

    @property
    def multi_agent(self):
        return not isinstance(self.params, sch.ScheduleParams)

    def init(self, obj, x0, v0=None):
        x0 = np.asarray(x0, dtype=float)
        v0 = x0 if v0 is None else np.asarray(v0, dtype=float)
        if self.multi_agent:
            if len(self.params) != len(obj.block_dims):
                raise ValueError("need one ScheduleParams per block")
            g0 = self.gamma0 if isinstance(self.gamma0, Sequence) else [self.gamma0] * len(self.params)
            schedules = tuple(sch.initial_state(p, g) for p, g in zip(self.params, g0))
        else:
            schedules = (sch.initial_state(self.params, self.gamma0),)
        return OptimizerState(x=x0, v=v0, y=x0, schedules=schedules, t=0)

    def step(self, state, obj):
        if self.multi_agent:
            return multi_agent_amwu_step(state, obj, self.params, self.mode, **self.options)
        return amwu_step(state, obj, self.params, self.mode, **self.options)

    def describe(self):
        plist = self.params if self.multi_agent else [self.params]
        return {"algorithm": self.name, "mode": self.mode,
                "params": [_params_dict(p) for p in plist],
                "gamma0": self.gamma0, **self.options}


class AMD:
    def __init__(self, r, step):
        if r < 1:
            raise ValueError("r must be >= 1")
        self.r = float(r)
        self.step_size = float(step)

    @property
    def name(self):
        return f"amd_r{self.r:g}"

    def init(self, obj, x0, v0=None):
        x0 = np.asarray(x0, dtype=float)
        return AMDState(x=x0, log_z=np.log(x0), x_tilde=x0, k=0)

    def step(self, state, obj):
        return amd_step(state, obj, self.r, self.step_size)

    def describe(self):
        return {"algorithm": "amd", "r": self.r, "step": self.step_size}


def _params_dict(p):
    d = {"alpha": p.alpha, "beta": p.beta, "mu": p.mu}
    if math.isfinite(p.lipschitz_L):
        d["lipschitz_L"] = p.lipschitz_L
    return d


# -- driver -----------------------------------------------------------------

def _record(state, obj, t, keep_points):
    y = state.y
    g = state.grad if state.grad is not None else obj.grad(y)
    rec = TraceRecord(t=t, f_value=float(obj.value(state.x)),
                      grad_norm=geo.gradient_norm(y, g, obj.block_dims))
    if keep_points:
        rec.x, rec.y, rec.v = state.x.copy(), y.copy(), state.v.copy()
    schedules = getattr(state, "schedules", ())
    if schedules:
        rec.schedule = tuple((s.s, s.gamma, s.gamma_bar, s.residual) for s in schedules)
    return rec


def run(optimizer, obj, x0, v0=None, config=None):
    """Iterate ``optimizer`` from ``x0`` and return a :class:`Trace`.

    Record ``t`` holds ``x_t`` and ``f(x_t)``, and the gradient norm at the
    point where step ``t`` evaluated the gradient (``x_0`` for ``t = 0``).
    Stops once that norm is ``<= grad_tol`` or after ``max_iters`` steps.
    """
    config = config or RunConfig()
    geo.validate_product(x0, obj.block_dims)
    if v0 is not None:
        geo.validate_product(v0, obj.block_dims)
    state = optimizer.init(obj, x0, v0)
    trace = Trace()
    rec = _record(state, obj, 0, config.keep_points)
    trace.records.append(rec)
    if rec.grad_norm <= config.grad_tol:
        trace.stopped_by = "grad_tol"
        return trace
    for t in range(1, config.max_iters + 1):
        try:
            state = optimizer.step(state, obj)
        except (geo.StepTooLarge, sch.NoRootInUnitInterval) as exc:
            err = type(exc)(f"iteration {t}: {exc}")
            err.iteration = t
            raise err from exc
        rec = _record(state, obj, t, config.keep_points)
        if t % config.trace_every == 0 or t == config.max_iters:
            trace.records.append(rec)
        # the gradient norm at y_{t-1} is known only after step t
        if rec.grad_norm <= config.grad_tol:
            if trace.records[-1] is not rec:
                trace.records.append(rec)
            trace.stopped_by = "grad_tol"
            break
    return trace


def run_batch(optimizer, obj, x0, max_iters):
    """Step a batch of trajectories (rows of ``x0``) without recording; returns final x."""
    state = optimizer.init(obj, np.asarray(x0, dtype=float))
    for _ in range(max_iters):
        state = optimizer.step(state, obj)
    return state.x
