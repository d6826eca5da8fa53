"""Acceptance criteria 1-13, each at its stated tolerance.

Every test appends one ``criterion N: PASS|FAIL ...`` line that the
terminal summary prints, then asserts.
"""

import numpy as np
import pytest
from scipy.optimize import brentq

from amwu import algorithms as alg
from amwu import geometry as geo
from amwu import harness
from amwu import objectives as objs
from amwu import schedule as sch
from amwu import spectral as spec

from conftest import ACCEPTANCE_LINES, catalog

pytestmark = pytest.mark.acceptance

PRESET_ALGOS = ["mwu", "amwu_ragd", "amwu_literal", "amd_r3", "amd_r9"]


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def preset_traces():
    out = {}
    for name in harness.PRESETS:
        cfg = harness.preset_config(name, algorithms=PRESET_ALGOS)
        out[name] = harness.run_algorithms(cfg)
    return out


def test_criterion_01_geometry_round_trip():
    rng = np.random.default_rng(1)
    worst, worst_sum = 0.0, 0.0
    for d in (2, 3, 5, 10):
        x = rng.dirichlet(np.ones(d), size=2500)
        y = rng.dirichlet(np.ones(d), size=2500)
        u = geo.log_map(x, y)
        worst = max(worst, float(np.max(np.abs(geo.exp_map(x, u) - y))))
        worst_sum = max(worst_sum, float(np.max(np.abs(u.sum(axis=-1)))))
    report(1, worst < 1e-10 and worst_sum < 1e-12,
           f"max |Exp(Log y) - y| = {worst:.2e}, max |sum Log| = {worst_sum:.2e} over 10000 pairs")


def test_criterion_02_mwu_is_projected_step():
    rng = np.random.default_rng(2)
    raw, centered = 0.0, 0.0
    for _ in range(1000):
        d = int(rng.choice([2, 3, 5, 10]))
        x = rng.dirichlet(np.ones(d))
        g = rng.normal(size=d)
        a = 0.5 * rng.random() / np.max(np.abs(g))
        raw = max(raw, float(np.max(np.abs(geo.mwu_retract(x, g, a)
                                           - (x - a * geo.shahshahani_gradient(x, g))))))
        gc = geo.center_gradient(x, g)
        centered = max(centered, float(np.max(np.abs(geo.mwu_retract(x, gc, a)
                                                     - (x - a * geo.shahshahani_gradient(x, gc))))))
    report(2, raw < 1e-14,
           f"max deviation {raw:.2e} on raw gradients (identity exact only when sum x_j g_j = 0: "
           f"{centered:.2e} on centered gradients)")


def test_criterion_03_schedule(preset_traces):
    worst = 0.0
    for traces in preset_traces.values():
        for label in ("amwu_ragd", "amwu_literal"):
            for rec in traces[label]:
                worst = max(worst, max(s[3] for s in rec.schedule))
    fixed = 0.0
    for p in harness.PRESETS.values():
        params = sch.ScheduleParams(p["alpha"], p["beta"], p["mu"])
        st = sch.stationary_state(params)
        nxt = sch.advance(params, st)
        fixed = max(fixed, abs(nxt.s - st.s), abs(nxt.gamma - st.gamma))
    params = sch.ScheduleParams(0.01, 0.1, 1.0)
    s_star, gamma_star = sch.stationary_values(params)
    oracle = brentq(lambda s: s * s - 0.01 * ((1 - s) * gamma_star + s), 0, 1, xtol=1e-15)
    ok = worst < 1e-12 and fixed < 1e-10 and abs(s_star - 0.0661895) <= 1e-6 \
        and abs(s_star - oracle) < 1e-12
    report(3, ok, f"max residual {worst:.1e}; stationary drift {fixed:.1e}; "
                  f"s* = {s_star:.7f} (bisection {oracle:.7f})")


def test_criterion_04_gradients():
    rng = np.random.default_rng(4)
    worst = {}
    for obj in objs.make_corpus():
        pts = np.concatenate([rng.dirichlet(np.ones(d), size=100) for d in obj.block_dims], axis=1)
        worst[obj.name] = max(objs.check_gradient(obj, p) for p in pts)
    report(4, max(worst.values()) < 1e-6,
           "max relative FD error " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_05_simplex_invariance(preset_traces):
    bad = []
    for name, traces in preset_traces.items():
        dims = objs.get_objective(name).block_dims
        for label, trace in traces.items():
            pts = np.array([np.stack([r.x, r.y, r.v]) for r in trace])
            ok = np.all(pts > 0, axis=(1, 2))
            for b in geo.split_blocks(pts, dims):
                ok &= np.all(np.abs(b.sum(axis=-1) - 1.0) <= 1e-12, axis=1)
            if not np.all(ok):
                first = int(trace.t[np.argmin(ok)])
                bad.append(f"{name}/{label} from t={first} ({int(np.sum(~ok))} records)")
    n = sum(len(t) for t in preset_traces.values())
    report(5, not bad, f"{n} preset runs; violations: {'; '.join(bad) or 'none'}")


def test_criterion_06_fixed_points():
    worst, count = 0.0, 0
    for name, p in harness.PRESETS.items():
        obj = objs.get_objective(name)
        params = sch.ScheduleParams(p["alpha"], p["beta"], p["mu"])
        nsched = len(obj.block_dims)
        for e in catalog(name):
            for mode in alg.MODES:
                st = alg.OptimizerState(x=e.point, v=e.point, y=e.point,
                                        schedules=(sch.initial_state(params),) * nsched)
                nxt = alg.accelerated_step(st, obj, mode=mode)
                worst = max(worst, float(np.max(np.abs(nxt.x - e.point))),
                            float(np.max(np.abs(nxt.v - e.point))))
                count += 1
    report(6, worst < 1e-12, f"{count} (point, mode) pairs, max move {worst:.1e}")


def test_criterion_07_spectral_factorization():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        mu = rng.uniform(0.01, 0.99)
        beta = rng.uniform(0.001, 1.0)
        bound = sch.admissible_step_bound(beta, mu)
        alpha = rng.uniform(0.01, 0.99) * min(bound, 0.99 / mu)
        params = sch.ScheduleParams(alpha, beta, mu)
        st = sch.initial_state(params, gamma0=rng.uniform(0.1, 2.0) * mu)
        for _ in range(int(rng.integers(0, 50))):
            st = sch.advance(params, st)
        lam = rng.uniform(-10, 10, size=int(rng.integers(1, 7)))
        k = st.coefficients()
        eig = np.linalg.eigvals(spec.assemble_jacobian(lam, k))
        worst = max(worst, spec.multiset_distance(eig, spec.factor_roots(lam, k)))
    report(7, worst < 1e-8, f"max multiset distance {worst:.1e} over 200 cases")


def test_criterion_08_instability():
    p = sch.ScheduleParams(0.01, 0.1, 0.2)
    k_app = sch.DerivedCoefficients.from_stationary(p, *sch.appendix_closed_form(p))
    root = spec.quadratic_factor(-1.0, k_app).larger_root
    eig = float(np.max(np.abs(np.linalg.eigvals(spec.assemble_jacobian([-1.0], k_app)))))
    root_fixed = spec.quadratic_factor(-1.0, sch.stationary_state(p).coefficients()).larger_root
    ok = abs(root - 1.0224) <= 1e-3 and abs(eig - root) < 1e-10
    min_eig, max_dev, n = np.inf, 0.0, 0
    for name in ("trig1", "trig2"):
        q = harness.PRESETS[name]
        params = sch.ScheduleParams(q["alpha"], q["beta"], q["mu"])
        obj = objs.get_objective(name)
        for st in (sch.initial_state(params), sch.stationary_state(params)):
            k = st.coefficients()
            for e in catalog(name):
                if e.classification != "strict_saddle":
                    continue
                cert = spec.certify_unstable(e, k)
                ok &= cert.unstable and cert.max_eig > 1 + 1e-12
                min_eig = min(min_eig, cert.max_eig)
                max_dev = max(max_dev, spec.numerical_jacobian_check(obj, e.point, k))
                n += 1
    ok &= max_dev < 1e-5
    report(8, ok, f"benchmark root {root:.5f} at the closed-form stationary values "
                  f"({root_fixed:.4f} at the recursion's fixed point); {n} saddle checks, "
                  f"min max_eig {min_eig:.4f}, max Jacobian gap {max_dev:.1e}")


def test_criterion_09_convergence_ordering(preset_traces):
    r = {n: (preset_traces[n]["amwu_ragd"].f[-1], preset_traces[n]["mwu"].f[-1])
         for n in ("rosenbrock", "bohachevsky")}
    ok = all(a <= m for a, m in r.values())
    report(9, ok, "; ".join(f"{n}: A-MWU {a:.6g} vs MWU {m:.6g}" for n, (a, m) in r.items()))


def test_criterion_10_saddle_escape(preset_traces):
    traces = preset_traces["trig1"]
    cat = list(catalog("trig1"))
    esc, near = {}, {}
    for label in ("amwu_ragd", "mwu"):
        saddle, dist = harness.encountered_saddle(traces[label], cat)
        near[label] = dist
        esc[label] = harness.escape_iteration(traces[label], saddle.point, radius=0.05)
    faster = esc["amwu_ragd"] is not None and (esc["mwu"] is None or esc["amwu_ragd"] < esc["mwu"])
    cfg = harness.preset_config("trig1")
    rep = harness.cli_avoidance(cfg, trials=500, radius=0.05, seed=0, threads=4, catalog=cat)
    ok = faster and rep.saddle_fraction <= 0.01
    report(10, ok, f"escape t: A-MWU {esc['amwu_ragd']}, MWU {esc['mwu']} (closest saddle approach "
                   f"{near['amwu_ragd']:.3f} / {near['mwu']:.3f} vs radius 0.05); avoidance "
                   f"{rep.converged_to_saddle}/{rep.trials} at saddles, {rep.converged_to_min} at min, "
                   f"{rep.nonconverged} elsewhere")


def test_criterion_11_amd_smoothness(preset_traces):
    r3 = harness.smoothness(preset_traces["rosenbrock"]["amd_r3"].f)
    r9 = harness.smoothness(preset_traces["rosenbrock"]["amd_r9"].f)
    report(11, r9 <= r3, f"mean squared f-step r=9 {r9:.3e} vs r=3 {r3:.3e}")


def test_criterion_12_multi_agent_reduction():
    joint = objs.get_objective("two_agent")
    f1 = objs.Objective(
        "agent1", (2,), lambda p: np.cos(10 * p[..., 0]) * np.sin(p[..., 1]),
        lambda p: np.stack([-10 * np.sin(10 * p[..., 0]) * np.sin(p[..., 1]),
                            np.cos(10 * p[..., 0]) * np.cos(p[..., 1])], axis=-1))
    f2 = objs.Objective(
        "agent2", (2,), lambda p: np.sin(10 * p[..., 0]) * np.cos(p[..., 1]),
        lambda p: np.stack([10 * np.cos(10 * p[..., 0]) * np.cos(p[..., 1]),
                            -np.sin(10 * p[..., 0]) * np.sin(p[..., 1])], axis=-1))
    p1 = sch.ScheduleParams(0.001, 0.1, 0.5)
    p2 = sch.ScheduleParams(0.002, 0.05, 0.3)
    x0 = np.array([0.3, 0.7, 0.6, 0.4])
    rc = alg.RunConfig(max_iters=1000)
    worst = 0.0
    for mode in alg.MODES:
        both = alg.run(alg.AMWU([p1, p2], mode), joint, x0, config=rc)
        one = alg.run(alg.AMWU(p1, mode), f1, x0[:2], config=rc)
        two = alg.run(alg.AMWU(p2, mode), f2, x0[2:], config=rc)
        xs = np.array([r.x for r in both])
        worst = max(worst, float(np.max(np.abs(xs[:, :2] - np.array([r.x for r in one])))),
                    float(np.max(np.abs(xs[:, 2:] - np.array([r.x for r in two])))))
    report(12, worst < 1e-12, f"max block deviation {worst:.1e} over 1000 steps, both modes")


def test_criterion_13_step_bound():
    betas = np.linspace(0.01, 1.0, 20)
    mus = np.linspace(0.02, 0.98, 20)
    fracs = np.linspace(0.02, 0.98, 20)
    checked, bad, beyond = 0, 0, 0
    for beta in betas:
        for mu in mus:
            bound = sch.admissible_step_bound(beta, mu)
            for frac in fracs:
                params = sch.ScheduleParams(frac * bound, beta, mu)
                k = sch.DerivedCoefficients.from_stationary(params, *sch.stationary_values(params))
                for lam in (-0.1, -1.0, -10.0):
                    f = spec.quadratic_factor(lam, k)
                    checked += 1
                    fails = not (f.c > 0 and spec.step_inequality(f))
                    bad += fails
                    beyond += fails and params.alpha * mu >= 1
    report(13, bad == 0, f"{checked} (alpha, beta, mu, lambda) cases, {bad} violations "
                         f"({beyond} of them with alpha*mu >= 1, where the stationary s >= 1)")
