import numpy as np
import pytest

from amwu import objectives as objs
from amwu import schedule as sch
from amwu import spectral as spec

from conftest import catalog


def coeffs(alpha=0.01, beta=0.1, mu=0.2):
    return sch.initial_state(sch.ScheduleParams(alpha, beta, mu)).coefficients()


def test_factor_roots_are_roots():
    k = coeffs()
    for lam in (-5.0, -1.0, 0.3, 4.0):
        f = spec.quadratic_factor(lam, k)
        for r in f.roots:
            assert abs(f(r)) < 1e-12


def test_jacobian_eigenvalues_split_into_factors(rng):
    k = coeffs()
    eigs = rng.uniform(-10, 10, size=4)
    jac = spec.assemble_jacobian(eigs, k)
    assert jac.shape == (8, 8)
    assert spec.multiset_distance(np.linalg.eigvals(jac), spec.factor_roots(eigs, k)) < 1e-8


def test_non_diagonal_hessian_has_same_spectrum(rng):
    k = coeffs()
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    lam = np.array([-2.0, 0.5, 3.0])
    jac = spec.jacobian_from_hessian(q @ np.diag(lam) @ q.T, k)
    assert spec.multiset_distance(np.linalg.eigvals(jac), spec.factor_roots(lam, k)) < 1e-8


def test_unit_eigenvalue_at_zero_curvature():
    # lam = 0 gives g(1) = 0 exactly
    f = spec.quadratic_factor(0.0, coeffs())
    assert abs(f(1.0)) < 1e-15


def test_negative_curvature_gives_root_above_one():
    for lam in (-0.1, -1.0, -10.0):
        f = spec.quadratic_factor(lam, coeffs())
        assert f(1.0) < 0
        assert f.real_roots and f.larger_root > 1
        assert spec.step_inequality(f)


def test_b_tends_to_minus_two():
    p = sch.ScheduleParams(1e-9, 1e-6, 0.5)
    f = spec.quadratic_factor(-1.0, sch.stationary_state(p).coefficients())
    assert f.b == pytest.approx(-2.0, abs=1e-4)


def test_benchmark_root_at_appendix_values():
    p = sch.ScheduleParams(0.01, 0.1, 0.2)
    k = sch.DerivedCoefficients.from_stationary(p, *sch.appendix_closed_form(p))
    f = spec.quadratic_factor(-1.0, k)
    assert f.b == pytest.approx(-1.8878, abs=1e-4)
    assert f.c == pytest.approx(0.8848, abs=1e-4)
    assert f.larger_root == pytest.approx(1.0224, abs=1e-3)
    other = np.max(np.abs(np.linalg.eigvals(spec.assemble_jacobian([-1.0], k))))
    assert other == pytest.approx(f.larger_root, abs=1e-12)


def test_certify_rejects_minimum():
    entry = objs.CriticalPointEntry(point=np.full(3, 1 / 3), hessian_eigs=np.array([0.5, 1.0]),
                                    classification="min")
    with pytest.raises(spec.NotSaddle):
        spec.certify_unstable(entry, coeffs())


def test_trig1_saddles_certify():
    k = coeffs(0.005, 0.1, 0.2)
    saddles = [e for e in catalog("trig1") if e.classification == "strict_saddle"]
    assert saddles
    for e in saddles:
        cert = spec.certify_unstable(e, k)
        assert cert.unstable and cert.c_positive and cert.inequality_holds
        assert cert.max_eig > 1


def test_hessian_eigs_against_parameterized_differences():
    obj = objs.get_objective("trig1")
    e = next(e for e in catalog("trig1") if e.classification == "strict_saddle")
    # curvature along a metric-unit tangent direction, by second differences of f
    b = spec.geo.tangent_basis(e.point)
    h = 1e-4
    f = lambda t, col: obj.value(e.point + t * b[:, col])
    fd = np.array([[(f(h, i) - 2 * f(0, i) + f(-h, i)) / h ** 2 for i in range(2)]])
    reduced, _ = spec.reduced_hessian(obj, e.point)
    np.testing.assert_allclose(np.diag(reduced), fd[0], rtol=1e-5)
    assert np.min(np.linalg.eigvalsh(reduced)) < 0


def test_numerical_jacobian_matches():
    obj = objs.get_objective("trig1")
    k = coeffs(0.005, 0.1, 0.2)
    for e in catalog("trig1"):
        assert spec.numerical_jacobian_check(obj, e.point, k) < 1e-5


def test_literal_mode_linearization_differs():
    # the literal momentum update is not the RAGD composition; only x and y agree
    obj = objs.get_objective("trig1")
    e = catalog("trig1")[1]
    k = coeffs(0.005, 0.1, 0.2)
    assert spec.numerical_jacobian_check(obj, e.point, k, mode="literal") > 1e-3


def test_not_critical():
    with pytest.raises(spec.NotCritical):
        spec.riemannian_hessian_eigs(objs.get_objective("trig1"), np.full(3, 1 / 3))


def test_multiset_distance():
    assert spec.multiset_distance([1, 2j], [2j, 1 + 1e-9]) == pytest.approx(1e-9)
    with pytest.raises(ValueError):
        spec.multiset_distance([1], [1, 2])
