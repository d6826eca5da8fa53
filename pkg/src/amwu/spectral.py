"""Linear stability of the accelerated map at a critical point.

At a critical point ``x*`` the accelerated step maps ``(x*, x*)`` to itself.
Its Jacobian there, written in a metric-orthonormal tangent basis, is the
block matrix

    [[(1-th)(I - a H),               th (I - a H)                  ],
     [(1-th)((1-ze) I - (s/gb) H),  ((1-ze) th + ze) I - (s th/gb) H]]

with ``H`` the Riemannian Hessian.  Diagonalising ``H`` splits the
characteristic polynomial into quadratics ``x^2 + b_i x + c_i``, one per
eigenvalue ``lambda_i``; a root above one certifies that the saddle repels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo

INSTABILITY_MARGIN = 1e-12


class NotCritical(ValueError):
    pass


class NotSaddle(ValueError):
    pass


def riemannian_hessian_eigs(obj, x_star, tol=1e-9):
    """Eigenvalues of the Hessian restricted to the tangent space, ascending.

    Uses a tangent basis ``B`` with ``B^T diag(1/x) B = I`` per block, so the
    values are those of ``B^T (hess f) B``; ``d_i - 1`` values per block.
    """
    x_star = np.asarray(x_star, dtype=float)
    gnorm = obj.grad_norm(x_star)
    if not gnorm < tol:
        raise NotCritical(f"|grad_M f| = {gnorm:.3e} at the given point")
    basis = geo.product_tangent_basis(x_star, obj.block_dims)
    reduced = basis.T @ obj.hess(x_star) @ basis
    return np.linalg.eigvalsh(0.5 * (reduced + reduced.T))


def reduced_hessian(obj, x_star):
    basis = geo.product_tangent_basis(x_star, obj.block_dims)
    h = basis.T @ obj.hess(x_star) @ basis
    return 0.5 * (h + h.T), basis


def jacobian_from_hessian(hmat, coeffs):
    """Block Jacobian for a (symmetric) Hessian matrix in orthonormal coordinates."""
    hmat = np.atleast_2d(np.asarray(hmat, dtype=float))
    n = hmat.shape[0]
    eye = np.eye(n)
    th, ze, a = coeffs.theta, coeffs.zeta, coeffs.alpha
    sg = coeffs.grad_coef
    top = eye - a * hmat
    return np.block([
        [(1 - th) * top, th * top],
        [(1 - th) * ((1 - ze) * eye - sg * hmat), ((1 - ze) * th + ze) * eye - sg * th * hmat],
    ])


def assemble_jacobian(eigs, coeffs):
    """The ``2d x 2d`` Jacobian with ``H = diag(eigs)``."""
    return jacobian_from_hessian(np.diag(np.atleast_1d(np.asarray(eigs, dtype=float))), coeffs)


@dataclass(frozen=True)
class QuadraticFactor:
    lam: float
    b: float
    c: float

    @property
    def discriminant(self):
        return self.b * self.b - 4.0 * self.c

    @property
    def real_roots(self):
        return self.discriminant >= 0

    @property
    def roots(self):
        """Both roots, larger (by real part) first."""
        disc = self.discriminant
        if disc >= 0:
            r = math.sqrt(disc)
            # stable pair: q has the sign of -b
            q = -0.5 * (self.b + math.copysign(r, self.b))
            if q == 0.0:
                return (0.0, 0.0)
            pair = sorted([q, self.c / q], reverse=True)
            return tuple(pair)
        r = cmath.sqrt(disc)
        return ((-self.b + r) / 2, (-self.b - r) / 2)

    @property
    def larger_root(self):
        return self.roots[0]

    @property
    def max_modulus(self):
        return max(abs(z) for z in self.roots)

    def __call__(self, x):
        return x * x + self.b * x + self.c


def quadratic_factor(lam, coeffs):
    th, ze, a = coeffs.theta, coeffs.zeta, coeffs.alpha
    b = (a * (1 - th) + coeffs.s * th / coeffs.gamma_bar) * lam - ze * (1 - th) - 1
    c = ze * (1 - th) * (1 - a * lam)
    return QuadraticFactor(lam=float(lam), b=float(b), c=float(c))


def factor_roots(eigs, coeffs):
    """All ``2d`` roots of the quadratic factors (complex dtype)."""
    out = []
    for lam in np.atleast_1d(eigs):
        out.extend(complex(r) for r in quadratic_factor(lam, coeffs).roots)
    return np.array(out, dtype=complex)


def multiset_distance(a, b):
    """Max distance under an optimal matching of two equal-size multisets of complex numbers."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("multisets of different size")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols])) if a.size else 0.0


def step_inequality(factor):
    """``-b (c + 1) + (c + 1)^2 > -b^2 c``, the sufficient condition for a root above 1."""
    b, c = factor.b, factor.c
    return -b * (c + 1) + (c + 1) ** 2 > -b * b * c


@dataclass(frozen=True)
class Certificate:
    unstable: bool
    max_eig: float
    lambda_min: float
    b: float
    c: float
    discriminant: float
    larger_root: complex
    inequality_holds: bool
    c_positive: bool


def certify_unstable(entry, coeffs):
    """Check that the most negative curvature direction gives a root above one.

    ``entry`` needs ``hessian_eigs`` (ascending) and a ``classification``.
    """
    eigs = np.asarray(entry.hessian_eigs, dtype=float)
    if entry.classification != "strict_saddle" or not eigs.size or eigs[0] >= 0:
        raise NotSaddle(f"classification {entry.classification!r} has no negative curvature")
    fac = quadratic_factor(eigs[0], coeffs)
    larger = fac.larger_root
    unstable = fac.real_roots and larger > 1 + INSTABILITY_MARGIN
    max_eig = max(quadratic_factor(lam, coeffs).max_modulus for lam in eigs)
    return Certificate(unstable=bool(unstable), max_eig=float(max_eig), lambda_min=float(eigs[0]),
                       b=fac.b, c=fac.c, discriminant=fac.discriminant, larger_root=larger,
                       inequality_holds=bool(step_inequality(fac)), c_positive=fac.c > 0)


def _frozen_step_map(obj, x_star, coeffs, mode):
    """Accelerated step in tangent coordinates around ``(x*, x*)`` with a frozen schedule."""
    from .algorithms import OptimizerState, accelerated_step

    dims = obj.block_dims
    basis = geo.product_tangent_basis(x_star, dims)
    # B^T G projects tangent displacements onto the orthonormal coordinates
    coord = basis.T / x_star[None, :]
    m = basis.shape[1]

    class _Frozen:
        params = None

        def coefficients(self):
            return coeffs

    frozen = (_Frozen(),)

    def psi(z):
        x = x_star + basis @ z[:m]
        v = x_star + basis @ z[m:]
        state = OptimizerState(x=x, v=v, y=x, schedules=frozen)
        new = accelerated_step(state, obj, None, mode, advance_schedule=False)
        return np.concatenate([coord @ (new.x - x_star), coord @ (new.v - x_star)])

    return psi, m


def numerical_jacobian(obj, x_star, coeffs, h=1e-5, mode="ragd"):
    psi, m = _frozen_step_map(obj, x_star, coeffs, mode)
    jac = np.empty((2 * m, 2 * m))
    for j in range(2 * m):
        e = np.zeros(2 * m)
        e[j] = h
        jac[:, j] = (psi(e) - psi(-e)) / (2 * h)
    return jac


def numerical_jacobian_check(obj, x_star, coeffs, h=1e-5, mode="ragd"):
    """Max entry-wise gap between the block formula and a finite-difference Jacobian."""
    x_star = np.asarray(x_star, dtype=float)
    gnorm = obj.grad_norm(x_star)
    if not gnorm < 1e-9:
        raise NotCritical(f"|grad_M f| = {gnorm:.3e} at the given point")
    hmat, _ = reduced_hessian(obj, x_star)
    analytic = jacobian_from_hessian(hmat, coeffs)
    return float(np.max(np.abs(analytic - numerical_jacobian(obj, x_star, coeffs, h, mode))))
