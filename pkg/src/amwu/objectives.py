"""Test objectives on products of simplices, with a critical-point catalog.

Every objective is defined on the ambient orthant so that Euclidean
gradients and Hessians make sense; the three-variable functions carry the
``x + y + z - 1`` term that vanishes on the simplex.  ``value`` and ``grad``
accept a batch of points (leading axes); ``hess`` takes a single point.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from .spectral import riemannian_hessian_eigs

log = logging.getLogger(__name__)

CRITICAL_TOL = 1e-9
EIG_TOL = 1e-9


@dataclass(frozen=True)
class Objective:
    name: str
    block_dims: tuple
    value: Callable
    grad: Callable
    hess: Optional[Callable] = None
    description: str = ""

    @property
    def dim(self):
        return int(sum(self.block_dims))

    def __call__(self, x):
        return self.value(x)

    def riemannian_grad(self, x):
        return geo.product_gradient(x, self.grad(x), self.block_dims)

    def grad_norm(self, x):
        """Shahshahani norm of the Riemannian gradient."""
        return geo.gradient_norm(x, self.grad(x), self.block_dims)


# -- the corpus -------------------------------------------------------------

def _rosenbrock():
    def value(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return (0.5 - x) ** 2 + 0.25 * (y - x ** 2) ** 2 + x + y + z - 1

    def grad(p):
        x, y = p[..., 0], p[..., 1]
        gx = -2 * (0.5 - x) - x * (y - x ** 2) + 1
        gy = 0.5 * (y - x ** 2) + 1
        return np.stack([gx, gy, np.ones_like(gx)], axis=-1)

    def hess(p):
        x, y = p[0], p[1]
        return np.array([[2 - y + 3 * x ** 2, -x, 0.0],
                         [-x, 0.5, 0.0],
                         [0.0, 0.0, 0.0]])

    return Objective("rosenbrock", (3,), value, grad, hess,
                     "(0.5 - x)^2 + 0.25 (y - x^2)^2 + x + y + z - 1")


def _bohachevsky():
    pi = np.pi

    def value(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return (x ** 2 + 2 * y ** 2 - 0.3 * np.cos(3 * pi * x)
                - 0.4 * np.cos(4 * pi * y) + x + y + z - 1)

    def grad(p):
        x, y = p[..., 0], p[..., 1]
        gx = 2 * x + 0.9 * pi * np.sin(3 * pi * x) + 1
        gy = 4 * y + 1.6 * pi * np.sin(4 * pi * y) + 1
        return np.stack([gx, gy, np.ones_like(gx)], axis=-1)

    def hess(p):
        x, y = p[0], p[1]
        return np.diag([2 + 2.7 * pi ** 2 * np.cos(3 * pi * x),
                        4 + 6.4 * pi ** 2 * np.cos(4 * pi * y),
                        0.0])

    return Objective("bohachevsky", (3,), value, grad, hess,
                     "x^2 + 2y^2 - 0.3 cos(3 pi x) - 0.4 cos(4 pi y) + x + y + z - 1")


def _trig1(a=8.5):
    def value(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return np.cos(a * x) * np.sin(a * (y - 0.4)) + np.sin(a * z)

    def grad(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        sx, cx = np.sin(a * x), np.cos(a * x)
        sy, cy = np.sin(a * (y - 0.4)), np.cos(a * (y - 0.4))
        return np.stack([-a * sx * sy, a * cx * cy, a * np.cos(a * z)], axis=-1)

    def hess(p):
        x, y, z = p
        sx, cx = np.sin(a * x), np.cos(a * x)
        sy, cy = np.sin(a * (y - 0.4)), np.cos(a * (y - 0.4))
        a2 = a * a
        return np.array([[-a2 * cx * sy, -a2 * sx * cy, 0.0],
                         [-a2 * sx * cy, -a2 * cx * sy, 0.0],
                         [0.0, 0.0, -a2 * np.sin(a * z)]])

    return Objective("trig1", (3,), value, grad, hess,
                     "cos(8.5x) sin(8.5(y - 0.4)) + sin(8.5z)")


def _trig2():
    def value(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return np.cos(0.7 * x) * np.sin(y) * np.sin(0.9 * z) + x ** 2

    def grad(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        c, s = np.cos(0.7 * x), np.sin(0.7 * x)
        sy, cy = np.sin(y), np.cos(y)
        sz, cz = np.sin(0.9 * z), np.cos(0.9 * z)
        return np.stack([-0.7 * s * sy * sz + 2 * x,
                         c * cy * sz,
                         0.9 * c * sy * cz], axis=-1)

    def hess(p):
        x, y, z = p
        c, s = np.cos(0.7 * x), np.sin(0.7 * x)
        sy, cy = np.sin(y), np.cos(y)
        sz, cz = np.sin(0.9 * z), np.cos(0.9 * z)
        hxy = -0.7 * s * cy * sz
        hxz = -0.63 * s * sy * cz
        hyz = 0.9 * c * cy * cz
        return np.array([[-0.49 * c * sy * sz + 2, hxy, hxz],
                         [hxy, -c * sy * sz, hyz],
                         [hxz, hyz, -0.81 * c * sy * sz]])

    return Objective("trig2", (3,), value, grad, hess,
                     "cos(0.7x) sin(y) sin(0.9z) + x^2")


def _two_agent():
    def value(p):
        x1, x2, y1, y2 = (p[..., i] for i in range(4))
        return np.cos(10 * x1) * np.sin(x2) + np.sin(10 * y1) * np.cos(y2)

    def grad(p):
        x1, x2, y1, y2 = (p[..., i] for i in range(4))
        return np.stack([-10 * np.sin(10 * x1) * np.sin(x2),
                         np.cos(10 * x1) * np.cos(x2),
                         10 * np.cos(10 * y1) * np.cos(y2),
                         -np.sin(10 * y1) * np.sin(y2)], axis=-1)

    def hess(p):
        x1, x2, y1, y2 = p
        h = np.zeros((4, 4))
        h[0, 0] = -100 * np.cos(10 * x1) * np.sin(x2)
        h[0, 1] = h[1, 0] = -10 * np.sin(10 * x1) * np.cos(x2)
        h[1, 1] = -np.cos(10 * x1) * np.sin(x2)
        h[2, 2] = -100 * np.sin(10 * y1) * np.cos(y2)
        h[2, 3] = h[3, 2] = -10 * np.cos(10 * y1) * np.sin(y2)
        h[3, 3] = -np.sin(10 * y1) * np.cos(y2)
        return h

    return Objective("two_agent", (2, 2), value, grad, hess,
                     "cos(10 x1) sin(x2) + sin(10 y1) cos(y2)")


_FACTORIES = {
    "rosenbrock": _rosenbrock,
    "bohachevsky": _bohachevsky,
    "trig1": _trig1,
    "trig2": _trig2,
    "two_agent": _two_agent,
}


def make_corpus():
    return [factory() for factory in _FACTORIES.values()]


def get_objective(name):
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise KeyError(f"unknown objective {name!r}; choose from {sorted(_FACTORIES)}") from None


def linear_objective(c, dims=None):
    """``f(x) = <c, x>``; constant on the simplex when ``c`` is constant."""
    c = np.asarray(c, dtype=float)
    dims = (c.size,) if dims is None else tuple(dims)
    return Objective("linear", dims,
                     lambda p: np.sum(np.asarray(p) * c, axis=-1),
                     lambda p: np.broadcast_to(c, np.shape(p)).copy(),
                     lambda p: np.zeros((c.size, c.size)))


def quadratic_objective(center, dims=None):
    """``f(x) = 0.5 |x - center|^2``."""
    center = np.asarray(center, dtype=float)
    dims = (center.size,) if dims is None else tuple(dims)
    return Objective("quadratic", dims,
                     lambda p: 0.5 * np.sum((np.asarray(p) - center) ** 2, axis=-1),
                     lambda p: np.asarray(p, dtype=float) - center,
                     lambda p: np.eye(center.size))


def add_simplex_term(obj, k):
    """Add ``k * (sum_i x_i - n_blocks)``, which vanishes on the product of simplices."""
    nb = len(obj.block_dims)
    return Objective(f"{obj.name}+{k}", obj.block_dims,
                     lambda p: obj.value(p) + k * (np.sum(p, axis=-1) - nb),
                     lambda p: obj.grad(p) + k,
                     obj.hess, obj.description)


# -- finite-difference checks -----------------------------------------------

def check_gradient(obj, point, h=1e-6):
    """Max over coordinates of ``|g - g_fd| / max(1, |g|_inf)`` (central differences)."""
    point = np.asarray(point, dtype=float)
    g = np.asarray(obj.grad(point), dtype=float)
    fd = np.empty_like(g)
    for i in range(point.size):
        e = np.zeros_like(point)
        e[i] = h
        fd[i] = (obj.value(point + e) - obj.value(point - e)) / (2 * h)
    return float(np.max(np.abs(g - fd)) / max(1.0, float(np.max(np.abs(g)))))


def check_hessian(obj, point, h=1e-6):
    """``(asymmetry, max |H - H_fd| / max(1, |H|_inf))`` using differences of ``grad``."""
    point = np.asarray(point, dtype=float)
    hm = np.asarray(obj.hess(point), dtype=float)
    fd = np.empty_like(hm)
    for i in range(point.size):
        e = np.zeros_like(point)
        e[i] = h
        fd[:, i] = (obj.grad(point + e) - obj.grad(point - e)) / (2 * h)
    asym = float(np.max(np.abs(hm - hm.T)))
    return asym, float(np.max(np.abs(hm - fd)) / max(1.0, float(np.max(np.abs(hm)))))


# -- critical points --------------------------------------------------------

class NonConvergence(RuntimeError):
    pass


@dataclass
class CriticalPointEntry:
    point: np.ndarray
    hessian_eigs: np.ndarray
    classification: str
    grad_norm: float = 0.0
    value: float = field(default=float("nan"))

    @property
    def lambda_min(self):
        return float(self.hessian_eigs[0]) if self.hessian_eigs.size else 0.0

    @property
    def unstable(self):
        return self.classification == "strict_saddle"

    @property
    def is_local_max(self):
        """All curvatures negative; still classified ``strict_saddle``."""
        return bool(self.hessian_eigs.size and np.all(self.hessian_eigs < -EIG_TOL))


def classify(eigs, tol=EIG_TOL):
    """``strict_saddle`` iff the smallest eigenvalue is below ``-tol`` (maxima included)."""
    eigs = np.asarray(eigs)
    if eigs.size and eigs[0] < -tol:
        return "strict_saddle"
    if eigs.size and np.all(eigs > tol):
        return "min"
    return "degenerate"


def _reduction_matrix(dims):
    """Map from free coordinates (first d_i - 1 of each block) to ambient displacements."""
    n, m = int(sum(dims)), int(sum(dims)) - len(dims)
    mat = np.zeros((n, m))
    r = c = 0
    for d in dims:
        mat[r:r + d - 1, c:c + d - 1] = np.eye(d - 1)
        mat[r + d - 1, c:c + d - 1] = -1.0
        r += d
        c += d - 1
    return mat


def _refine(obj, seed, tol, max_iter=100, min_weight=1e-8):
    """Damped Newton on the reduced (free-coordinate) gradient.

    Convergence requires the reduced Euclidean gradient itself to vanish;
    the Shahshahani gradient alone also vanishes on the boundary.
    """
    dims = obj.block_dims
    red = _reduction_matrix(dims)
    x = np.asarray(seed, dtype=float).copy()

    def rgrad(p):
        return red.T @ obj.grad(p)

    def done(p, gp):
        return np.max(np.abs(gp)) < tol and obj.grad_norm(p) < tol

    g = rgrad(x)
    for _ in range(max_iter):
        if done(x, g):
            break
        hm = red.T @ obj.hess(x) @ red
        step = -np.linalg.lstsq(hm, g, rcond=None)[0]
        t, base = 1.0, float(g @ g)
        while t > 1e-10:
            cand = x + t * (red @ step)
            if np.all(cand > 0):
                cand = _renorm_blocks(cand, dims)
                gc = rgrad(cand)
                if float(gc @ gc) < base:
                    x, g = cand, gc
                    break
            t *= 0.5
        else:
            break
    if done(x, g) and np.min(x) > min_weight:
        return x
    raise NonConvergence(f"seed {np.round(seed, 6)} stalled at reduced |grad|={np.max(np.abs(g)):.3e}")


def _renorm_blocks(x, dims):
    return np.concatenate([geo.renormalize(b) for b in geo.split_blocks(x, dims)], axis=-1)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def simplex_grid(dims, per_axis=12):
    """Interior lattice points ``k / per_axis`` (all ``k_i >= 1``) of each block, combined."""
    block_grids = [[np.array(c, dtype=float) / per_axis for c in _compositions(per_axis, d)]
                   for d in dims]
    return [np.concatenate(parts) for parts in itertools.product(*block_grids)]


def find_critical_points(obj, seeds=None, tol=1e-12, dedup=1e-6):
    """Damped Newton from each seed in free coordinates; de-duplicated and classified.

    Seeds that fail to converge are logged and skipped.  Returned entries
    are sorted by objective value.
    """
    if seeds is None:
        seeds = simplex_grid(obj.block_dims)
    found = []
    for seed in seeds:
        try:
            p = _refine(obj, seed, tol)
        except (NonConvergence, np.linalg.LinAlgError) as exc:
            log.debug("skipping seed: %s", exc)
            continue
        if any(np.max(np.abs(p - q)) < dedup for q in found):
            continue
        found.append(p)
    entries = []
    for p in found:
        eigs = riemannian_hessian_eigs(obj, p)
        entries.append(CriticalPointEntry(point=p, hessian_eigs=eigs,
                                          classification=classify(eigs),
                                          grad_norm=obj.grad_norm(p),
                                          value=float(obj.value(p))))
    entries.sort(key=lambda e: e.value)
    return entries
