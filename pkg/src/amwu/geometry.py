"""Shahshahani geometry of the positive simplex and of products of simplices.

Points are float arrays with strictly positive entries summing to one along
the last axis (leading axes, when present, index a batch of points).
Tangent vectors sum to zero.  A product point is a single flat array together
with a tuple of block sizes; every product operation is the single-simplex
operation applied block by block.

Two representations of a tangent direction appear here.  ``exp_map`` takes
its argument ``u`` in exponential coordinates, so that
``exp_map(x, u) = x * e^u / <x, e^u>``.  Its differential at ``u = 0`` is
``P_x = diag(x) - x x^T``; a displacement ``w`` (what ``shahshahani_gradient``
returns) corresponds to ``u = w / x`` up to an additive constant, which the
exponential map ignores.  ``to_exp_coords`` performs that conversion.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

SUM_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for shape mismatches and invalid simplex points."""


class StepTooLarge(ArithmeticError):
    """An MWU factor ``1 - alpha * df/dx_i`` (or its weighted mean) is not positive."""


def _as_vector(a, name="array"):
    a = np.asarray(a, dtype=float)
    if a.ndim < 1:
        raise GeometryError(f"{name} must be at least 1-d, got a scalar")
    return a


def _check_same_length(a, b):
    if a.shape != b.shape:
        raise GeometryError(f"dimension mismatch: {a.shape} vs {b.shape}")


def _wsum(x, g):
    return np.sum(x * g, axis=-1, keepdims=True)


def renormalize(x):
    """Divide by the exact sum; suppresses drift of the simplex constraint."""
    return x / np.sum(x, axis=-1, keepdims=True)


def is_simplex_point(x, tol=SUM_TOL):
    x = np.asarray(x, dtype=float)
    return bool(x.ndim == 1 and x.size >= 2 and np.all(x > 0)
                and abs(np.sum(x) - 1.0) <= tol)


def validate_point(x, tol=SUM_TOL):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise GeometryError(f"point must be 1-d, got shape {x.shape}")
    if x.size < 2:
        raise GeometryError("a simplex point needs at least two weights")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise GeometryError("simplex point must be strictly positive")
    if abs(np.sum(x) - 1.0) > tol:
        raise GeometryError(f"weights sum to {np.sum(x)!r}, not 1")
    return x


def shahshahani_gradient(x, euclidean_grad):
    """Riemannian gradient on the simplex, ``x_i (df_i - sum_j x_j df_j)``.

    The result is the tangent displacement ``V(x) - x`` of one MWU step per
    unit step size; it always sums to zero (up to rounding).
    """
    x = _as_vector(x, "x")
    g = _as_vector(euclidean_grad, "euclidean_grad")
    _check_same_length(x, g)
    return x * (g - _wsum(x, g))


def shahshahani_norm(x, tangent):
    """Norm of a tangent displacement under the metric ``g_ii = 1 / x_i``."""
    x = np.asarray(x, dtype=float)
    tangent = np.asarray(tangent, dtype=float)
    out = np.sqrt(np.sum(tangent * tangent / x, axis=-1))
    return float(out) if out.ndim == 0 else out


def gradient_norm(x, euclidean_grad, dims=None):
    """``|grad_M f|`` as ``sqrt(sum x_i (g_i - <x, g>)^2)`` per block; no division by ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(euclidean_grad, dtype=float)
    dims = (x.shape[-1],) if dims is None else dims
    sq = sum(np.sum(xb * (gb - _wsum(xb, gb)) ** 2, axis=-1)
             for xb, gb in zip(split_blocks(x, dims), split_blocks(g, dims)))
    out = np.sqrt(sq)
    return float(out) if out.ndim == 0 else out


def metric_inner(x, u, v):
    return np.sum(np.asarray(u) * np.asarray(v) / np.asarray(x), axis=-1)


def to_exp_coords(x, displacement):
    """Exponential-coordinate vector whose exp-map differential is ``displacement``."""
    u = np.asarray(displacement, dtype=float) / np.asarray(x, dtype=float)
    return u - np.mean(u, axis=-1, keepdims=True)


def exp_map(x, u):
    """``Exp_x(u)_i = x_i e^{u_i} / sum_j x_j e^{u_j}``, evaluated with a max shift."""
    x = _as_vector(x, "x")
    u = _as_vector(u, "u")
    _check_same_length(x, u)
    w = x * np.exp(u - np.max(u, axis=-1, keepdims=True))
    return renormalize(w)


def log_map(x, y):
    """Inverse of ``exp_map``: ``u_i = ln(S y_i / x_i)`` with ``S = (prod x_i/y_i)^(1/d)``.

    Computed in log space; ``ln S`` is the mean of ``ln x - ln y`` so the
    result sums to zero.
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    _check_same_length(x, y)
    r = np.log(y) - np.log(x)
    return r - np.mean(r, axis=-1, keepdims=True)


def mwu_retract(x, euclidean_grad, alpha):
    """Linear MWU step ``x_i (1 - a g_i) / (1 - a sum_s x_s g_s)``.

    Equals ``x + projected_displacement(x, g, alpha)``; for a centered
    gradient (see :func:`center_gradient`) that is exactly
    ``x - alpha * shahshahani_gradient(x, g)``.
    """
    x = _as_vector(x, "x")
    g = _as_vector(euclidean_grad, "euclidean_grad")
    _check_same_length(x, g)
    num = 1.0 - alpha * g
    den = 1.0 - alpha * _wsum(x, g)
    if np.any(num <= 0) or np.any(den <= 0):
        raise StepTooLarge(
            f"alpha={alpha!r} too large for gradient with max |g|={np.max(np.abs(g)):.6g}")
    return renormalize(x * num / den)


def projected_displacement(x, euclidean_grad, alpha):
    """``V(x) - x``: the step ``-alpha x*g`` pushed radially back onto the simplex.

    With ``c = sum_j x_j g_j`` this is ``-alpha grad / (1 - alpha c)``, so it
    coincides with ``-alpha * shahshahani_gradient`` exactly when ``c = 0``.
    """
    x = _as_vector(x, "x")
    g = _as_vector(euclidean_grad, "euclidean_grad")
    _check_same_length(x, g)
    return -alpha * shahshahani_gradient(x, g) / (1.0 - alpha * _wsum(x, g))


def center_gradient(x, euclidean_grad):
    """Representative of the gradient with ``sum_j x_j g_j = 0``.

    Only the tangential part of a Euclidean gradient is meaningful on the
    simplex; shifting by a constant leaves ``shahshahani_gradient`` unchanged.
    """
    g = np.asarray(euclidean_grad, dtype=float)
    return g - _wsum(np.asarray(x, dtype=float), g)


# -- products of simplices -------------------------------------------------

def block_slices(dims: Sequence[int]):
    stops = np.cumsum(dims)
    return [slice(int(b - d), int(b)) for d, b in zip(dims, stops)]


def split_blocks(z, dims):
    """Blocks along the last axis; leading axes (a batch of points) are kept."""
    z = np.asarray(z, dtype=float)
    if z.ndim < 1 or z.shape[-1] != int(np.sum(dims)):
        raise GeometryError(f"vector of shape {z.shape} does not match blocks {tuple(dims)}")
    return [z[..., s] for s in block_slices(dims)]


def validate_product(x, dims, tol=SUM_TOL):
    for block in split_blocks(x, dims):
        validate_point(block, tol)
    return np.asarray(x, dtype=float)


def _blockwise(fn, dims, *arrays):
    parts = [split_blocks(a, dims) for a in arrays]
    return np.concatenate([fn(*args) for args in zip(*parts)], axis=-1)


def product_gradient(x, euclidean_grad, dims):
    return _blockwise(shahshahani_gradient, dims, x, euclidean_grad)


def product_exp(x, u, dims):
    return _blockwise(exp_map, dims, x, u)


def product_log(x, y, dims):
    return _blockwise(log_map, dims, x, y)


def product_to_exp_coords(x, displacement, dims):
    return _blockwise(to_exp_coords, dims, x, displacement)


def product_mwu(x, euclidean_grad, alpha, dims):
    return _blockwise(lambda a, b: mwu_retract(a, b, alpha), dims, x, euclidean_grad)


def product_center(x, euclidean_grad, dims):
    return _blockwise(center_gradient, dims, x, euclidean_grad)


def validate_product_batch(x, dims, tol=SUM_TOL):
    """True when every block of every row is positive and sums to one."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        return False
    return all(np.all(np.abs(np.sum(b, axis=-1) - 1.0) <= tol) for b in split_blocks(x, dims))


def product_norm(x, tangent):
    """Product-metric norm; the metric is block diagonal so blocks just add."""
    return shahshahani_norm(x, tangent)


def tangent_basis(x):
    """Columns ``B`` spanning ``{sum u = 0}`` with ``B^T diag(1/x) B = I``."""
    x = _as_vector(x, "x")
    d = x.size
    # Euclidean basis of the sum-zero plane, then metric Gram-Schmidt via Cholesky.
    e = np.vstack([np.eye(d - 1), -np.ones((1, d - 1))])
    gram = e.T @ (e / x[:, None])
    chol = np.linalg.cholesky(gram)
    return e @ np.linalg.inv(chol).T


def product_tangent_basis(x, dims):
    blocks = [tangent_basis(b) for b in split_blocks(x, dims)]
    n = int(np.sum(dims))
    m = int(np.sum(dims)) - len(dims)
    basis = np.zeros((n, m))
    r = c = 0
    for b in blocks:
        basis[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return basis
